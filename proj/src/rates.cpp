#include "mcr2/rates.hpp"

#include "mcr2/errors.hpp"

#include <cmath>
#include <string>

namespace mcr2 {
namespace {

constexpr Eigen::Index kSvdPathMaxSide = 64;
constexpr double kJitter = 1e-12;

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidInput("log-det scale alpha must be positive and finite");
  }
}

// I + alpha * G, where G is the Gram matrix on the requested side.
Matrix identity_plus_gram(MatrixCRef Z, double alpha, GramSide side) {
  const Eigen::Index n = side == GramSide::features ? Z.rows() : Z.cols();
  Matrix S = Matrix::Identity(n, n);
  if (side == GramSide::features) {
    S.selfadjointView<Eigen::Lower>().rankUpdate(Z, alpha);
  } else {
    S.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose(), alpha);
  }
  return S.selfadjointView<Eigen::Lower>();
}

Eigen::LLT<Matrix> factor_with_retry(Matrix S) {
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() == Eigen::Success) return llt;
  S.diagonal().array() += kJitter;
  llt.compute(S);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization of I + alpha*Gram failed after jitter retry");
  }
  return llt;
}

double logdet_from_llt(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// (I + alpha A A^T)^{-1} B, choosing the cheaper side.
Matrix solve_identity_plus_gram(MatrixCRef A, double alpha, MatrixCRef B) {
  if (A.cols() == 0) return B;
  if (A.rows() <= A.cols()) {
    return factor_with_retry(identity_plus_gram(A, alpha, GramSide::features)).solve(B);
  }
  // Woodbury: (I + a A A^T)^{-1} = I - a A (I + a A^T A)^{-1} A^T.
  const auto llt = factor_with_retry(identity_plus_gram(A, alpha, GramSide::samples));
  const Matrix inner = llt.solve(A.transpose() * B);
  return B - alpha * (A * inner);
}

// Columns with positive weight, scaled by sqrt(weight): A A^T = Z Pi Z^T.
struct WeightedColumns {
  Matrix scaled;    // Z_sel * diag(sqrt(w_sel))
  Matrix weighted;  // Z_sel * diag(w_sel)
  std::vector<Eigen::Index> index;
};

WeightedColumns select_class(MatrixCRef Z, const Vector& w) {
  WeightedColumns out;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) > 0.0) out.index.push_back(i);
  }
  const auto n = static_cast<Eigen::Index>(out.index.size());
  out.scaled.resize(Z.rows(), n);
  out.weighted.resize(Z.rows(), n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Eigen::Index i = out.index[static_cast<std::size_t>(c)];
    out.scaled.col(c) = std::sqrt(w(i)) * Z.col(i);
    out.weighted.col(c) = w(i) * Z.col(i);
  }
  return out;
}

void require_membership_matches(MatrixCRef Z, const Membership& pi) {
  if (pi.num_samples() != Z.cols()) {
    throw DimensionMismatch("membership has " + std::to_string(pi.num_samples()) +
                            " rows but Z has " + std::to_string(Z.cols()) + " columns");
  }
}

void check_inputs(MatrixCRef Z, const RateParams& params) {
  validate_features(Z);
  params.validate();
}

double whole_alpha(MatrixCRef Z, const RateParams& params) {
  return static_cast<double>(Z.rows()) / (static_cast<double>(Z.cols()) * params.eps_sq);
}

}  // namespace

double logdet_identity_plus_gram_via(MatrixCRef Z, double alpha, GramSide side) {
  require_alpha(alpha);
  if (!Z.allFinite()) throw InvalidInput("log-det input contains non-finite entries");
  if (Z.size() == 0) return 0.0;
  return logdet_from_llt(factor_with_retry(identity_plus_gram(Z, alpha, side)));
}

double logdet_identity_plus_gram(MatrixCRef Z, double alpha) {
  require_alpha(alpha);
  if (!Z.allFinite()) throw InvalidInput("log-det input contains non-finite entries");
  if (Z.size() == 0) return 0.0;
  const Eigen::Index side = std::min(Z.rows(), Z.cols());
  if (side <= kSvdPathMaxSide) {
    const Vector sigma = Eigen::BDCSVD<Matrix>(Z).singularValues();
    return (alpha * sigma.array().square()).log1p().sum();
  }
  return logdet_identity_plus_gram_via(
      Z, alpha, Z.rows() <= Z.cols() ? GramSide::features : GramSide::samples);
}

double coding_rate(MatrixCRef Z, const RateParams& params) {
  check_inputs(Z, params);
  return params.from_nats(0.5 * logdet_identity_plus_gram(Z, whole_alpha(Z, params)));
}

double coding_length(MatrixCRef Z, const RateParams& params) {
  return static_cast<double>(Z.rows() + Z.cols()) * coding_rate(Z, params);
}

SegmentedRate segmented_rate(MatrixCRef Z, const Membership& pi, const RateParams& params) {
  check_inputs(Z, params);
  require_membership_matches(Z, pi);
  const double d = static_cast<double>(Z.rows());
  const double m = static_cast<double>(Z.cols());
  SegmentedRate out;
  out.per_class.assign(static_cast<std::size_t>(pi.num_classes()), 0.0);
  for (int j = 0; j < pi.num_classes(); ++j) {
    if (pi.is_empty_class(j)) continue;
    const double mass = pi.class_mass(j);
    const auto cls = select_class(Z, pi.weights().col(j));
    const double logdet = logdet_identity_plus_gram(cls.scaled, d / (mass * params.eps_sq));
    out.per_class[static_cast<std::size_t>(j)] = params.from_nats(mass / (2.0 * m) * logdet);
  }
  for (double v : out.per_class) out.total += v;
  return out;
}

RateReport rate_reduction(MatrixCRef Z, const Membership& pi, const RateParams& params) {
  RateReport report;
  report.rate_whole = coding_rate(Z, params);
  auto seg = segmented_rate(Z, pi, params);
  report.rate_segmented = seg.total;
  report.per_class_rates = std::move(seg.per_class);
  report.reduction = report.rate_whole - report.rate_segmented;
  report.params = params;
  report.d = Z.rows();
  report.m = Z.cols();
  return report;
}

double scaled_rate(MatrixCRef Z, const RateParams& params, double gamma1, double gamma2) {
  check_inputs(Z, params);
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) throw InvalidInput("gamma1 and gamma2 must be positive");
  const double logdet = logdet_identity_plus_gram(Z, gamma2 * whole_alpha(Z, params));
  return params.from_nats(0.5 / gamma1 * logdet);
}

double pair_distance(MatrixCRef Zi, MatrixCRef Zj, const RateParams& params) {
  validate_features(Zi, "first sample set");
  validate_features(Zj, "second sample set");
  if (Zi.rows() != Zj.rows()) {
    throw DimensionMismatch("pair_distance: sample sets have different feature dimensions");
  }
  Matrix joined(Zi.rows(), Zi.cols() + Zj.cols());
  joined << Zi, Zj;
  LabelVector labels(static_cast<std::size_t>(joined.cols()), 0);
  for (Eigen::Index c = Zi.cols(); c < joined.cols(); ++c) labels[static_cast<std::size_t>(c)] = 1;
  return rate_reduction(joined, Membership::from_labels(labels, 2), params).reduction;
}

Matrix grad_scaled_rate(MatrixCRef Z, const RateParams& params, double gamma1, double gamma2) {
  check_inputs(Z, params);
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) throw InvalidInput("gamma1 and gamma2 must be positive");
  const double alpha = gamma2 * whole_alpha(Z, params);
  // d/dZ [1/(2 g1) logdet(I + a Z Z^T)] = (a / g1) (I + a Z Z^T)^{-1} Z.
  Matrix g = (1.0 / gamma1 * alpha) * solve_identity_plus_gram(Z, alpha, Z);
  return g * params.from_nats(1.0);
}

Matrix grad_coding_rate(MatrixCRef Z, const RateParams& params) {
  return grad_scaled_rate(Z, params, 1.0, 1.0);
}

Matrix grad_segmented_rate(MatrixCRef Z, const Membership& pi, const RateParams& params) {
  check_inputs(Z, params);
  require_membership_matches(Z, pi);
  const double d = static_cast<double>(Z.rows());
  const double m = static_cast<double>(Z.cols());
  Matrix grad = Matrix::Zero(Z.rows(), Z.cols());
  for (int j = 0; j < pi.num_classes(); ++j) {
    if (pi.is_empty_class(j)) continue;
    const double mass = pi.class_mass(j);
    const double alpha = d / (mass * params.eps_sq);
    const auto cls = select_class(Z, pi.weights().col(j));
    // (tr/m) * alpha * (I + alpha Z Pi Z^T)^{-1} Z Pi, with tr * alpha = d / eps^2.
    const Matrix part = solve_identity_plus_gram(cls.scaled, alpha, cls.weighted);
    const double scale = d / (m * params.eps_sq);
    for (std::size_t c = 0; c < cls.index.size(); ++c) {
      grad.col(cls.index[c]) += scale * part.col(static_cast<Eigen::Index>(c));
    }
  }
  return grad * params.from_nats(1.0);
}

Matrix grad_rate_reduction(MatrixCRef Z, const Membership& pi, const RateParams& params) {
  return grad_coding_rate(Z, params) - grad_segmented_rate(Z, pi, params);
}

}  // namespace mcr2

#include "mcr2/theory.hpp"

#include "mcr2/errors.hpp"
#include "mcr2/rates.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mcr2::theory {
namespace {

constexpr int kScanPoints = 4096;
constexpr double kBracketWidth = 1e-10;

BoundReport make_report(double lhs, double rhs, bool equality_expected) {
  BoundReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.equality_expected = equality_expected;
  r.tolerance = kResidualTolerance;
  return r;
}

// Columns of Z whose label is j.
Matrix class_block(MatrixCRef Z, const LabelVector& labels, int j) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == j) idx.push_back(static_cast<Eigen::Index>(i));
  }
  Matrix out(Z.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = Z.col(idx[c]);
  return out;
}

LabelVector require_hard(const Membership& pi, const char* op) {
  if (!pi.is_hard()) {
    throw InvalidInput(std::string(op) + " requires a hard (one-hot) membership");
  }
  return pi.argmax_labels();
}

double max_cross_inner(const std::vector<Matrix>& parts) {
  double worst = 0.0;
  for (std::size_t a = 0; a < parts.size(); ++a) {
    for (std::size_t b = a + 1; b < parts.size(); ++b) {
      if (parts[a].cols() == 0 || parts[b].cols() == 0) continue;
      worst = std::max(worst, (parts[a].transpose() * parts[b]).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace

RateBounds check_rate_bounds(const std::vector<Matrix>& parts, const RateParams& params) {
  params.validate();
  if (parts.size() < 2) throw InvalidInput("check_rate_bounds needs at least two parts");
  const Eigen::Index d = parts.front().rows();
  Eigen::Index m = 0;
  for (const auto& p : parts) {
    validate_features(p, "part");
    if (p.rows() != d) throw DimensionMismatch("parts must share the feature dimension");
    m += p.cols();
  }
  Matrix joined(d, m);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    joined.middleCols(offset, p.cols()) = p;
    offset += p.cols();
  }

  const double dd = static_cast<double>(d);
  const double mm = static_cast<double>(m);
  const double whole = 0.5 * mm * logdet_identity_plus_gram(joined, dd / (mm * params.eps_sq));
  double lower_sum = 0.0;
  double upper_sum = 0.0;
  for (const auto& p : parts) {
    const double mj = static_cast<double>(p.cols());
    lower_sum += 0.5 * mj * logdet_identity_plus_gram(p, dd / (mj * params.eps_sq));
    upper_sum += 0.5 * mm * logdet_identity_plus_gram(p, dd / (mm * params.eps_sq));
  }

  const Matrix cov0 = parts.front() * parts.front().transpose() / static_cast<double>(parts.front().cols());
  double cov_gap = 0.0;
  for (std::size_t j = 1; j < parts.size(); ++j) {
    const Matrix covj = parts[j] * parts[j].transpose() / static_cast<double>(parts[j].cols());
    cov_gap = std::max(cov_gap, (covj - cov0).cwiseAbs().maxCoeff());
  }

  RateBounds out;
  out.lower = make_report(params.from_nats(lower_sum), params.from_nats(whole),
                          cov_gap <= kEqualityTolerance);
  out.upper = make_report(params.from_nats(whole), params.from_nats(upper_sum),
                          max_cross_inner(parts) <= kEqualityTolerance);
  return out;
}

BoundReport check_reduction_upper_bound(MatrixCRef Z, const Membership& pi,
                                        const RateParams& params) {
  validate_features(Z);
  params.validate();
  if (pi.num_samples() != Z.cols()) throw DimensionMismatch("membership/feature sample count mismatch");
  const LabelVector labels = require_hard(pi, "check_reduction_upper_bound");
  const double d = static_cast<double>(Z.rows());
  const double m = static_cast<double>(Z.cols());

  std::vector<Matrix> blocks;
  double bound = 0.0;
  for (int j = 0; j < pi.num_classes(); ++j) {
    Matrix Zj = class_block(Z, labels, j);
    if (Zj.cols() == 0) continue;
    const double mj = static_cast<double>(Zj.cols());
    bound += (m * logdet_identity_plus_gram(Zj, d / (m * params.eps_sq)) -
              mj * logdet_identity_plus_gram(Zj, d / (mj * params.eps_sq))) /
             (2.0 * m);
    blocks.push_back(std::move(Zj));
  }
  const double reduction = rate_reduction(Z, pi, params).reduction;
  return make_report(reduction, params.from_nats(bound), max_cross_inner(blocks) <= kEqualityTolerance);
}

BoundReport check_concavity_in_pi(MatrixCRef Z, const Membership& pi_a, const Membership& pi_b,
                                  double alpha, const RateParams& params) {
  if (pi_a.num_samples() != pi_b.num_samples() || pi_a.num_classes() != pi_b.num_classes()) {
    throw DimensionMismatch("memberships must share shape");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("mixing weight must lie in (0, 1)");
  const Membership mix((1.0 - alpha) * pi_a.weights() + alpha * pi_b.weights());
  const double ra = segmented_rate(Z, pi_a, params).total;
  const double rb = segmented_rate(Z, pi_b, params).total;
  const double rmix = segmented_rate(Z, mix, params).total;
  return make_report((1.0 - alpha) * ra + alpha * rb, rmix, pi_a.weights() == pi_b.weights());
}

BoundReport check_logdet_concavity(MatrixCRef A, MatrixCRef B, double alpha) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows()) {
    throw DimensionMismatch("check_logdet_concavity expects square matrices of equal size");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("mixing weight must lie in (0, 1)");
  auto logdet = [](const Matrix& S) {
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success) throw InvalidInput("matrix is not symmetric positive definite");
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  };
  const Matrix mix = (1.0 - alpha) * A + alpha * B;
  return make_report((1.0 - alpha) * logdet(A) + alpha * logdet(B), logdet(mix), A == B);
}

void ScalarProgram::validate() const {
  if (rank < 1) throw InvalidInput("scalar program rank must be positive");
  if (!(mass > 0.0)) throw InvalidInput("scalar program mass must be positive");
  if (d < 1 || m < 1) throw InvalidInput("scalar program dimensions must be positive");
  if (rank > d) throw InvalidInput("scalar program rank exceeds d");
  if (!(eps_sq > 0.0)) throw InvalidInput("scalar program eps_sq must be positive");
}

double ScalarProgram::gain(double x) const {
  const double dd = static_cast<double>(d);
  const double mm = static_cast<double>(m);
  return mm * std::log1p(dd * x / (mm * eps_sq)) - mass * std::log1p(dd * x / (mass * eps_sq));
}

double ScalarProgram::objective(const std::vector<double>& x) const {
  double total = 0.0;
  for (double v : x) total += gain(v);
  return total / (2.0 * static_cast<double>(m));
}

bool ScalarProgram::diversity_condition() const {
  const double ratio = static_cast<double>(d) / static_cast<double>(rank);
  return eps_sq * eps_sq < mass / static_cast<double>(m) * ratio * ratio;
}

namespace {

// Best profile whose nonzero entries number exactly s.
SingularValueSolution best_on_support(const ScalarProgram& prog, int s) {
  const int r = prog.rank;
  const double c = prog.mass;
  SingularValueSolution out;
  out.support = s;
  auto pad = [&](std::vector<double> x) {
    x.resize(static_cast<std::size_t>(r), 0.0);
    return x;
  };
  if (s == 1) {
    out.sigmas = pad({std::sqrt(c)});
    out.objective = prog.gain(c) / (2.0 * prog.m);
    return out;
  }

  const double equal_x = c / s;
  const double equal_obj = s * prog.gain(equal_x) / (2.0 * prog.m);

  const double sm1 = static_cast<double>(s - 1);
  auto family = [&](double xh) {
    return (sm1 * prog.gain(xh) + prog.gain(std::max(0.0, c - sm1 * xh))) / (2.0 * prog.m);
  };
  const double lo = c / s;
  const double hi = c / sm1;
  const double step = (hi - lo) / kScanPoints;
  int best_i = 1;
  double best_v = family(lo + step);
  for (int i = 2; i < kScanPoints; ++i) {
    const double v = family(lo + i * step);
    if (v > best_v) {
      best_v = v;
      best_i = i;
    }
  }
  // Golden-section refinement inside the neighbouring scan cells.
  double a = lo + (best_i - 1) * step;
  double b = lo + (best_i + 1) * step;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = family(x1);
  double f2 = family(x2);
  while (b - a > kBracketWidth) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = family(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = family(x1);
    }
  }
  const double xh = 0.5 * (a + b);
  const double one_low_obj = family(xh);

  if (one_low_obj > equal_obj + 1e-12 * std::max(1.0, std::abs(equal_obj))) {
    out.family = ProfileFamily::one_low;
    std::vector<double> sig(static_cast<std::size_t>(s - 1), std::sqrt(xh));
    sig.push_back(std::sqrt(std::max(0.0, c - sm1 * xh)));
    out.sigmas = pad(sig);
    out.objective = one_low_obj;
  } else {
    out.family = ProfileFamily::equal_split;
    out.sigmas = pad(std::vector<double>(static_cast<std::size_t>(s), std::sqrt(equal_x)));
    out.objective = equal_obj;
  }
  return out;
}

}  // namespace

SingularValueSolution optimal_singular_values(const ScalarProgram& prog) {
  prog.validate();
  SingularValueSolution best = best_on_support(prog, prog.rank);
  for (int s = prog.rank - 1; s >= 1; --s) {
    auto cand = best_on_support(prog, s);
    if (cand.objective > best.objective + 1e-12 * std::max(1.0, std::abs(best.objective))) best = std::move(cand);
  }
  return best;
}

OptimalityDiagnostics diagnose_optimum(MatrixCRef Z, const Membership& pi,
                                       const RateParams& params) {
  validate_features(Z);
  params.validate();
  if (pi.num_samples() != Z.cols()) throw DimensionMismatch("membership/feature sample count mismatch");
  const LabelVector labels = require_hard(pi, "diagnose_optimum");
  const Eigen::Index d = Z.rows();
  const double m = static_cast<double>(Z.cols());

  Matrix unit = Z;
  for (Eigen::Index i = 0; i < unit.cols(); ++i) {
    const double n = unit.col(i).norm();
    if (n > 0.0) unit.col(i) /= n;
  }
  const Matrix cosines = unit.transpose() * unit;

  OptimalityDiagnostics out;
  for (Eigen::Index a = 0; a < cosines.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < cosines.cols(); ++b) {
      if (labels[static_cast<std::size_t>(a)] != labels[static_cast<std::size_t>(b)]) {
        out.max_interclass_cosine = std::max(out.max_interclass_cosine, std::abs(cosines(a, b)));
      }
    }
  }

  bool diverse = true;
  for (int j = 0; j < pi.num_classes(); ++j) {
    const Matrix Zj = class_block(Z, labels, j);
    if (Zj.cols() == 0) {
      out.per_class_singular_values.emplace_back();
      out.per_class_rank.push_back(0);
      continue;
    }
    Vector sigma = Eigen::BDCSVD<Matrix>(Zj).singularValues();
    const double top = sigma.size() > 0 ? sigma(0) : 0.0;
    int rank = 0;
    for (Eigen::Index p = 0; p < sigma.size(); ++p) {
      if (top > 0.0 && sigma(p) > kRankThreshold * top) ++rank;
    }
    out.per_class_singular_values.push_back(std::move(sigma));
    out.per_class_rank.push_back(rank);

    const double mj = static_cast<double>(Zj.cols());
    const double budget = static_cast<double>(std::min<Eigen::Index>(d, Zj.cols()));
    const double ratio = static_cast<double>(d) / budget;
    if (!(params.eps_sq * params.eps_sq < mj / m * ratio * ratio)) diverse = false;
  }
  out.diversity_condition_satisfied = diverse;
  return out;
}

double optimal_rate_reduction(const Membership& pi, Eigen::Index d, const RateParams& params) {
  params.validate();
  double total = 0.0;
  for (int j = 0; j < pi.num_classes(); ++j) {
    if (pi.is_empty_class(j)) continue;
    ScalarProgram prog;
    prog.mass = pi.class_mass(j);
    prog.rank = static_cast<int>(std::min<double>(static_cast<double>(d), std::round(prog.mass)));
    prog.rank = std::max(prog.rank, 1);
    prog.d = static_cast<int>(d);
    prog.m = static_cast<int>(pi.num_samples());
    prog.eps_sq = params.eps_sq;
    total += optimal_singular_values(prog).objective;
  }
  return params.from_nats(total);
}

}  // namespace mcr2::theory

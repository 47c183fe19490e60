#include "mcr2/errors.hpp"
#include "mcr2/learn.hpp"
#include "mcr2/rates.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mcr2::learn {
namespace {

// Tangent gradients below this norm count as a stationary point.
constexpr double kStationaryGradNorm = 1e-10;

LabelVector hard_labels_for(const Membership& pi) {
  if (!pi.is_hard()) {
    throw InvalidInput("per-class Frobenius normalization requires a hard membership");
  }
  return pi.argmax_labels();
}

TraceRecord record(int iter, MatrixCRef Z, const Membership& pi, const RateParams& params,
                   const OptimizerConfig& cfg, double grad_norm) {
  TraceRecord r;
  r.iter = iter;
  r.rate_whole = cfg.use_ctrl ? scaled_rate(Z, params, cfg.gamma1, cfg.gamma2) : coding_rate(Z, params);
  r.rate_segmented = segmented_rate(Z, pi, params).total;
  r.reduction = r.rate_whole - r.rate_segmented;
  r.grad_norm = grad_norm;
  return r;
}

}  // namespace

std::string_view to_string(Normalization n) {
  return n == Normalization::unit_sphere ? "unit_sphere" : "per_class_frobenius";
}

Normalization parse_normalization(std::string_view text) {
  if (text == "unit_sphere") return Normalization::unit_sphere;
  if (text == "per_class_frobenius") return Normalization::per_class_frobenius;
  throw InvalidInput("unknown normalization '" + std::string(text) +
                     "' (expected unit_sphere or per_class_frobenius)");
}

void OptimizerConfig::validate() const {
  if (!(step_size >= 0.0) || !std::isfinite(step_size)) throw InvalidInput("step_size must be >= 0");
  if (max_iters < 0) throw InvalidInput("max_iters must be >= 0");
  if (!(tol > 0.0)) throw InvalidInput("tol must be positive");
  if (use_ctrl && (!(gamma1 > 0.0) || !(gamma2 > 0.0))) {
    throw InvalidInput("gamma1 and gamma2 must be positive");
  }
}

double objective(MatrixCRef Z, const Membership& pi, const RateParams& params,
                 const OptimizerConfig& cfg) {
  const double whole = cfg.use_ctrl ? scaled_rate(Z, params, cfg.gamma1, cfg.gamma2) : coding_rate(Z, params);
  return whole - segmented_rate(Z, pi, params).total;
}

Matrix objective_gradient(MatrixCRef Z, const Membership& pi, const RateParams& params,
                          const OptimizerConfig& cfg) {
  Matrix g = cfg.use_ctrl ? grad_scaled_rate(Z, params, cfg.gamma1, cfg.gamma2) : grad_coding_rate(Z, params);
  g -= grad_segmented_rate(Z, pi, params);
  return g;
}

// Columns or classes already within this of the constraint are left as is, so
// feasible inputs pass through bit-for-bit.
constexpr double kFeasibleTol = 1e-14;

Matrix project_to_constraint(MatrixCRef Z, const Membership& pi, Normalization mode) {
  Matrix out = Z;
  if (mode == Normalization::unit_sphere) {
    for (Eigen::Index i = 0; i < out.cols(); ++i) {
      const double n = out.col(i).norm();
      if (!(n > 0.0)) throw DegenerateFeature("column " + std::to_string(i) + " has zero norm");
      if (std::abs(n - 1.0) > kFeasibleTol) out.col(i) /= n;
    }
    return out;
  }
  const LabelVector labels = hard_labels_for(pi);
  for (int j = 0; j < pi.num_classes(); ++j) {
    double sq = 0.0;
    double count = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != j) continue;
      sq += out.col(static_cast<Eigen::Index>(i)).squaredNorm();
      count += 1.0;
    }
    if (count == 0.0) continue;
    if (!(sq > 0.0)) throw DegenerateFeature("class " + std::to_string(j) + " has zero Frobenius norm");
    const double scale = std::sqrt(count / sq);
    if (std::abs(scale - 1.0) <= kFeasibleTol) continue;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == j) out.col(static_cast<Eigen::Index>(i)) *= scale;
    }
  }
  return out;
}

Matrix tangent_projection(MatrixCRef Z, MatrixCRef G, const Membership& pi, Normalization mode) {
  Matrix out = G;
  if (mode == Normalization::unit_sphere) {
    for (Eigen::Index i = 0; i < out.cols(); ++i) {
      const double zz = Z.col(i).squaredNorm();
      out.col(i) -= (Z.col(i).dot(G.col(i)) / zz) * Z.col(i);
    }
    return out;
  }
  const LabelVector labels = hard_labels_for(pi);
  for (int j = 0; j < pi.num_classes(); ++j) {
    double zz = 0.0;
    double zg = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != j) continue;
      const auto c = static_cast<Eigen::Index>(i);
      zz += Z.col(c).squaredNorm();
      zg += Z.col(c).dot(G.col(c));
    }
    if (zz == 0.0) continue;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != j) continue;
      const auto c = static_cast<Eigen::Index>(i);
      out.col(c) -= (zg / zz) * Z.col(c);
    }
  }
  return out;
}

OptimizeResult optimize_representation(MatrixCRef Z0, const Membership& pi,
                                       const RateParams& params, const OptimizerConfig& cfg) {
  validate_features(Z0, "initial features");
  params.validate();
  cfg.validate();
  if (pi.num_samples() != Z0.cols()) throw DimensionMismatch("membership/feature sample count mismatch");

  OptimizeResult out;
  out.Z = project_to_constraint(Z0, pi, cfg.normalization);
  double value = objective(out.Z, pi, params, cfg);
  Matrix direction = tangent_projection(out.Z, objective_gradient(out.Z, pi, params, cfg), pi, cfg.normalization);
  out.trace.push_back(record(0, out.Z, pi, params, cfg, direction.norm()));

  double step = cfg.step_size;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    if (!direction.allFinite()) throw NumericalError("non-finite gradient at iteration " + std::to_string(iter));
    const double grad_norm = direction.norm();
    if (pi.num_classes() == 1 || grad_norm == 0.0) break;

    bool accepted = false;
    Matrix candidate;
    double candidate_value = value;
    double trial = step;
    for (int h = 0; h <= OptimizerConfig::kMaxHalvings; ++h, trial *= 0.5) {
      try {
        candidate = project_to_constraint(out.Z + trial * direction, pi, cfg.normalization);
      } catch (const DegenerateFeature&) {
        continue;
      }
      candidate_value = objective(candidate, pi, params, cfg);
      if (!std::isfinite(candidate_value)) throw NumericalError("objective became non-finite");
      if (candidate_value >= value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (iter == 1 && grad_norm > kStationaryGradNorm) {
        throw StagnationError("no ascent step found after " + std::to_string(OptimizerConfig::kMaxHalvings) +
                              " halvings on the first iteration");
      }
      break;
    }

    const double improvement = candidate_value - value;
    out.Z = std::move(candidate);
    value = candidate_value;
    direction = tangent_projection(out.Z, objective_gradient(out.Z, pi, params, cfg), pi, cfg.normalization);
    out.trace.push_back(record(iter, out.Z, pi, params, cfg, direction.norm()));
    step = std::min(2.0 * trial, cfg.step_size);
    if (improvement < cfg.tol) break;
  }
  return out;
}

}  // namespace mcr2::learn

#include "mcr2/types.hpp"

#include "mcr2/errors.hpp"

#include <cmath>
#include <numbers>

namespace mcr2 {

std::string_view to_string(LogBase base) {
  return base == LogBase::bits ? "bits" : "nats";
}

LogBase parse_log_base(std::string_view text) {
  if (text == "bits") return LogBase::bits;
  if (text == "nats") return LogBase::nats;
  throw InvalidInput("unknown log base '" + std::string(text) + "' (expected bits or nats)");
}

double RateParams::from_nats(double value) const {
  return log_base == LogBase::bits ? value / std::numbers::ln2 : value;
}

void RateParams::validate() const {
  if (!(eps_sq > 0.0) || !std::isfinite(eps_sq)) {
    throw InvalidInput("eps_sq must be a positive finite number");
  }
}

void validate_features(MatrixCRef Z, std::string_view what) {
  if (Z.rows() < 1 || Z.cols() < 1) {
    throw InvalidInput(std::string(what) + " must have at least one row and one column");
  }
  if (!Z.allFinite()) {
    throw InvalidInput(std::string(what) + " contains non-finite entries");
  }
}

double max_unit_norm_error(MatrixCRef Z) {
  if (Z.cols() == 0) return 0.0;
  return (Z.colwise().norm().array() - 1.0).abs().maxCoeff();
}

Membership::Membership(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() < 1 || weights_.cols() < 1) {
    throw InvalidInput("membership must be a nonempty m x k matrix");
  }
  if (!weights_.allFinite()) {
    throw InvalidInput("membership contains non-finite entries");
  }
  if ((weights_.array() < 0.0).any()) {
    throw InvalidInput("membership entries must be nonnegative");
  }
  const Vector row_sums = weights_.rowwise().sum();
  for (Eigen::Index i = 0; i < row_sums.size(); ++i) {
    if (std::abs(row_sums(i) - 1.0) > kRowSumTolerance) {
      throw InvalidInput("membership row " + std::to_string(i) + " sums to " +
                         std::to_string(row_sums(i)) + ", expected 1");
    }
  }
}

Membership Membership::from_labels(const LabelVector& labels, int k) {
  if (k < 1) throw InvalidInput("class count must be positive");
  if (labels.empty()) throw InvalidInput("label vector is empty");
  Matrix w = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= k) {
      throw InvalidInput("label " + std::to_string(y) + " at position " + std::to_string(i) +
                         " is outside [0, " + std::to_string(k) + ")");
    }
    w(static_cast<Eigen::Index>(i), y) = 1.0;
  }
  return Membership(std::move(w));
}

bool Membership::is_hard(double tol) const {
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    if (std::abs(weights_.row(i).maxCoeff() - 1.0) > tol) return false;
  }
  return true;
}

LabelVector Membership::argmax_labels() const {
  LabelVector out(static_cast<std::size_t>(weights_.rows()));
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    Eigen::Index best = 0;
    weights_.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace mcr2

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mcr2 {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Features are stored d x m: one column per sample.
using FeatureMatrix = Matrix;
using MatrixCRef = Eigen::Ref<const Matrix>;

// Class index per sample, each value in [0, k).
using LabelVector = std::vector<int>;

enum class LogBase { bits, nats };

std::string_view to_string(LogBase base);
LogBase parse_log_base(std::string_view text);

// Distortion is carried as eps^2 throughout.
struct RateParams {
  double eps_sq = 0.5;
  LogBase log_base = LogBase::bits;

  // Converts a natural-log quantity into the configured unit.
  double from_nats(double value) const;
  void validate() const;
};

// Throws InvalidInput when Z is empty or holds a non-finite entry.
void validate_features(MatrixCRef Z, std::string_view what = "feature matrix");

// Max over columns of |norm - 1|.
double max_unit_norm_error(MatrixCRef Z);

// m x k row-stochastic matrix; column j is the diagonal of Pi_j.
class Membership {
 public:
  static constexpr double kRowSumTolerance = 1e-9;
  static constexpr double kEmptyClassMass = 1e-12;

  Membership() = default;
  // Throws InvalidInput on negative entries or rows not summing to 1.
  explicit Membership(Matrix weights);

  static Membership from_labels(const LabelVector& labels, int k);

  const Matrix& weights() const { return weights_; }
  Eigen::Index num_samples() const { return weights_.rows(); }
  int num_classes() const { return static_cast<int>(weights_.cols()); }

  // tr(Pi_j).
  double class_mass(int j) const { return weights_.col(j).sum(); }
  bool is_empty_class(int j) const { return class_mass(j) <= kEmptyClassMass; }

  // Every row one-hot within tolerance.
  bool is_hard(double tol = 1e-9) const;
  // Row-wise argmax (lowest index on ties).
  LabelVector argmax_labels() const;

 private:
  Matrix weights_;
};

}  // namespace mcr2

#pragma once

// Maximizing the rate reduction: projected gradient ascent over free
// features under norm constraints, and full-batch training of a small fully
// connected feature map whose outputs live on the unit sphere.

#include "mcr2/types.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace mcr2::learn {

enum class Normalization { per_class_frobenius, unit_sphere };

std::string_view to_string(Normalization n);
Normalization parse_normalization(std::string_view text);

struct OptimizerConfig {
  double step_size = 0.5;
  int max_iters = 5000;
  double tol = 1e-8;  // stop once an accepted step improves the objective by less
  Normalization normalization = Normalization::unit_sphere;
  bool use_ctrl = false;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  std::uint64_t seed = 0;

  // Halvings tried before a step is declared impossible.
  static constexpr int kMaxHalvings = 30;

  // step_size may be 0 (a no-op run); everything else must be positive.
  void validate() const;
};

struct TraceRecord {
  int iter = 0;
  double rate_whole = 0.0;      // R, or the rescaled rate under CTRL
  double rate_segmented = 0.0;  // Rc
  double reduction = 0.0;       // objective value
  double grad_norm = 0.0;
};

using OptTrace = std::vector<TraceRecord>;

// Objective maximized by both optimizers: R - Rc, or R~ - Rc under CTRL.
double objective(MatrixCRef Z, const Membership& pi, const RateParams& params,
                 const OptimizerConfig& cfg);
Matrix objective_gradient(MatrixCRef Z, const Membership& pi, const RateParams& params,
                          const OptimizerConfig& cfg);

// Maps Z onto the constraint set (unit columns, or ||Z_j||_F^2 = m_j per class).
Matrix project_to_constraint(MatrixCRef Z, const Membership& pi, Normalization mode);
// Removes the component of G normal to the constraint set at Z.
Matrix tangent_projection(MatrixCRef Z, MatrixCRef G, const Membership& pi, Normalization mode);

struct OptimizeResult {
  Matrix Z;
  OptTrace trace;
};

// Z <- retract(Z + eta * P(grad)), halving eta up to 30 times whenever a step
// would decrease the objective. Throws StagnationError if the very first
// iteration admits no ascent step while the tangent gradient is non-negligible.
OptimizeResult optimize_representation(MatrixCRef Z0, const Membership& pi,
                                       const RateParams& params, const OptimizerConfig& cfg);

enum class Activation { smooth_rectifier };

struct FeatureMapParams {
  std::vector<int> layer_widths;  // [input, hidden..., output]
  std::vector<Matrix> weights;    // weights[l]: widths[l+1] x widths[l]
  std::vector<Vector> biases;     // biases[l]: widths[l+1]
  Activation activation = Activation::smooth_rectifier;

  void validate() const;
  Eigen::Index num_parameters() const;
  Vector flatten() const;
  // Same layout as flatten(); throws on size mismatch.
  void assign(const Vector& flat);
};

// Weights ~ N(0, 1/fan_in), biases zero.
FeatureMapParams init_feature_map(const std::vector<int>& layer_widths, std::uint64_t seed);

// Affine layers with a softplus between them (none after the last), then
// each output column is divided by its norm. Throws DegenerateFeature when a
// pre-projection norm falls below 1e-12.
Matrix feature_map_forward(const FeatureMapParams& params, MatrixCRef X);

struct FeatureMapGradient {
  double objective = 0.0;
  Vector gradient;  // flatten() layout
};

// Objective of f(X, theta) and its exact parameter gradient by backpropagation
// through the sphere projection and every layer.
FeatureMapGradient feature_map_gradient(const FeatureMapParams& params, MatrixCRef X,
                                        const Membership& pi, const RateParams& rate_params,
                                        const OptimizerConfig& cfg);

struct TrainResult {
  FeatureMapParams params;
  OptTrace trace;
};

// Full-batch gradient ascent on the objective of f(X, theta) with the same
// backtracking rule as optimize_representation.
TrainResult train_feature_map(const FeatureMapParams& params, MatrixCRef X, const Membership& pi,
                              const RateParams& rate_params, const OptimizerConfig& cfg);

}  // namespace mcr2::learn

#include "mcr2/errors.hpp"
#include "mcr2/learn.hpp"
#include "mcr2/rates.hpp"
#include "mcr2/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mcr2::learn {
namespace {

constexpr double kMinFeatureNorm = 1e-12;

// softplus(x) = log(1 + e^x), evaluated without overflow.
Matrix softplus(const Matrix& A) {
  return A.unaryExpr([](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); });
}

Matrix sigmoid(const Matrix& A) {
  return A.unaryExpr([](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
}

struct ForwardCache {
  std::vector<Matrix> inputs;       // input to layer l
  std::vector<Matrix> pre_acts;     // W_l h + b_l
  Vector norms;                     // output column norms before projection
  Matrix Z;
};

ForwardCache forward_cached(const FeatureMapParams& p, MatrixCRef X) {
  p.validate();
  validate_features(X, "feature map input");
  if (X.rows() != p.layer_widths.front()) {
    throw DimensionMismatch("input has " + std::to_string(X.rows()) + " rows but the map expects " +
                            std::to_string(p.layer_widths.front()));
  }
  ForwardCache cache;
  Matrix h = X;
  const std::size_t layers = p.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix a = p.weights[l] * h;
    a.colwise() += p.biases[l];
    cache.inputs.push_back(std::move(h));
    h = (l + 1 < layers) ? softplus(a) : a;
    cache.pre_acts.push_back(std::move(a));
  }
  cache.norms = h.colwise().norm().transpose();
  for (Eigen::Index i = 0; i < h.cols(); ++i) {
    if (!(cache.norms(i) >= kMinFeatureNorm)) {
      throw DegenerateFeature("feature column " + std::to_string(i) +
                              " has norm below 1e-12 before sphere projection");
    }
    h.col(i) /= cache.norms(i);
  }
  cache.Z = std::move(h);
  return cache;
}

Vector backward(const FeatureMapParams& p, const ForwardCache& cache, const Matrix& grad_Z) {
  // Through z = u / ||u||: dL/du = (I - z z^T) g / ||u||.
  Matrix g = grad_Z;
  for (Eigen::Index i = 0; i < g.cols(); ++i) {
    const auto z = cache.Z.col(i);
    g.col(i) = (g.col(i) - z.dot(g.col(i)) * z) / cache.norms(i);
  }
  const std::size_t layers = p.weights.size();
  std::vector<Matrix> dW(layers);
  std::vector<Vector> db(layers);
  for (std::size_t l = layers; l-- > 0;) {
    if (l + 1 < layers) g = g.cwiseProduct(sigmoid(cache.pre_acts[l]));
    dW[l] = g * cache.inputs[l].transpose();
    db[l] = g.rowwise().sum();
    if (l > 0) g = p.weights[l].transpose() * g;
  }
  Vector flat(p.num_parameters());
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    flat.segment(offset, dW[l].size()) = dW[l].reshaped();
    offset += dW[l].size();
    flat.segment(offset, db[l].size()) = db[l];
    offset += db[l].size();
  }
  return flat;
}

TraceRecord make_record(int iter, const Matrix& Z, const Membership& pi, const RateParams& params,
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

void FeatureMapParams::validate() const {
  if (layer_widths.size() < 2) throw InvalidInput("feature map needs at least two layer widths");
  for (int w : layer_widths) {
    if (w < 1) throw InvalidInput("feature map layer widths must be positive");
  }
  if (weights.size() != layer_widths.size() - 1 || biases.size() != weights.size()) {
    throw InvalidInput("feature map has inconsistent layer count");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != layer_widths[l + 1] || weights[l].cols() != layer_widths[l] ||
        biases[l].size() != layer_widths[l + 1]) {
      throw InvalidInput("feature map layer " + std::to_string(l) + " has inconsistent shape");
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw InvalidInput("feature map parameters must be finite");
    }
  }
}

Eigen::Index FeatureMapParams::num_parameters() const {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

Vector FeatureMapParams::flatten() const {
  Vector flat(num_parameters());
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.segment(offset, weights[l].size()) = weights[l].reshaped();
    offset += weights[l].size();
    flat.segment(offset, biases[l].size()) = biases[l];
    offset += biases[l].size();
  }
  return flat;
}

void FeatureMapParams::assign(const Vector& flat) {
  if (flat.size() != num_parameters()) throw DimensionMismatch("parameter vector has the wrong length");
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l].reshaped() = flat.segment(offset, weights[l].size());
    offset += weights[l].size();
    biases[l] = flat.segment(offset, biases[l].size());
    offset += biases[l].size();
  }
}

FeatureMapParams init_feature_map(const std::vector<int>& layer_widths, std::uint64_t seed) {
  if (layer_widths.size() < 2) throw InvalidInput("feature map needs at least two layer widths");
  for (int w : layer_widths) {
    if (w < 1) throw InvalidInput("feature map layer widths must be positive");
  }
  synth::Rng rng(seed);
  FeatureMapParams p;
  p.layer_widths = layer_widths;
  for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer_widths[l]));
    p.weights.push_back(scale * rng.gaussian(layer_widths[l + 1], layer_widths[l]));
    p.biases.push_back(Vector::Zero(layer_widths[l + 1]));
  }
  return p;
}

Matrix feature_map_forward(const FeatureMapParams& params, MatrixCRef X) {
  return forward_cached(params, X).Z;
}

FeatureMapGradient feature_map_gradient(const FeatureMapParams& params, MatrixCRef X,
                                        const Membership& pi, const RateParams& rate_params,
                                        const OptimizerConfig& cfg) {
  const ForwardCache cache = forward_cached(params, X);
  FeatureMapGradient out;
  out.objective = objective(cache.Z, pi, rate_params, cfg);
  out.gradient = backward(params, cache, objective_gradient(cache.Z, pi, rate_params, cfg));
  return out;
}

TrainResult train_feature_map(const FeatureMapParams& params, MatrixCRef X, const Membership& pi,
                              const RateParams& rate_params, const OptimizerConfig& cfg) {
  params.validate();
  rate_params.validate();
  cfg.validate();
  if (pi.num_samples() != X.cols()) throw DimensionMismatch("membership/input sample count mismatch");

  TrainResult out;
  out.params = params;
  FeatureMapGradient current = feature_map_gradient(out.params, X, pi, rate_params, cfg);
  if (!current.gradient.allFinite()) throw NumericalError("non-finite parameter gradient");
  out.trace.push_back(make_record(0, feature_map_forward(out.params, X), pi, rate_params, cfg,
                                  current.gradient.norm()));

  double step = cfg.step_size;
  FeatureMapParams candidate = out.params;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const Vector theta = out.params.flatten();
    bool accepted = false;
    double trial = step;
    double candidate_value = current.objective;
    for (int h = 0; h <= OptimizerConfig::kMaxHalvings; ++h, trial *= 0.5) {
      candidate.assign(theta + trial * current.gradient);
      try {
        candidate_value = objective(feature_map_forward(candidate, X), pi, rate_params, cfg);
      } catch (const DegenerateFeature&) {
        continue;
      }
      if (!std::isfinite(candidate_value)) throw NumericalError("objective became non-finite");
      if (candidate_value >= current.objective) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    const double improvement = candidate_value - current.objective;
    out.params = candidate;
    current = feature_map_gradient(out.params, X, pi, rate_params, cfg);
    if (!current.gradient.allFinite()) throw NumericalError("non-finite parameter gradient");
    out.trace.push_back(make_record(iter, feature_map_forward(out.params, X), pi, rate_params, cfg,
                                    current.gradient.norm()));
    step = std::min(2.0 * trial, cfg.step_size);
    if (improvement < cfg.tol) break;
  }
  return out;
}

}  // namespace mcr2::learn

#include "mcr2/synth.hpp"

#include "mcr2/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace mcr2::synth {
namespace {

void normalize_columns(Matrix& X) {
  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    const double n = X.col(i).norm();
    if (n == 0.0) throw NumericalError("generated a zero column; cannot normalize");
    X.col(i) /= n;
  }
}

}  // namespace

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw InvalidInput("Rng::below requires n > 0");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

Matrix Rng::gaussian(Eigen::Index rows, Eigen::Index cols) {
  Matrix out(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = normal();
  }
  return out;
}

void SubspaceMixtureSpec::validate() const {
  if (k < 1 || d < 1) throw InvalidInput("subspace mixture: k and d must be positive");
  if (d_j < 1 || d_j > d) throw InvalidInput("subspace mixture: d_j must lie in [1, d]");
  if (samples_per_class < 1) throw InvalidInput("subspace mixture: samples_per_class must be positive");
  if (orthogonal && static_cast<long>(k) * d_j > d) {
    throw InvalidInput("subspace mixture: orthogonal mode needs k * d_j <= d (got " +
                       std::to_string(k) + " * " + std::to_string(d_j) + " > " + std::to_string(d) + ")");
  }
}

Matrix random_orthonormal(Eigen::Index d, Eigen::Index cols, Rng& rng) {
  const Matrix G = rng.gaussian(d, cols);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(d, cols);
  // Fix column signs so Q does not depend on the QR sign convention.
  const Matrix R = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (R(c, c) < 0.0) Q.col(c) *= -1.0;
  }
  return Q;
}

LabeledData gen_subspace_mixture(const SubspaceMixtureSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Eigen::Index n = spec.samples_per_class;
  LabeledData out;
  out.X.resize(spec.d, static_cast<Eigen::Index>(spec.k) * n);
  out.labels.resize(static_cast<std::size_t>(spec.k * n));

  Matrix shared;
  if (spec.orthogonal) shared = random_orthonormal(spec.d, static_cast<Eigen::Index>(spec.k) * spec.d_j, rng);

  for (int j = 0; j < spec.k; ++j) {
    const Matrix basis = spec.orthogonal ? Matrix(shared.middleCols(static_cast<Eigen::Index>(j) * spec.d_j, spec.d_j))
                                         : random_orthonormal(spec.d, spec.d_j, rng);
    const Matrix coeffs = rng.gaussian(spec.d_j, n);
    out.X.middleCols(j * n, n) = basis * coeffs;
    std::fill_n(out.labels.begin() + j * n, n, j);
  }
  normalize_columns(out.X);
  return out;
}

LabeledData gen_gaussian(int d, int m, int k, std::uint64_t seed) {
  if (d < 1 || m < 1 || k < 1) throw InvalidInput("gen_gaussian: d, m, k must be positive");
  if (m % k != 0) throw InvalidInput("gen_gaussian: m must be divisible by k");
  Rng rng(seed);
  LabeledData out;
  out.X = rng.gaussian(d, m);
  normalize_columns(out.X);
  out.labels.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) out.labels[static_cast<std::size_t>(i)] = i % k;
  return out;
}

Membership membership_from_labels(const LabelVector& labels, int k) {
  return Membership::from_labels(labels, k);
}

LabelVector corrupt_labels(const LabelVector& labels, double ratio, int k, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw InvalidInput("corruption ratio must lie in [0, 1]");
  if (k < 1) throw InvalidInput("class count must be positive");
  for (int y : labels) {
    if (y < 0 || y >= k) throw InvalidInput("label out of range for corruption");
  }
  LabelVector out = labels;
  const auto count = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(labels.size())));
  if (count == 0) return out;
  if (k < 2) throw InvalidInput("cannot corrupt labels with a single class");

  Rng rng(seed);
  std::vector<std::size_t> positions(labels.size());
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `count` entries form a uniform subset.
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(positions[i], positions[i + rng.below(positions.size() - i)]);
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t p = positions[i];
    // Uniform over the k-1 other labels.
    int draw = static_cast<int>(rng.below(static_cast<std::size_t>(k - 1)));
    if (draw >= out[p]) ++draw;
    out[p] = draw;
  }
  return out;
}

LabeledData self_label(MatrixCRef X, int n_augment, double noise_sigma, std::uint64_t seed) {
  validate_features(X, "self_label input");
  if (n_augment < 1) throw InvalidInput("n_augment must be positive");
  if (!(noise_sigma >= 0.0)) throw InvalidInput("noise_sigma must be nonnegative");
  Rng rng(seed);
  const Eigen::Index k = X.cols();
  const Eigen::Index n = n_augment;
  LabeledData out;
  out.X.resize(X.rows(), k * n);
  out.labels.resize(static_cast<std::size_t>(k * n));
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index c = 0; c < n; ++c) {
      Vector v = X.col(j);
      if (noise_sigma > 0.0) v += noise_sigma * rng.gaussian(X.rows(), 1).col(0);
      out.X.col(j * n + c) = v;
      out.labels[static_cast<std::size_t>(j * n + c)] = static_cast<int>(j);
    }
  }
  normalize_columns(out.X);
  return out;
}

LabeledData gen_two_circles(int samples_per_class, double inner_radius, double outer_radius,
                            double noise_sigma, std::uint64_t seed) {
  if (samples_per_class < 1) throw InvalidInput("samples_per_class must be positive");
  if (!(inner_radius > 0.0 && outer_radius > 0.0)) throw InvalidInput("radii must be positive");
  Rng rng(seed);
  const Eigen::Index n = samples_per_class;
  LabeledData out;
  out.X.resize(3, 2 * n);
  out.labels.resize(static_cast<std::size_t>(2 * n));
  const double radii[2] = {inner_radius, outer_radius};
  for (int j = 0; j < 2; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = 2.0 * std::numbers::pi * rng.uniform();
      const Eigen::Index col = j * n + i;
      out.X(0, col) = radii[j] * std::cos(t) + noise_sigma * rng.normal();
      out.X(1, col) = radii[j] * std::sin(t) + noise_sigma * rng.normal();
      out.X(2, col) = 1.0;
      out.labels[static_cast<std::size_t>(col)] = j;
    }
  }
  return out;
}

}  // namespace mcr2::synth

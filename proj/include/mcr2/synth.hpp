#pragma once

// Seeded synthetic data: unions of random subspaces, isotropic Gaussian
// clouds, label corruption and noise-based self-labeling.
//
// Randomness comes from std::mt19937_64 seeded with the caller's 64-bit seed;
// Gaussian draws use std::normal_distribution<double>. Outputs are therefore
// reproducible bit-for-bit within one standard library implementation.

#include "mcr2/types.hpp"

#include <cstdint>
#include <random>

namespace mcr2::synth {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  // Uniform integer in [0, n).
  std::size_t below(std::size_t n);
  Matrix gaussian(Eigen::Index rows, Eigen::Index cols);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

struct SubspaceMixtureSpec {
  int k = 10;
  int d = 512;
  int d_j = 50;
  int samples_per_class = 100;
  bool orthogonal = true;
  // Tags the output as raw input data X rather than features Z; the numbers
  // are identical either way.
  bool ambient_is_input = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LabeledData {
  Matrix X;  // d x m, unit-norm columns
  LabelVector labels;
};

// Orthonormal d x cols block from a QR of a Gaussian matrix.
Matrix random_orthonormal(Eigen::Index d, Eigen::Index cols, Rng& rng);

// Columns sorted by class (samples_per_class per class, class 0 first).
LabeledData gen_subspace_mixture(const SubspaceMixtureSpec& spec);

// i.i.d. standard normal columns normalized to the sphere; labels i mod k.
LabeledData gen_gaussian(int d, int m, int k, std::uint64_t seed);

// Pi with Pi_j(i, i) = 1 iff labels[i] == j.
Membership membership_from_labels(const LabelVector& labels, int k);

// floor(ratio * m) positions, chosen uniformly without replacement, each get a
// uniformly drawn label different from the current one.
LabelVector corrupt_labels(const LabelVector& labels, double ratio, int k, std::uint64_t seed);

// Each input column is copied n_augment times with additive N(0, sigma^2)
// noise and renormalized; copies of column j get label j.
LabeledData self_label(MatrixCRef X, int n_augment, double noise_sigma, std::uint64_t seed);

// Two noisy concentric circles in a plane embedded in R^3 (third coordinate
// fixed at 1). Class 0 lies on the inner circle, class 1 on the outer one.
// Columns are not normalized.
LabeledData gen_two_circles(int samples_per_class, double inner_radius, double outer_radius,
                            double noise_sigma, std::uint64_t seed);

}  // namespace mcr2::synth

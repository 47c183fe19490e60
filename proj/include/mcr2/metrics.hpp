#pragma once

// Nearest-subspace classification, a K-means baseline and the clustering
// scores NMI / ACC / ARI.

#include "mcr2/types.hpp"

#include <cstdint>
#include <vector>

namespace mcr2::metrics {

struct ClassModel {
  Vector mean;            // mu_j
  Matrix basis;           // d x r_j, orthonormal columns
  int r_j = 0;
  bool rank_truncated = false;  // requested more components than the class supports
};

// Per class: column mean and the top-r_j left singular vectors of the centered
// class matrix. r_j is capped at the effective rank (singular values above
// 1e-6 * sigma_max); the cap sets rank_truncated.
std::vector<ClassModel> fit_class_models(MatrixCRef Z, const LabelVector& labels, int r_j, int k);

// Squared residual ||(I - U U^T)(z - mu)||^2.
double subspace_residual(const ClassModel& model, const Eigen::Ref<const Vector>& z);

// argmin_j of the residual; ties go to the lowest class index.
int nearest_subspace_predict(const std::vector<ClassModel>& models, const Eigen::Ref<const Vector>& z);
LabelVector nearest_subspace_predict_all(const std::vector<ClassModel>& models, MatrixCRef Z);

double accuracy(const LabelVector& truth, const LabelVector& predicted);

struct KMeansResult {
  LabelVector labels;
  double wcss = 0.0;          // within-cluster sum of squares of the returned run
  double initial_wcss = 0.0;  // of the same run's seeding
  int best_restart = 0;
};

// Lloyd iterations from `restarts` seeded data-point initializations; the run
// with the lowest WCSS wins (earliest restart on ties). A cluster that empties
// is re-seeded with the point farthest from its current centroid.
KMeansResult kmeans(MatrixCRef X, int k, std::uint64_t seed, int max_iters = 300, int restarts = 10);

// Minimum-cost perfect matching on a square matrix: result[row] = column.
// Among optimal matchings the lexicographically smallest is returned.
std::vector<int> optimal_assignment(MatrixCRef cost);

double nmi(const LabelVector& y, const LabelVector& c);

struct AccResult {
  double acc = 0.0;
  std::vector<int> assignment;  // cluster id -> label
};

// Labels of both vectors must lie in [0, k).
AccResult acc(const LabelVector& y, const LabelVector& c, int k);

double ari(const LabelVector& y, const LabelVector& c);

struct MetricReport {
  double nmi = 0.0;
  double acc = 0.0;
  double ari = 0.0;
  std::vector<int> assignment;
};

MetricReport evaluate_clustering(const LabelVector& y, const LabelVector& c);

}  // namespace mcr2::metrics

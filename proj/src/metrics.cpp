#include "mcr2/metrics.hpp"

#include "mcr2/errors.hpp"
#include "mcr2/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mcr2::metrics {
namespace {

constexpr double kRankThreshold = 1e-6;

void require_same_length(const LabelVector& y, const LabelVector& c) {
  if (y.size() != c.size()) {
    throw DimensionMismatch("label vectors differ in length (" + std::to_string(y.size()) + " vs " +
                            std::to_string(c.size()) + ")");
  }
  if (y.empty()) throw InvalidInput("label vectors are empty");
}

int label_count(const LabelVector& labels) {
  int k = 0;
  for (int v : labels) {
    if (v < 0) throw InvalidInput("labels must be nonnegative");
    k = std::max(k, v + 1);
  }
  return k;
}

Matrix contingency(const LabelVector& y, const LabelVector& c, int ky, int kc) {
  Matrix counts = Matrix::Zero(ky, kc);
  for (std::size_t i = 0; i < y.size(); ++i) counts(y[i], c[i]) += 1.0;
  return counts;
}

// Same partition up to a bijective relabeling.
bool same_partition(const LabelVector& y, const LabelVector& c) {
  const Matrix t = contingency(y, c, label_count(y), label_count(c));
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    if ((t.row(r).array() > 0.0).count() > 1) return false;
  }
  for (Eigen::Index col = 0; col < t.cols(); ++col) {
    if ((t.col(col).array() > 0.0).count() > 1) return false;
  }
  return true;
}

// Hungarian method with potentials, O(n^3). Returns row -> column.
std::vector<int> hungarian(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

double assignment_cost(const Matrix& cost, const std::vector<int>& perm) {
  double total = 0.0;
  for (std::size_t r = 0; r < perm.size(); ++r) total += cost(static_cast<Eigen::Index>(r), perm[r]);
  return total;
}

}  // namespace

std::vector<ClassModel> fit_class_models(MatrixCRef Z, const LabelVector& labels, int r_j, int k) {
  validate_features(Z);
  if (static_cast<Eigen::Index>(labels.size()) != Z.cols()) throw DimensionMismatch("labels/features length mismatch");
  if (r_j < 1) throw InvalidInput("r_j must be positive");
  if (k < 1) throw InvalidInput("class count must be positive");
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) throw InvalidInput("label out of range");
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<Eigen::Index>(i));
  }
  std::vector<ClassModel> models;
  for (int j = 0; j < k; ++j) {
    const auto& idx = members[static_cast<std::size_t>(j)];
    if (idx.empty()) throw InvalidInput("class " + std::to_string(j) + " has no samples");
    Matrix block(Z.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) block.col(static_cast<Eigen::Index>(c)) = Z.col(idx[c]);
    ClassModel model;
    model.mean = block.rowwise().mean();
    block.colwise() -= model.mean;
    Eigen::BDCSVD<Matrix> svd(block, Eigen::ComputeThinU);
    const Vector& sigma = svd.singularValues();
    int effective = 0;
    if (sigma.size() > 0 && sigma(0) > 0.0) {
      for (Eigen::Index p = 0; p < sigma.size(); ++p) {
        if (sigma(p) > kRankThreshold * sigma(0)) ++effective;
      }
    }
    model.r_j = std::min(r_j, effective);
    model.rank_truncated = model.r_j < r_j;
    model.basis = svd.matrixU().leftCols(model.r_j);
    models.push_back(std::move(model));
  }
  return models;
}

double subspace_residual(const ClassModel& model, const Eigen::Ref<const Vector>& z) {
  const Vector v = z - model.mean;
  if (model.basis.cols() == 0) return v.squaredNorm();
  return (v - model.basis * (model.basis.transpose() * v)).squaredNorm();
}

int nearest_subspace_predict(const std::vector<ClassModel>& models, const Eigen::Ref<const Vector>& z) {
  if (models.empty()) throw InvalidInput("no class models");
  if (!z.allFinite()) throw InvalidInput("query point contains non-finite entries");
  int best = 0;
  double best_residual = subspace_residual(models[0], z);
  for (std::size_t j = 1; j < models.size(); ++j) {
    const double r = subspace_residual(models[j], z);
    if (r < best_residual) {
      best_residual = r;
      best = static_cast<int>(j);
    }
  }
  return best;
}

LabelVector nearest_subspace_predict_all(const std::vector<ClassModel>& models, MatrixCRef Z) {
  LabelVector out(static_cast<std::size_t>(Z.cols()));
  for (Eigen::Index i = 0; i < Z.cols(); ++i) {
    out[static_cast<std::size_t>(i)] = nearest_subspace_predict(models, Z.col(i));
  }
  return out;
}

double accuracy(const LabelVector& truth, const LabelVector& predicted) {
  require_same_length(truth, predicted);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

KMeansResult kmeans(MatrixCRef X, int k, std::uint64_t seed, int max_iters, int restarts) {
  validate_features(X, "k-means input");
  const Eigen::Index m = X.cols();
  if (k < 1 || k > m) throw InvalidInput("k-means needs 1 <= k <= m");
  if (restarts < 1 || max_iters < 0) throw InvalidInput("k-means needs restarts >= 1 and max_iters >= 0");

  synth::Rng rng(seed);
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();

  for (int run = 0; run < restarts; ++run) {
    // k distinct seeding points via partial Fisher-Yates.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (int i = 0; i < k; ++i) {
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(i) + rng.below(static_cast<std::size_t>(m - i))]);
    }
    Matrix centers(X.rows(), k);
    for (int i = 0; i < k; ++i) centers.col(i) = X.col(order[static_cast<std::size_t>(i)]);

    LabelVector labels(static_cast<std::size_t>(m), -1);
    Vector dist(m);
    auto assign = [&]() {
      bool changed = false;
      for (Eigen::Index i = 0; i < m; ++i) {
        int arg = 0;
        double bestd = (X.col(i) - centers.col(0)).squaredNorm();
        for (int c = 1; c < k; ++c) {
          const double dd = (X.col(i) - centers.col(c)).squaredNorm();
          if (dd < bestd) {
            bestd = dd;
            arg = c;
          }
        }
        dist(i) = bestd;
        if (labels[static_cast<std::size_t>(i)] != arg) changed = true;
        labels[static_cast<std::size_t>(i)] = arg;
      }
      return changed;
    };

    assign();
    const double initial = dist.sum();
    for (int it = 0; it < max_iters; ++it) {
      Matrix sums = Matrix::Zero(X.rows(), k);
      std::vector<int> counts(static_cast<std::size_t>(k), 0);
      for (Eigen::Index i = 0; i < m; ++i) {
        sums.col(labels[static_cast<std::size_t>(i)]) += X.col(i);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
          centers.col(c) = sums.col(c) / counts[static_cast<std::size_t>(c)];
          continue;
        }
        Eigen::Index far = 0;
        dist.maxCoeff(&far);
        centers.col(c) = X.col(far);
        dist(far) = 0.0;
      }
      if (!assign()) break;
    }
    const double wcss = dist.sum();
    if (wcss < best.wcss) {
      best.labels = labels;
      best.wcss = wcss;
      best.initial_wcss = initial;
      best.best_restart = run;
    }
  }
  return best;
}

std::vector<int> optimal_assignment(MatrixCRef cost) {
  if (cost.rows() != cost.cols()) throw InvalidInput("optimal_assignment expects a square matrix");
  if (!cost.allFinite()) throw InvalidInput("optimal_assignment expects finite costs");
  const int n = static_cast<int>(cost.rows());
  if (n == 0) return {};
  const Matrix C = cost;
  const std::vector<int> first = hungarian(C);
  const double optimum = assignment_cost(C, first);
  const double tol = 1e-9 * std::max(1.0, std::abs(optimum));

  // Fix rows in order to the smallest column that still admits an optimum.
  std::vector<int> result(static_cast<std::size_t>(n), -1);
  std::vector<char> col_used(static_cast<std::size_t>(n), 0);
  double fixed = 0.0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (col_used[static_cast<std::size_t>(c)]) continue;
      const int rest = n - r - 1;
      double tail = 0.0;
      if (rest > 0) {
        Matrix sub(rest, rest);
        std::vector<int> cols;
        for (int cc = 0; cc < n; ++cc) {
          if (!col_used[static_cast<std::size_t>(cc)] && cc != c) cols.push_back(cc);
        }
        for (int rr = 0; rr < rest; ++rr) {
          for (int cc = 0; cc < rest; ++cc) sub(rr, cc) = C(r + 1 + rr, cols[static_cast<std::size_t>(cc)]);
        }
        tail = assignment_cost(sub, hungarian(sub));
      }
      if (fixed + C(r, c) + tail <= optimum + tol) {
        result[static_cast<std::size_t>(r)] = c;
        col_used[static_cast<std::size_t>(c)] = 1;
        fixed += C(r, c);
        break;
      }
    }
  }
  return result;
}

double nmi(const LabelVector& y, const LabelVector& c) {
  require_same_length(y, c);
  const int ky = label_count(y);
  const int kc = label_count(c);
  const Matrix t = contingency(y, c, ky, kc);
  const double m = static_cast<double>(y.size());
  const Vector a = t.rowwise().sum();
  const Vector b = t.colwise().sum().transpose();

  double hy = 0.0;
  double hc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) > 0.0) hy += a(i) * std::log(a(i) / m);
  }
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    if (b(j) > 0.0) hc += b(j) * std::log(b(j) / m);
  }
  // Zero entropy on either side: the ratio is undefined.
  if (hy == 0.0 || hc == 0.0) return same_partition(y, c) ? 1.0 : 0.0;

  double mutual = 0.0;
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      if (t(i, j) > 0.0) mutual += t(i, j) * std::log(m * t(i, j) / (a(i) * b(j)));
    }
  }
  return std::clamp(mutual / std::sqrt(hy * hc), 0.0, 1.0);
}

AccResult acc(const LabelVector& y, const LabelVector& c, int k) {
  require_same_length(y, c);
  if (k < 1) throw InvalidInput("class count must be positive");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] >= k || c[i] < 0 || c[i] >= k) throw InvalidInput("labels must lie in [0, k)");
  }
  // counts(cluster, label)
  const Matrix counts = contingency(c, y, k, k);
  AccResult out;
  out.assignment = optimal_assignment(-counts);
  double hits = 0.0;
  for (int cl = 0; cl < k; ++cl) hits += counts(cl, out.assignment[static_cast<std::size_t>(cl)]);
  out.acc = hits / static_cast<double>(y.size());
  return out;
}

double ari(const LabelVector& y, const LabelVector& c) {
  require_same_length(y, c);
  if (y.size() < 2) throw InvalidInput("ARI needs at least two samples");
  const Matrix t = contingency(y, c, label_count(y), label_count(c));
  auto choose2 = [](double n) { return n * (n - 1.0) / 2.0; };
  double sum_ij = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) sum_ij += choose2(t.data()[i]);
  double sum_a = 0.0;
  double sum_b = 0.0;
  const Vector a = t.rowwise().sum();
  const Vector b = t.colwise().sum().transpose();
  for (Eigen::Index i = 0; i < a.size(); ++i) sum_a += choose2(a(i));
  for (Eigen::Index j = 0; j < b.size(); ++j) sum_b += choose2(b(j));
  const double expected = sum_a * sum_b / choose2(static_cast<double>(y.size()));
  const double denom = 0.5 * (sum_a + sum_b) - expected;
  // Both partitions trivial (all singletons or one block): the index is 0/0.
  if (denom == 0.0) return same_partition(y, c) ? 1.0 : 0.0;
  return (sum_ij - expected) / denom;
}

MetricReport evaluate_clustering(const LabelVector& y, const LabelVector& c) {
  require_same_length(y, c);
  const int k = std::max(label_count(y), label_count(c));
  MetricReport out;
  out.nmi = nmi(y, c);
  auto a = acc(y, c, k);
  out.acc = a.acc;
  out.assignment = std::move(a.assignment);
  out.ari = y.size() >= 2 ? ari(y, c) : 1.0;
  return out;
}

}  // namespace mcr2::metrics

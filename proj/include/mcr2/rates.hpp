#pragma once

// Coding rates of a feature matrix under lossy (eps) coding, the rate
// reduction between the whole set and its class-wise segmentation, and their
// analytic gradients with respect to the features.
//
// All functions are pure. Rates are reported in the unit selected by
// RateParams::log_base; logdet_identity_plus_gram always works in nats.

#include "mcr2/types.hpp"

#include <vector>

namespace mcr2 {

// log det(I + alpha * Z Z^T) in nats, evaluated on the min(d, m) side.
// Uses singular values of Z when min(d, m) <= 64, otherwise a Cholesky
// factorization of the smaller Gram matrix (one 1e-12 jitter retry).
double logdet_identity_plus_gram(MatrixCRef Z, double alpha);

// Same quantity forced through a specific route; exposed for cross-checks.
enum class GramSide { features, samples };
double logdet_identity_plus_gram_via(MatrixCRef Z, double alpha, GramSide side);

// R(Z, eps) = 1/2 log det(I + d/(m eps^2) Z Z^T).
double coding_rate(MatrixCRef Z, const RateParams& params);

// L(Z, eps) = (m + d) * R(Z, eps).
double coding_length(MatrixCRef Z, const RateParams& params);

struct SegmentedRate {
  double total = 0.0;
  std::vector<double> per_class;
};

// Rc(Z, eps | Pi) = sum_j tr(Pi_j)/(2m) log det(I + d/(tr(Pi_j) eps^2) Z Pi_j Z^T).
// Empty classes contribute exactly zero.
SegmentedRate segmented_rate(MatrixCRef Z, const Membership& pi, const RateParams& params);

struct RateReport {
  double rate_whole = 0.0;
  double rate_segmented = 0.0;
  double reduction = 0.0;
  std::vector<double> per_class_rates;
  RateParams params;
  Eigen::Index d = 0;
  Eigen::Index m = 0;
};

RateReport rate_reduction(MatrixCRef Z, const Membership& pi, const RateParams& params);

// 1/(2 gamma1) log det(I + gamma2 d/(m eps^2) Z Z^T). Reduces to coding_rate
// bit-for-bit when gamma1 = gamma2 = 1.
double scaled_rate(MatrixCRef Z, const RateParams& params, double gamma1, double gamma2);

// Rate reduction of two sample sets treated as two classes.
double pair_distance(MatrixCRef Zi, MatrixCRef Zj, const RateParams& params);

Matrix grad_coding_rate(MatrixCRef Z, const RateParams& params);
Matrix grad_scaled_rate(MatrixCRef Z, const RateParams& params, double gamma1, double gamma2);
Matrix grad_segmented_rate(MatrixCRef Z, const Membership& pi, const RateParams& params);
Matrix grad_rate_reduction(MatrixCRef Z, const Membership& pi, const RateParams& params);

}  // namespace mcr2

#pragma once

// Residual checks for the structural properties of the rate functions: the
// two-sided bound on the rate of a concatenation, the upper bound on the rate
// reduction, concavity in the membership, and the scalar singular-value
// program whose solution describes the optimal per-class spectra.

#include "mcr2/types.hpp"

#include <vector>

namespace mcr2::theory {

inline constexpr double kResidualTolerance = 1e-9;
inline constexpr double kEqualityTolerance = 1e-6;
inline constexpr double kRankThreshold = 1e-6;

struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  bool equality_expected = false;
  double tolerance = kResidualTolerance;

  bool holds() const { return slack >= -tolerance; }
};

struct RateBounds {
  BoundReport lower;
  BoundReport upper;
};

// Both sides of
//   sum_j m_j/2 logdet(I + d/(m_j e2) Z_j Z_j^T) <= m/2 logdet(I + d/(m e2) Z Z^T)
//                                               <= sum_j m/2 logdet(I + d/(m e2) Z_j Z_j^T)
// evaluated on the concatenation of `parts`. The lower bound is tight iff the
// scaled covariances Z_j Z_j^T / m_j coincide; the upper iff the parts are
// mutually orthogonal.
RateBounds check_rate_bounds(const std::vector<Matrix>& parts, const RateParams& params);

// Rate reduction against the per-class upper bound that becomes tight when
// classes occupy orthogonal subspaces. Requires a hard membership.
BoundReport check_reduction_upper_bound(MatrixCRef Z, const Membership& pi,
                                        const RateParams& params);

// Concavity of the segmented rate along the segment between two memberships:
// slack = Rc(mix) - [(1 - a) Rc(pi_a) + a Rc(pi_b)].
BoundReport check_concavity_in_pi(MatrixCRef Z, const Membership& pi_a, const Membership& pi_b,
                                  double alpha, const RateParams& params);

// Strict concavity of log det on SPD matrices:
// slack = logdet((1-a)A + aB) - [(1-a) logdet A + a logdet B] (nats).
BoundReport check_logdet_concavity(MatrixCRef A, MatrixCRef B, double alpha);

// max sum_p f(x_p) s.t. sum_p x_p = c, x >= 0, with
//   f(x) = m log(1 + d x/(m e2)) - c log(1 + d x/(c e2)),
// i.e. the per-class rate-reduction budget as a function of squared singular
// values. `rank` is the class rank budget and `mass` the class size.
struct ScalarProgram {
  int rank = 1;
  double mass = 1.0;
  int d = 1;
  int m = 1;
  double eps_sq = 1.0;

  void validate() const;
  // f(x) above, in nats.
  double gain(double x) const;
  // Contribution of a full profile to the rate reduction: sum_p f(x_p) / (2m), nats.
  double objective(const std::vector<double>& x) const;
  // eps^4 < (mass/m) (d/rank)^2.
  bool diversity_condition() const;
};

enum class ProfileFamily { equal_split, one_low };

struct SingularValueSolution {
  std::vector<double> sigmas;  // descending, sqrt of the optimal x
  double objective = 0.0;      // ScalarProgram::objective of the optimum (nats)
  ProfileFamily family = ProfileFamily::equal_split;
  int support = 0;             // number of nonzero entries
};

// For each support size s = 1..r, searches the equal split [c/s, ..., c/s] and
// the family [x_H, ..., x_H, x_L] with (s-1) x_H + x_L = c, x_H in
// (c/s, c/(s-1)), padding with zeros up to length r. Nonzero entries of any
// KKT point take at most two values with a single low one, so the global
// optimum lies in this set. Zero entries can be optimal even when the
// diversity condition holds, hence the scan over s. x_H is located by a dense
// scan followed by golden-section refinement to a bracket width of 1e-10.
// Among near-ties the largest support wins.
SingularValueSolution optimal_singular_values(const ScalarProgram& prog);

struct OptimalityDiagnostics {
  double max_interclass_cosine = 0.0;
  std::vector<Vector> per_class_singular_values;
  std::vector<int> per_class_rank;
  bool diversity_condition_satisfied = false;
};

// Requires a hard membership. Class rank budgets are taken as min(d, m_j).
OptimalityDiagnostics diagnose_optimum(MatrixCRef Z, const Membership& pi,
                                       const RateParams& params);

// Optimal rate reduction implied by the per-class scalar programs (in the
// unit of params), for features with ||Z_j||_F^2 = m_j. Assumes the classes can
// sit in mutually orthogonal subspaces with rank budget min(d, m_j).
double optimal_rate_reduction(const Membership& pi, Eigen::Index d, const RateParams& params);

}  // namespace mcr2::theory

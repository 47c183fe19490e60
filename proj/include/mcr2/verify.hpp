#pragma once

// Seeded property sweeps behind the `verify` command. Each property reports
// its worst observed value against a fixed threshold and, on failure, a
// witness describing the offending instance.

#include "mcr2/rates.hpp"
#include "mcr2/synth.hpp"
#include "mcr2/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace mcr2::verify {

enum class Suite { lemmas, theorem, gradients, metrics, all };

Suite parse_suite(std::string_view text);
std::string_view to_string(Suite suite);

// The rate-reduction evaluator under test; swappable so the sweeps can be
// checked against deliberately broken implementations.
struct RateBackend {
  std::function<RateReport(MatrixCRef, const Membership&, const RateParams&)> rate_reduction =
      [](MatrixCRef Z, const Membership& pi, const RateParams& p) { return mcr2::rate_reduction(Z, pi, p); };
};

struct PropertyResult {
  std::string name;
  int trials = 0;
  double worst = 0.0;
  double threshold = 0.0;
  // "<=": passes when worst <= threshold; ">=": when worst >= threshold.
  std::string relation = "<=";
  bool passed = true;
  std::string witness;
};

struct SuiteReport {
  Suite suite = Suite::all;
  int trials = 0;
  std::uint64_t seed = 0;
  bool passed = true;
  std::vector<PropertyResult> properties;
};

// Throws InvalidInput when trials < 1.
SuiteReport run_suite(Suite suite, int trials, std::uint64_t seed, const RateBackend& backend = {});

// Random instances shared with the tests.
Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, synth::Rng& rng);
Matrix random_orthogonal(Eigen::Index n, synth::Rng& rng);
Membership random_membership(Eigen::Index m, int k, bool soft, synth::Rng& rng);
// Hard membership with every class nonempty (requires m >= k).
Membership random_hard_membership(Eigen::Index m, int k, synth::Rng& rng);

}  // namespace mcr2::verify

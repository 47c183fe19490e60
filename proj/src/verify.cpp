#include "mcr2/verify.hpp"

#include "mcr2/errors.hpp"
#include "mcr2/learn.hpp"
#include "mcr2/metrics.hpp"
#include "mcr2/theory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace mcr2::verify {
namespace {

int uniform_int(synth::Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::size_t>(hi - lo + 1)));
}

double uniform_real(synth::Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

RateParams random_params(synth::Rng& rng) {
  RateParams p;
  p.eps_sq = uniform_real(rng, 0.1, 2.0);
  p.log_base = rng.uniform() < 0.5 ? LogBase::bits : LogBase::nats;
  return p;
}

class Tracker {
 public:
  Tracker(std::string name, double threshold, std::string relation) {
    r_.name = std::move(name);
    r_.threshold = threshold;
    r_.relation = std::move(relation);
    r_.worst = r_.relation == "<=" ? -std::numeric_limits<double>::infinity()
                                   : std::numeric_limits<double>::infinity();
  }

  void observe(double value, const std::string& witness) {
    ++r_.trials;
    const bool worse = r_.relation == "<=" ? value > r_.worst : value < r_.worst;
    const bool bad = r_.relation == "<=" ? !(value <= r_.threshold) : !(value >= r_.threshold);
    if (worse || std::isnan(value)) r_.worst = value;
    if (bad && r_.passed) {
      r_.passed = false;
      r_.witness = witness;
    }
  }

  PropertyResult result() const { return r_; }

 private:
  PropertyResult r_;
};

std::string describe(std::uint64_t seed, int trial, const std::string& extra = {}) {
  std::ostringstream os;
  os << "seed=" << seed << " trial=" << trial;
  if (!extra.empty()) os << ' ' << extra;
  return os.str();
}

double max_relative_error(const Matrix& analytic, const Matrix& numeric) {
  const double scale = std::max(numeric.cwiseAbs().maxCoeff(), 1e-8);
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

template <class F>
Matrix central_differences(const Matrix& Z, F&& f, double h) {
  Matrix g(Z.rows(), Z.cols());
  Matrix probe = Z;
  for (Eigen::Index i = 0; i < Z.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + h;
    const double up = f(probe);
    probe.data()[i] = orig - h;
    const double down = f(probe);
    probe.data()[i] = orig;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

void lemma_suite(int trials, std::uint64_t seed, const RateBackend& backend, SuiteReport& report) {
  synth::Rng rng(seed);
  Tracker commute("commutativity_residual", 1e-8, "<=");
  Tracker invariance("orthogonal_invariance_residual", 1e-8, "<=");
  Tracker nonneg("reduction_nonnegative", -1e-9, ">=");
  Tracker lower("rate_bounds_lower_slack", -1e-9, ">=");
  Tracker upper("rate_bounds_upper_slack", -1e-9, ">=");
  Tracker red_upper("reduction_upper_bound_slack", -1e-9, ">=");
  Tracker logdet("logdet_strict_concavity_margin", 0.0, ">=");
  Tracker concave("concavity_in_membership_slack", -1e-9, ">=");
  Tracker monotone("scale_monotonicity_worst_drop", -1e-9, ">=");

  for (int t = 0; t < trials; ++t) {
    const int d = uniform_int(rng, 1, 32);
    const int m = uniform_int(rng, 2, 64);
    const int k = uniform_int(rng, 1, std::min(m, 6));
    const RateParams params = random_params(rng);
    const Matrix Z = random_matrix(d, m, rng);
    const double alpha = d / (m * params.eps_sq);

    const double a = logdet_identity_plus_gram_via(Z, alpha, GramSide::features);
    const double b = logdet_identity_plus_gram_via(Z, alpha, GramSide::samples);
    commute.observe(std::abs(a - b) / (1.0 + std::abs(a)), describe(seed, t));

    const Matrix U = random_orthogonal(d, rng);
    const Matrix V = random_orthogonal(m, rng);
    const double r0 = coding_rate(Z, params);
    invariance.observe(std::abs(coding_rate(U * Z * V.transpose(), params) - r0) / (1.0 + std::abs(r0)),
                       describe(seed, t));

    const bool soft = rng.uniform() < 0.5;
    const Membership pi = random_membership(m, k, soft, rng);
    const RateReport rep = backend.rate_reduction(Z, pi, params);
    std::ostringstream w;
    w << "d=" << d << " m=" << m << " k=" << k << " soft=" << soft << " reduction=" << rep.reduction;
    nonneg.observe(rep.reduction, describe(seed, t, w.str()));

    // Two to four parts sharing d.
    const int parts_n = uniform_int(rng, 2, 4);
    std::vector<Matrix> parts;
    for (int p = 0; p < parts_n; ++p) parts.push_back(random_matrix(d, uniform_int(rng, 1, 16), rng));
    const auto bounds = theory::check_rate_bounds(parts, params);
    lower.observe(bounds.lower.slack, describe(seed, t));
    upper.observe(bounds.upper.slack, describe(seed, t));

    if (m >= k) {
      const Membership hard = random_hard_membership(m, k, rng);
      red_upper.observe(theory::check_reduction_upper_bound(Z, hard, params).slack, describe(seed, t));
    }

    const int n = uniform_int(rng, 1, 8);
    const Matrix Ga = random_matrix(n, n + 2, rng);
    const Matrix Gb = random_matrix(n, n + 2, rng);
    const Matrix A = Ga * Ga.transpose() + 0.1 * Matrix::Identity(n, n);
    const Matrix B = Gb * Gb.transpose() + 0.1 * Matrix::Identity(n, n);
    const double mix = uniform_real(rng, 0.05, 0.95);
    const auto lc = theory::check_logdet_concavity(A, B, mix);
    logdet.observe(lc.slack > 0.0 ? lc.slack : -1.0, describe(seed, t));

    const Membership pa = random_membership(m, k, true, rng);
    const Membership pb = random_membership(m, k, true, rng);
    concave.observe(theory::check_concavity_in_pi(Z, pa, pb, uniform_real(rng, 0.01, 0.99), params).slack,
                    describe(seed, t));

    const int km = std::max(2, std::min(k, m));
    const Membership multi = random_hard_membership(m, km, rng);
    double prev = -std::numeric_limits<double>::infinity();
    double worst_drop = 0.0;
    for (int c = 1; c <= 100; ++c) {
      const double value = rate_reduction(0.1 * c * Z, multi, params).reduction;
      if (std::isfinite(prev)) worst_drop = std::min(worst_drop, value - prev);
      prev = value;
    }
    monotone.observe(worst_drop, describe(seed, t));
  }
  for (const auto* tr : {&commute, &invariance, &nonneg, &lower, &upper, &red_upper, &logdet, &concave, &monotone}) {
    report.properties.push_back(tr->result());
  }
}

theory::ScalarProgram random_program(synth::Rng& rng, int r) {
  theory::ScalarProgram prog;
  prog.rank = r;
  prog.d = uniform_int(rng, std::max(r, 4), 64);
  prog.m = uniform_int(rng, 8, 200);
  prog.mass = uniform_real(rng, 1.0, 0.5 * prog.m);
  prog.eps_sq = uniform_real(rng, 0.05, 2.0);
  return prog;
}

std::string program_text(const theory::ScalarProgram& prog) {
  std::ostringstream os;
  os << std::setprecision(17) << "r=" << prog.rank << " c=" << prog.mass << " d=" << prog.d << " m=" << prog.m
     << " eps_sq=" << prog.eps_sq;
  return os.str();
}

// Best objective over the simplex grid {x : x_p = c * i_p * step}.
double grid_max(const theory::ScalarProgram& prog, int steps) {
  std::vector<double> f(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) f[static_cast<std::size_t>(i)] = prog.gain(prog.mass * i / steps);
  double best = -std::numeric_limits<double>::infinity();
  if (prog.rank == 1) {
    best = f.back();
  } else if (prog.rank == 2) {
    for (int i = 0; i <= steps; ++i) best = std::max(best, f[static_cast<std::size_t>(i)] + f[static_cast<std::size_t>(steps - i)]);
  } else if (prog.rank == 3) {
    // x1 >= x2 >= x3 covers every point up to permutation.
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; j <= std::min(i, steps - i); ++j) {
        const int l = steps - i - j;
        if (l > j) continue;
        best = std::max(best, f[static_cast<std::size_t>(i)] + f[static_cast<std::size_t>(j)] + f[static_cast<std::size_t>(l)]);
      }
    }
  } else {
    throw InvalidInput("grid oracle supports rank <= 3");
  }
  return best / (2.0 * prog.m);
}

void theorem_suite(int trials, std::uint64_t seed, SuiteReport& report) {
  synth::Rng rng(seed);
  Tracker random_pts("solver_minus_best_random_point", -1e-12, ">=");
  Tracker below("solver_minus_grid_max", -1e-12, ">=");
  Tracker above("solver_grid_excess", 1e-6, "<=");
  Tracker equal("diversity_condition_gives_equal_split", 1.0, ">=");
  Tracker cosine("emergence_max_interclass_cosine", 1e-2, "<=");
  Tracker spectra("emergence_spectrum_relative_error", 1e-2, "<=");
  Tracker objective_gap("emergence_objective_relative_gap", 5e-3, "<=");

  for (int t = 0; t < trials; ++t) {
    const auto prog = random_program(rng, uniform_int(rng, 1, 4));
    const auto sol = theory::optimal_singular_values(prog);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> x(static_cast<std::size_t>(prog.rank));
    for (int s = 0; s < 10000; ++s) {
      double total = 0.0;
      for (auto& v : x) {
        v = -std::log(1.0 - rng.uniform());
        total += v;
      }
      for (auto& v : x) v *= prog.mass / total;
      best = std::max(best, prog.objective(x));
    }
    random_pts.observe(sol.objective - best, describe(seed, t, program_text(prog)));
    if (prog.diversity_condition()) {
      equal.observe(sol.family == theory::ProfileFamily::equal_split ? 1.0 : 0.0,
                    describe(seed, t, program_text(prog)));
    }

    const auto small = random_program(rng, uniform_int(rng, 2, 3));
    const double gm = grid_max(small, 10000);
    const double obj = theory::optimal_singular_values(small).objective;
    below.observe(obj - gm, describe(seed, t));
    above.observe(obj - gm, describe(seed, t));
  }

  // Free-feature ascent on d = 16, two classes of four samples, eps^2 = 0.5.
  const int runs = std::min(trials, 3);
  for (int t = 0; t < runs; ++t) {
    const RateParams params{0.5, LogBase::nats};
    LabelVector labels{0, 0, 0, 0, 1, 1, 1, 1};
    const Membership pi = Membership::from_labels(labels, 2);
    learn::OptimizerConfig cfg;
    cfg.step_size = 1.0;
    cfg.tol = 1e-13;
    cfg.max_iters = 20000;
    const auto res = learn::optimize_representation(random_matrix(16, 8, rng), pi, params, cfg);
    const auto diag = theory::diagnose_optimum(res.Z, pi, params);
    cosine.observe(diag.max_interclass_cosine, describe(seed, t));
    double err = 0.0;
    for (int j = 0; j < 2; ++j) {
      theory::ScalarProgram prog{4, 4.0, 16, 8, 0.5};
      const auto opt = theory::optimal_singular_values(prog);
      const Vector& s = diag.per_class_singular_values[static_cast<std::size_t>(j)];
      for (int p = 0; p < 4; ++p) err = std::max(err, std::abs(s(p) - opt.sigmas[static_cast<std::size_t>(p)]) / opt.sigmas[static_cast<std::size_t>(p)]);
    }
    spectra.observe(err, describe(seed, t));
    const double target = theory::optimal_rate_reduction(pi, 16, params);
    const double achieved = rate_reduction(res.Z, pi, params).reduction;
    objective_gap.observe(std::abs(target - achieved) / std::abs(target), describe(seed, t));
  }
  for (const auto* tr : {&random_pts, &below, &above, &equal, &cosine, &spectra, &objective_gap}) {
    report.properties.push_back(tr->result());
  }
}

void gradient_suite(int trials, std::uint64_t seed, SuiteReport& report) {
  synth::Rng rng(seed);
  constexpr double h = 1e-5;
  Tracker whole("grad_coding_rate_rel_error", 1e-5, "<=");
  Tracker seg("grad_segmented_rate_rel_error", 1e-5, "<=");
  Tracker red("grad_rate_reduction_rel_error", 1e-5, "<=");
  Tracker net("feature_map_param_grad_rel_error", 1e-4, "<=");

  for (int t = 0; t < trials; ++t) {
    const int d = uniform_int(rng, 2, 12);
    const int m = uniform_int(rng, 2, 12);
    const int k = uniform_int(rng, 1, std::min(m, 4));
    const RateParams params = random_params(rng);
    const Matrix Z = random_matrix(d, m, rng);
    const Membership soft = random_membership(m, k, true, rng);
    const Membership hard = random_hard_membership(m, k, rng);

    whole.observe(max_relative_error(grad_coding_rate(Z, params),
                                     central_differences(Z, [&](const Matrix& Y) { return coding_rate(Y, params); }, h)),
                  describe(seed, t));
    seg.observe(max_relative_error(grad_segmented_rate(Z, soft, params),
                                   central_differences(Z, [&](const Matrix& Y) { return segmented_rate(Y, soft, params).total; }, h)),
                describe(seed, t));
    red.observe(max_relative_error(grad_rate_reduction(Z, hard, params),
                                   central_differences(Z, [&](const Matrix& Y) { return rate_reduction(Y, hard, params).reduction; }, h)),
                describe(seed, t));
  }

  const int net_trials = std::min(trials, 10);
  for (int t = 0; t < net_trials; ++t) {
    const auto params = learn::init_feature_map({3, 5, 4}, seed + static_cast<std::uint64_t>(t));
    const Matrix X = random_matrix(3, 8, rng);
    const Membership pi = random_hard_membership(8, 2, rng);
    const RateParams rp{0.5, LogBase::nats};
    learn::OptimizerConfig cfg;
    const auto analytic = learn::feature_map_gradient(params, X, pi, rp, cfg);
    Vector theta = params.flatten();
    Vector numeric(theta.size());
    auto probe = params;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double orig = theta(i);
      theta(i) = orig + h;
      probe.assign(theta);
      const double up = learn::objective(learn::feature_map_forward(probe, X), pi, rp, cfg);
      theta(i) = orig - h;
      probe.assign(theta);
      const double down = learn::objective(learn::feature_map_forward(probe, X), pi, rp, cfg);
      theta(i) = orig;
      numeric(i) = (up - down) / (2.0 * h);
    }
    net.observe(max_relative_error(analytic.gradient, numeric), describe(seed, t));
  }
  for (const auto* tr : {&whole, &seg, &red, &net}) report.properties.push_back(tr->result());
}

LabelVector random_labels(std::size_t m, int k, synth::Rng& rng) {
  LabelVector out(m);
  for (auto& v : out) v = static_cast<int>(rng.below(static_cast<std::size_t>(k)));
  return out;
}

void metrics_suite(int trials, std::uint64_t seed, SuiteReport& report) {
  synth::Rng rng(seed);
  Tracker acc_brute("acc_minus_permutation_bruteforce", 1e-12, "<=");
  Tracker ari_pair("ari_minus_pairwise_oracle", 1e-12, "<=");
  Tracker relabel("relabel_invariance_residual", 1e-12, "<=");
  Tracker identical("identical_partitions_min_score", 1.0 - 1e-12, ">=");
  Tracker assign("assignment_minus_bruteforce", 1e-9, "<=");

  for (int t = 0; t < trials; ++t) {
    const int k = uniform_int(rng, 1, 5);
    const auto m = static_cast<std::size_t>(uniform_int(rng, 2, 40));
    const LabelVector y = random_labels(m, k, rng);
    const LabelVector c = random_labels(m, k, rng);

    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    double brute = 0.0;
    do {
      double hits = 0.0;
      for (std::size_t i = 0; i < m; ++i) hits += y[i] == perm[static_cast<std::size_t>(c[i])];
      brute = std::max(brute, hits / static_cast<double>(m));
    } while (std::next_permutation(perm.begin(), perm.end()));
    acc_brute.observe(std::abs(metrics::acc(y, c, k).acc - brute), describe(seed, t));

    double agree_same = 0.0, same_y = 0.0, same_c = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        const bool sy = y[i] == y[j];
        const bool sc = c[i] == c[j];
        agree_same += sy && sc;
        same_y += sy;
        same_c += sc;
        pairs += 1.0;
      }
    }
    const double expected = same_y * same_c / pairs;
    const double denom = 0.5 * (same_y + same_c) - expected;
    if (denom != 0.0) {
      ari_pair.observe(std::abs(metrics::ari(y, c) - (agree_same - expected) / denom), describe(seed, t));
    }

    // Relabel c by a random permutation.
    std::vector<int> shuffle(static_cast<std::size_t>(k));
    std::iota(shuffle.begin(), shuffle.end(), 0);
    for (int i = k - 1; i > 0; --i) std::swap(shuffle[static_cast<std::size_t>(i)], shuffle[rng.below(static_cast<std::size_t>(i + 1))]);
    LabelVector c2 = c;
    for (auto& v : c2) v = shuffle[static_cast<std::size_t>(v)];
    const double res = std::max({std::abs(metrics::nmi(y, c) - metrics::nmi(y, c2)),
                                 std::abs(metrics::ari(y, c) - metrics::ari(y, c2)),
                                 std::abs(metrics::acc(y, c, k).acc - metrics::acc(y, c2, k).acc),
                                 std::abs(metrics::acc(y, c, k).acc - metrics::acc(c, y, k).acc)});
    relabel.observe(res, describe(seed, t));

    identical.observe(std::min({metrics::nmi(y, y), metrics::ari(y, y), metrics::acc(y, y, k).acc}),
                      describe(seed, t));

    Matrix cost(6, 6);
    for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = std::floor(10.0 * rng.uniform());
    std::vector<int> p6{0, 1, 2, 3, 4, 5};
    double best = std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (int r = 0; r < 6; ++r) total += cost(r, p6[static_cast<std::size_t>(r)]);
      best = std::min(best, total);
    } while (std::next_permutation(p6.begin(), p6.end()));
    const auto sol = metrics::optimal_assignment(cost);
    double total = 0.0;
    for (int r = 0; r < 6; ++r) total += cost(r, sol[static_cast<std::size_t>(r)]);
    assign.observe(total - best, describe(seed, t));
  }
  for (const auto* tr : {&acc_brute, &ari_pair, &relabel, &identical, &assign}) {
    report.properties.push_back(tr->result());
  }
}

}  // namespace

Suite parse_suite(std::string_view text) {
  if (text == "lemmas") return Suite::lemmas;
  if (text == "theorem") return Suite::theorem;
  if (text == "gradients") return Suite::gradients;
  if (text == "metrics") return Suite::metrics;
  if (text == "all") return Suite::all;
  throw InvalidInput("unknown suite '" + std::string(text) + "' (expected lemmas, theorem, gradients, metrics or all)");
}

std::string_view to_string(Suite suite) {
  switch (suite) {
    case Suite::lemmas: return "lemmas";
    case Suite::theorem: return "theorem";
    case Suite::gradients: return "gradients";
    case Suite::metrics: return "metrics";
    case Suite::all: return "all";
  }
  return "all";
}

SuiteReport run_suite(Suite suite, int trials, std::uint64_t seed, const RateBackend& backend) {
  if (trials < 1) throw InvalidInput("trials must be at least 1");
  SuiteReport report;
  report.suite = suite;
  report.trials = trials;
  report.seed = seed;
  const bool all = suite == Suite::all;
  if (all || suite == Suite::lemmas) lemma_suite(trials, seed, backend, report);
  if (all || suite == Suite::theorem) theorem_suite(trials, seed + 1, report);
  if (all || suite == Suite::gradients) gradient_suite(trials, seed + 2, report);
  if (all || suite == Suite::metrics) metrics_suite(trials, seed + 3, report);
  for (const auto& p : report.properties) report.passed = report.passed && p.passed;
  return report;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, synth::Rng& rng) {
  return rng.gaussian(rows, cols);
}

Matrix random_orthogonal(Eigen::Index n, synth::Rng& rng) {
  return synth::random_orthonormal(n, n, rng);
}

Membership random_membership(Eigen::Index m, int k, bool soft, synth::Rng& rng) {
  Matrix w = Matrix::Zero(m, k);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (soft) {
      for (int j = 0; j < k; ++j) w(i, j) = -std::log(1.0 - rng.uniform());
      w.row(i) /= w.row(i).sum();
    } else {
      w(i, static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(k)))) = 1.0;
    }
  }
  return Membership(std::move(w));
}

Membership random_hard_membership(Eigen::Index m, int k, synth::Rng& rng) {
  if (m < k) throw InvalidInput("random_hard_membership needs m >= k");
  LabelVector labels(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    labels[static_cast<std::size_t>(i)] = i < k ? static_cast<int>(i) : static_cast<int>(rng.below(static_cast<std::size_t>(k)));
  }
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);
  return Membership::from_labels(labels, k);
}

}  // namespace mcr2::verify

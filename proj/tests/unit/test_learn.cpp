#include "mcr2/errors.hpp"
#include "mcr2/learn.hpp"
#include "mcr2/metrics.hpp"
#include "mcr2/rates.hpp"
#include "mcr2/synth.hpp"
#include "mcr2/theory.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mcr2;
using namespace mcr2::learn;

namespace {

const RateParams kHalf{0.5, LogBase::nats};

void check_ascent(const OptTrace& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i].reduction >= trace[i - 1].reduction - 1e-12);
}

}  // namespace

TEST_SUITE("learn") {

TEST_CASE("optimizer leaves an optimum in place") {
  Matrix Z0 = Matrix::Zero(16, 8);
  for (int i = 0; i < 8; ++i) Z0(i, i) = 1.0;
  const Membership pi = Membership::from_labels({0, 0, 0, 0, 1, 1, 1, 1}, 2);
  OptimizerConfig cfg;
  const auto res = optimize_representation(Z0, pi, kHalf, cfg);
  CHECK((res.Z - Z0).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(std::abs(res.trace.back().reduction - res.trace.front().reduction) < cfg.tol);
}

TEST_CASE("single class terminates immediately") {
  std::mt19937_64 gen(41);
  const Matrix Z0 = oracle::random_matrix(5, 6, gen);
  const auto res = optimize_representation(Z0, Membership::from_labels(LabelVector(6, 0), 1), kHalf, OptimizerConfig{});
  CHECK(res.trace.size() == 1);
  CHECK(std::abs(res.trace[0].reduction) < 1e-12);
}

TEST_CASE("optimum emerges on the small two-class instance") {
  std::mt19937_64 gen(42);
  const Membership pi = Membership::from_labels({0, 0, 0, 0, 1, 1, 1, 1}, 2);
  OptimizerConfig cfg;
  cfg.step_size = 1.0;
  cfg.tol = 1e-13;
  cfg.max_iters = 20000;
  const auto res = optimize_representation(oracle::random_matrix(16, 8, gen), pi, kHalf, cfg);
  const auto diag = theory::diagnose_optimum(res.Z, pi, kHalf);
  CHECK(diag.max_interclass_cosine < 1e-2);
  for (const auto& s : diag.per_class_singular_values) {
    for (int p = 0; p < 4; ++p) CHECK(std::abs(s(p) - 1.0) < 1e-2);
  }
  const double target = theory::optimal_rate_reduction(pi, 16, kHalf);
  CHECK(std::abs(res.trace.back().reduction - target) / target < 5e-3);
  check_ascent(res.trace);
}

TEST_CASE("constraints hold along the way") {
  std::mt19937_64 gen(43);
  const LabelVector labels{0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
  const Membership pi = Membership::from_labels(labels, 3);
  for (auto mode : {Normalization::unit_sphere, Normalization::per_class_frobenius}) {
    OptimizerConfig cfg;
    cfg.normalization = mode;
    cfg.max_iters = 50;
    const auto res = optimize_representation(oracle::random_matrix(6, 10, gen), pi, kHalf, cfg);
    CHECK(res.trace.size() <= 51);
    check_ascent(res.trace);
    if (mode == Normalization::unit_sphere) {
      CHECK(max_unit_norm_error(res.Z) < 1e-9);
    } else {
      for (int j = 0; j < 3; ++j) {
        double fro = 0.0;
        for (int i = 0; i < 10; ++i)
          if (labels[static_cast<std::size_t>(i)] == j) fro += res.Z.col(i).squaredNorm();
        CHECK(fro == doctest::Approx(pi.class_mass(j)).epsilon(1e-6));
      }
    }
  }
  Matrix W(2, 2);
  W << 0.5, 0.5, 0.0, 1.0;
  OptimizerConfig fro;
  fro.normalization = Normalization::per_class_frobenius;
  CHECK_THROWS_AS(optimize_representation(oracle::random_matrix(3, 2, gen), Membership(W), kHalf, fro), InvalidInput);
}

TEST_CASE("zero iterations and zero step leave features unchanged") {
  std::mt19937_64 gen(44);
  Matrix Z0 = oracle::random_matrix(5, 6, gen);
  Z0.colwise().normalize();
  const Membership pi = Membership::from_labels({0, 1, 0, 1, 0, 1}, 2);
  OptimizerConfig cfg;
  cfg.max_iters = 0;
  const auto none = optimize_representation(Z0, pi, kHalf, cfg);
  CHECK(none.Z == Z0);
  CHECK(none.trace.size() == 1);
  cfg.max_iters = 5;
  cfg.step_size = 0.0;
  const auto still = optimize_representation(Z0, pi, kHalf, cfg);
  CHECK((still.Z - Z0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("optimizer config validation") {
  OptimizerConfig cfg;
  cfg.step_size = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg = OptimizerConfig{};
  cfg.tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg = OptimizerConfig{};
  cfg.use_ctrl = true;
  cfg.gamma2 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  CHECK(parse_normalization("per_class_frobenius") == Normalization::per_class_frobenius);
  CHECK_THROWS_AS(parse_normalization("l1"), InvalidInput);
}

TEST_CASE("feature map initialization") {
  const auto a = init_feature_map({3, 5, 4}, 9);
  const auto b = init_feature_map({3, 5, 4}, 9);
  CHECK(a.flatten() == b.flatten());
  CHECK(a.num_parameters() == 5 * 3 + 5 + 4 * 5 + 4);
  CHECK(a.biases[0].isZero());

  const auto wide = init_feature_map({256, 128}, 10);
  const Matrix& W = wide.weights[0];
  const double mean = W.mean();
  const double sd = std::sqrt((W.array() - mean).square().sum() / static_cast<double>(W.size() - 1));
  CHECK(std::abs(sd * std::sqrt(256.0) - 1.0) < 0.1);

  CHECK_THROWS_AS(init_feature_map({3, 0, 4}, 1), InvalidInput);
  CHECK_THROWS_AS(init_feature_map({3}, 1), InvalidInput);

  auto c = a;
  Vector flat = c.flatten();
  flat(0) += 1.0;
  c.assign(flat);
  CHECK(c.weights[0](0, 0) == a.weights[0](0, 0) + 1.0);
  CHECK_THROWS_AS(c.assign(Vector::Zero(3)), InvalidInput);
}

TEST_CASE("feature map forward") {
  FeatureMapParams id;
  id.layer_widths = {3, 3};
  id.weights = {Matrix::Identity(3, 3)};
  id.biases = {Vector::Zero(3)};
  std::mt19937_64 gen(45);
  Matrix X = oracle::random_matrix(3, 5, gen);
  X.colwise().normalize();
  CHECK((feature_map_forward(id, X) - X).cwiseAbs().maxCoeff() < 1e-15);

  const auto net = init_feature_map({4, 7, 6}, 3);
  CHECK(max_unit_norm_error(feature_map_forward(net, oracle::random_matrix(4, 9, gen))) < 1e-9);
  CHECK_THROWS_AS(feature_map_forward(net, oracle::random_matrix(3, 9, gen)), DimensionMismatch);

  FeatureMapParams zero = id;
  zero.weights[0].setZero();
  CHECK_THROWS_AS(feature_map_forward(zero, X), DegenerateFeature);
}

TEST_CASE("parameter gradient matches central differences") {
  std::mt19937_64 gen(46);
  const Matrix X = oracle::random_matrix(3, 8, gen);
  const Membership pi = Membership::from_labels({0, 1, 1, 0, 1, 0, 0, 1}, 2);
  for (bool ctrl : {false, true}) {
    OptimizerConfig cfg;
    cfg.use_ctrl = ctrl;
    cfg.gamma1 = 1.5;
    cfg.gamma2 = 0.7;
    auto params = init_feature_map({3, 5, 4}, 12);
    const auto g = feature_map_gradient(params, X, pi, kHalf, cfg);
    const Vector theta = params.flatten();
    Vector fd(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      Vector t = theta;
      t(i) += 1e-5;
      params.assign(t);
      const double up = objective(feature_map_forward(params, X), pi, kHalf, cfg);
      t(i) -= 2e-5;
      params.assign(t);
      const double down = objective(feature_map_forward(params, X), pi, kHalf, cfg);
      fd(i) = (up - down) / 2e-5;
    }
    params.assign(theta);
    CHECK(oracle::relative_error(g.gradient, fd) < 1e-4);
    CHECK(g.objective == doctest::Approx(objective(feature_map_forward(params, X), pi, kHalf, cfg)));
  }
}

TEST_CASE("training with zero step is a no-op") {
  const auto data = synth::gen_two_circles(20, 1.0, 3.0, 0.05, 1);
  const auto init = init_feature_map({3, 8, 4}, 2);
  OptimizerConfig cfg;
  cfg.step_size = 0.0;
  cfg.max_iters = 5;
  const auto res = train_feature_map(init, data.X, Membership::from_labels(data.labels, 2), kHalf, cfg);
  CHECK(res.params.flatten() == init.flatten());
  for (const auto& rec : res.trace) CHECK(rec.reduction == res.trace.front().reduction);
}

TEST_CASE("two circles become separable") {
  const auto data = synth::gen_two_circles(100, 1.0, 3.0, 0.05, 3);
  const Membership pi = Membership::from_labels(data.labels, 2);
  OptimizerConfig cfg;
  cfg.max_iters = 300;
  cfg.tol = 1e-9;
  const auto res = train_feature_map(init_feature_map({3, 32, 32, 8}, 3), data.X, pi, kHalf, cfg);
  check_ascent(res.trace);
  const Matrix Z = feature_map_forward(res.params, data.X);
  const auto models = metrics::fit_class_models(Z, data.labels, 4, 2);
  CHECK(metrics::accuracy(data.labels, metrics::nearest_subspace_predict_all(models, Z)) >= 0.95);
}

TEST_CASE("rescaled objective with unit gammas reproduces plain training") {
  const auto data = synth::gen_two_circles(30, 1.0, 3.0, 0.05, 5);
  const Membership pi = Membership::from_labels(data.labels, 2);
  OptimizerConfig plain;
  plain.max_iters = 40;
  OptimizerConfig ctrl = plain;
  ctrl.use_ctrl = true;
  const auto init = init_feature_map({3, 10, 6}, 6);
  const auto a = train_feature_map(init, data.X, pi, kHalf, plain);
  const auto b = train_feature_map(init, data.X, pi, kHalf, ctrl);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].reduction == b.trace[i].reduction);
    CHECK(a.trace[i].rate_whole == b.trace[i].rate_whole);
  }
  CHECK(a.params.flatten() == b.params.flatten());
}

}  // TEST_SUITE

#include "mcr2/errors.hpp"
#include "mcr2/metrics.hpp"
#include "mcr2/rates.hpp"
#include "mcr2/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace mcr2;
using namespace mcr2::synth;

TEST_SUITE("synth") {

TEST_CASE("orthogonal mixtures have orthogonal classes") {
  SubspaceMixtureSpec spec;
  spec.k = 2;
  spec.d = 4;
  spec.d_j = 1;
  spec.samples_per_class = 3;
  spec.seed = 5;
  const auto data = gen_subspace_mixture(spec);
  REQUIRE(data.X.cols() == 6);
  CHECK(data.labels == LabelVector{0, 0, 0, 1, 1, 1});
  const Matrix cross = data.X.leftCols(3).transpose() * data.X.rightCols(3);
  CHECK(cross.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mixture columns are unit norm and per-class rank is min(d_j, n)") {
  for (bool orth : {true, false}) {
    SubspaceMixtureSpec spec;
    spec.k = 3;
    spec.d = 20;
    spec.d_j = 5;
    spec.samples_per_class = 8;
    spec.orthogonal = orth;
    spec.seed = 6;
    const auto data = gen_subspace_mixture(spec);
    CHECK((data.X.colwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);
    for (int j = 0; j < 3; ++j) {
      Eigen::JacobiSVD<Matrix> svd(data.X.middleCols(8 * j, 8));
      const auto& s = svd.singularValues();
      CHECK((s.array() > 1e-9 * s(0)).count() == 5);
    }
    spec.samples_per_class = 3;
    const auto small = gen_subspace_mixture(spec);
    Eigen::JacobiSVD<Matrix> svd(small.X.leftCols(3));
    CHECK((svd.singularValues().array() > 1e-9).count() == 3);
  }
}

TEST_CASE("mixture spec validation") {
  SubspaceMixtureSpec spec;
  spec.k = 3;
  spec.d = 10;
  spec.d_j = 4;
  CHECK_THROWS_AS(gen_subspace_mixture(spec), InvalidInput);
  spec.orthogonal = false;
  CHECK_NOTHROW(gen_subspace_mixture(spec));
  spec.d_j = 0;
  CHECK_THROWS_AS(gen_subspace_mixture(spec), InvalidInput);
  spec.d_j = 2;
  spec.samples_per_class = 0;
  CHECK_THROWS_AS(gen_subspace_mixture(spec), InvalidInput);
}

TEST_CASE("generators are deterministic given the seed") {
  SubspaceMixtureSpec spec;
  spec.k = 4;
  spec.d = 32;
  spec.d_j = 6;
  spec.samples_per_class = 10;
  spec.seed = 99;
  CHECK(gen_subspace_mixture(spec).X == gen_subspace_mixture(spec).X);
  spec.seed = 100;
  const Matrix other = gen_subspace_mixture(spec).X;
  spec.seed = 99;
  CHECK_FALSE(gen_subspace_mixture(spec).X == other);
  CHECK(gen_gaussian(8, 12, 3, 4).X == gen_gaussian(8, 12, 3, 4).X);
  CHECK(corrupt_labels(LabelVector(50, 1), 0.4, 3, 7) == corrupt_labels(LabelVector(50, 1), 0.4, 3, 7));
}

TEST_CASE("gaussian data") {
  const auto data = gen_gaussian(16, 30, 3, 8);
  CHECK((data.X.colwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);
  for (int i = 0; i < 30; ++i) CHECK(data.labels[static_cast<std::size_t>(i)] == i % 3);
  CHECK_THROWS_AS(gen_gaussian(16, 31, 3, 8), InvalidInput);

  const RateParams p{0.5, LogBase::nats};
  const double a = coding_rate(gen_gaussian(512, 1000, 10, 1).X, p);
  const double b = coding_rate(gen_gaussian(512, 1000, 10, 2).X, p);
  CHECK(std::abs(a - b) / a < 0.01);
}

TEST_CASE("membership from labels") {
  const auto pi = membership_from_labels({0, 1, 0}, 2);
  CHECK(pi.weights()(0, 0) == 1.0);
  CHECK(pi.weights()(1, 1) == 1.0);
  CHECK(pi.weights()(2, 0) == 1.0);
  const LabelVector labels{2, 0, 2, 2, 1, 0};
  const auto hist = membership_from_labels(labels, 3);
  CHECK(hist.class_mass(0) == 2.0);
  CHECK(hist.class_mass(1) == 1.0);
  CHECK(hist.class_mass(2) == 3.0);
  CHECK(hist.argmax_labels() == labels);
  CHECK_THROWS_AS(membership_from_labels({0, 3}, 3), InvalidInput);
}

TEST_CASE("label corruption") {
  LabelVector labels(1000);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 4);
  CHECK(corrupt_labels(labels, 0.0, 4, 1) == labels);

  const auto all = corrupt_labels(labels, 1.0, 4, 2);
  for (std::size_t i = 0; i < labels.size(); ++i) CHECK(all[i] != labels[i]);

  const auto half = corrupt_labels(labels, 0.5, 4, 3);
  int changed = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    changed += half[i] != labels[i];
    CHECK(half[i] >= 0);
    CHECK(half[i] < 4);
  }
  CHECK(changed == 500);
  CHECK_THROWS_AS(corrupt_labels(labels, 1.5, 4, 3), InvalidInput);
}

TEST_CASE("self labeling") {
  const auto base = gen_gaussian(6, 3, 3, 1).X;
  const auto exact = self_label(base, 4, 0.0, 2);
  REQUIRE(exact.X.cols() == 12);
  for (int j = 0; j < 3; ++j) {
    for (int c = 0; c < 4; ++c) {
      CHECK((exact.X.col(4 * j + c) - base.col(j)).norm() < 1e-12);
      CHECK(exact.labels[static_cast<std::size_t>(4 * j + c)] == j);
    }
  }
  std::map<int, int> hist;
  for (int y : self_label(base, 5, 0.1, 3).labels) ++hist[y];
  CHECK(hist == std::map<int, int>{{0, 5}, {1, 5}, {2, 5}});

  const RateParams p{0.5, LogBase::nats};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto src = gen_gaussian(16, 2, 2, seed).X;
    const auto aug = self_label(src, 6, 0.01, seed + 1000);
    const Matrix a = aug.X.leftCols(6);
    const Matrix b = aug.X.rightCols(6);
    const double within = pair_distance(a.leftCols(3), a.rightCols(3), p);
    const double across = pair_distance(a, b, p);
    CHECK(within * 10.0 < across);
  }
}

TEST_CASE("two circles") {
  const auto data = gen_two_circles(50, 1.0, 3.0, 0.0, 4);
  REQUIRE(data.X.rows() == 3);
  REQUIRE(data.X.cols() == 100);
  for (Eigen::Index i = 0; i < 100; ++i) {
    const double radius = data.X.col(i).head<2>().norm();
    CHECK(radius == doctest::Approx(data.labels[static_cast<std::size_t>(i)] == 0 ? 1.0 : 3.0));
    CHECK(data.X(2, i) == 1.0);
  }
}

TEST_CASE("reduction grows with subspace dimension for orthogonal mixtures") {
  const RateParams p{0.5, LogBase::nats};
  double prev = -1.0;
  for (int dj : {1, 2, 4, 8}) {
    SubspaceMixtureSpec spec;
    spec.k = 4;
    spec.d = 64;
    spec.d_j = dj;
    spec.samples_per_class = 40;
    spec.seed = 10;
    const auto data = gen_subspace_mixture(spec);
    const double dr = rate_reduction(data.X, membership_from_labels(data.labels, 4), p).reduction;
    CHECK(dr > prev);
    prev = dr;
  }
}

}  // TEST_SUITE

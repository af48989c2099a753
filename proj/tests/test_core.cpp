#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bbis/core.hpp"

using namespace bbis;
using Catch::Approx;

TEST_CASE("standardize: two-point column pins the n-1 convention") {
  Matrix x(2, 1);
  x << 0.0, 2.0;
  const auto [t, z] = standardize(x);
  CHECK(t.means[0] == Approx(1.0));
  CHECK(t.scales[0] == Approx(std::sqrt(2.0)));
  CHECK(z(0, 0) == Approx(-1.0 / std::sqrt(2.0)));
  CHECK(z(1, 0) == Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("standardize: already standardized input is unchanged") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  Matrix x(40, 3);
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = gauss(rng);
  const auto [t0, z0] = standardize(x);
  const auto [t1, z1] = standardize(z0);
  CHECK((z1 - z0).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(t1.means.cwiseAbs().maxCoeff() < 1e-12);
  CHECK((t1.scales.array() - 1.0).abs().maxCoeff() < 1e-9);
}

TEST_CASE("standardize: constant column gets scale 1") {
  Matrix x(3, 2);
  x << 3.0, 1.0, 3.0, 2.0, 3.0, 3.0;
  const auto [t, z] = standardize(x);
  CHECK(t.scales[0] == 1.0);
  CHECK(z.col(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("standardize: error paths") {
  Matrix one_row(1, 2);
  one_row << 1.0, 2.0;
  CHECK_THROWS_WITH(standardize(one_row), "insufficient samples");

  Matrix bad(2, 1);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH(standardize(bad), "non-finite input");
}

TEST_CASE("standardize: inverse transform is the identity") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  Matrix x(25, 4);
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = 5.0 * gauss(rng) + 2.0;
  const auto [t, z] = standardize(x);
  CHECK((t.invert(z) - x).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("mahalanobis: 1-D sample covariance and quadratic form") {
  Matrix x(3, 1);
  x << 0.0, 1.0, 2.0;
  const MahalanobisMetric metric = mahalanobis_metric(x, 0.0);
  CHECK(metric.covariance()(0, 0) == Approx(1.0));  // n-1 divisor
  Vector a(1), b(1);
  a << 0.0;
  b << 2.0;
  CHECK(metric.squared_distance(a, b) == Approx(4.0));
}

TEST_CASE("mahalanobis: standardized uncorrelated samples give identity-ish metric") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  Matrix x(4000, 2);
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = gauss(rng);
  const auto [t, z] = standardize(x);
  const MahalanobisMetric metric = mahalanobis_metric(z, 0.0);
  CHECK((metric.covariance() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.1);

  Vector a(2), b(2);
  a << 0.5, -0.25;
  b << -0.5, 0.5;
  CHECK(metric.squared_distance(a, b) ==
        Approx((a - b).squaredNorm()).epsilon(0.1));
}

TEST_CASE("mahalanobis: collinear samples escalate the jitter") {
  Matrix x(5, 2);
  for (Index i = 0; i < 5; ++i) {
    x(i, 0) = double(i);
    x(i, 1) = 2.0 * double(i);  // exactly on a line
  }
  const MahalanobisMetric metric = mahalanobis_metric(x, 0.0);
  CHECK(metric.jitter() > 0.0);
  CHECK(metric.jitter() <= 1e-2);
}

TEST_CASE("pairwise_sq_dist: hand values and invariants") {
  SECTION("identical rows give zeros") {
    Matrix x(3, 2);
    x << 1.0, 2.0, 1.0, 2.0, 1.0, 2.0;
    const MahalanobisMetric metric(Matrix::Identity(2, 2), 0.0);
    CHECK(pairwise_sq_dist(x, metric).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("1-D Euclidean reduction") {
    Matrix x(2, 1);
    x << 0.0, 3.0;
    const MahalanobisMetric metric(Matrix::Identity(1, 1), 0.0);
    const Matrix d2 = pairwise_sq_dist(x, metric);
    CHECK(d2(0, 1) == Approx(9.0));
    CHECK(d2(1, 0) == Approx(9.0));
    CHECK(d2(0, 0) == 0.0);
  }

  SECTION("anisotropic quadratic form") {
    Matrix sigma(2, 2);
    sigma << 2.0, 0.0, 0.0, 1.0;
    const MahalanobisMetric metric(sigma, 0.0);
    Matrix x(2, 2);
    x << 2.0, 0.0, 0.0, 0.0;
    CHECK(pairwise_sq_dist(x, metric)(0, 1) == Approx(2.0));
  }

  SECTION("dimension mismatch") {
    Matrix x(2, 3);
    x.setZero();
    const MahalanobisMetric metric(Matrix::Identity(2, 2), 0.0);
    CHECK_THROWS_AS(pairwise_sq_dist(x, metric), std::invalid_argument);
  }
}

TEST_CASE("pairwise_sq_dist: permutation equivariance and Euclidean match") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  Matrix x(30, 3);
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = gauss(rng);

  const MahalanobisMetric eye(Matrix::Identity(3, 3), 0.0);
  const Matrix d2 = pairwise_sq_dist(x, eye);

  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.rows(); ++j) {
      CHECK(std::abs(d2(i, j) - (x.row(i) - x.row(j)).squaredNorm()) < 1e-12);
    }
  }

  std::vector<Index> perm(x.rows());
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix xp(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) xp.row(i) = x.row(perm[i]);
  const Matrix d2p = pairwise_sq_dist(xp, eye);
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.rows(); ++j) {
      CHECK(d2p(i, j) == Approx(d2(perm[i], perm[j])).margin(1e-12));
    }
  }
}

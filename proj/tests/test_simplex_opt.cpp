#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bbis/simplex_opt.hpp"
#include "oracles.hpp"

using namespace bbis;
using Catch::Approx;

TEST_CASE("project_to_simplex: pinned examples") {
  Vector v(2);
  v << 0.5, 0.5;
  CHECK((project_to_simplex(v) - v).cwiseAbs().maxCoeff() < 1e-15);

  v << 0.3, 0.3;
  const Vector w = project_to_simplex(v);
  CHECK(w[0] == Approx(0.5));
  CHECK(w[1] == Approx(0.5));

  Vector u(3);
  u << 0.2, -0.1, 0.4;  // theta = -1/6 from the KKT conditions
  const Vector wu = project_to_simplex(u);
  CHECK(wu[0] == Approx(0.2 + 1.0 / 6.0).epsilon(1e-12));
  CHECK(wu[1] == Approx(-0.1 + 1.0 / 6.0).epsilon(1e-12));
  CHECK(wu[2] == Approx(0.4 + 1.0 / 6.0).epsilon(1e-12));

  Vector t(2);
  t << 2.0, 1.0;  // theta = 1
  const Vector wt = project_to_simplex(t);
  CHECK(wt[0] == Approx(1.0));
  CHECK(wt[1] == Approx(0.0).margin(1e-15));
}

TEST_CASE("project_to_simplex: non-finite input") {
  Vector v(2);
  v << 1.0, std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH(project_to_simplex(v), "non-finite input");
}

TEST_CASE("project_to_simplex: KKT on random vectors, idempotence") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> gauss(0.0, 2.0);
  std::uniform_int_distribution<int> dim(1, 10);
  for (int trial = 0; trial < 500; ++trial) {
    Vector v(dim(rng));
    for (Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    const Vector w = project_to_simplex(v);
    REQUIRE(oracles::satisfies_projection_kkt(v, w));
    const Vector ww = project_to_simplex(w);
    REQUIRE((ww - w).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("qp: identity matrix pulls any start to uniform") {
  for (auto rule : {StepRule::kFixedFromSpectralBound, StepRule::kBacktracking}) {
    QPConfig cfg;
    cfg.step_rule = rule;
    Vector w0(3);
    w0 << 1.0, 0.0, 0.0;
    const QPResult r =
        minimize_quadratic_on_simplex(Matrix::Identity(3, 3), w0, cfg);
    CHECK(r.converged);
    for (Index i = 0; i < 3; ++i) CHECK(r.weights[i] == Approx(1.0 / 3.0).margin(1e-6));
    CHECK(r.objective_trace.back() == Approx(1.0 / 3.0).margin(1e-9));
  }
}

TEST_CASE("qp: diag(1, 100) has the interior optimum (100/101, 1/101)") {
  Matrix q = Matrix::Zero(2, 2);
  q(0, 0) = 1.0;
  q(1, 1) = 100.0;
  Vector w0(2);
  w0 << 0.5, 0.5;
  const QPResult r = minimize_quadratic_on_simplex(q, w0);
  CHECK(r.weights[0] == Approx(100.0 / 101.0).margin(2e-3));
  CHECK(r.weights[1] == Approx(1.0 / 101.0).margin(2e-3));
  CHECK(r.objective_trace.back() == Approx(100.0 / 101.0).margin(1e-4));
}

TEST_CASE("qp: random PSD instances match the grid oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix q = oracles::random_psd(3, rng);
    const Vector w0 = Vector::Constant(3, 1.0 / 3.0);
    QPConfig cfg;
    cfg.tol = 1e-12;
    const QPResult r = minimize_quadratic_on_simplex(q, w0, cfg);
    const Vector wg = oracles::grid_min_simplex3(q);
    const double grid_obj = wg.dot(q * wg);
    CHECK(r.objective_trace.back() <= grid_obj + 1e-6);
    CHECK((r.weights - wg).cwiseAbs().maxCoeff() < 2e-3);
  }
}

TEST_CASE("qp: every recorded objective is non-increasing, iterates feasible") {
  std::mt19937_64 rng(5);
  for (auto rule : {StepRule::kFixedFromSpectralBound, StepRule::kBacktracking}) {
    const Matrix q = oracles::random_psd(8, rng);
    Vector w0 = Vector::Zero(8);
    w0[0] = 1.0;
    QPConfig cfg;
    cfg.step_rule = rule;
    const QPResult r = minimize_quadratic_on_simplex(q, w0, cfg);
    for (size_t i = 1; i < r.objective_trace.size(); ++i) {
      REQUIRE(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-12);
    }
    CHECK(is_weight_vector(r.weights));
    CHECK(r.objective_trace.back() <= r.objective_trace.front());
  }
}

TEST_CASE("qp: gradient matches finite differences of the objective") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<Index> dim(2, 20);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = dim(rng);
    const Matrix q = oracles::random_psd(n, rng);
    Vector w(n);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    for (Index i = 0; i < n; ++i) w[i] = unif(rng);
    w /= w.sum();

    const Vector grad = 2.0 * (q * w);
    const Vector fd = oracles::fd_gradient(
        [&](const Vector& x) { return x.dot(q * x); }, w);
    CHECK((grad - fd).norm() / grad.norm() < 1e-6);
  }
}

TEST_CASE("qp: error paths") {
  Vector w0(1);
  w0 << 1.0;
  CHECK_THROWS_AS(minimize_quadratic_on_simplex(
                      [](const Vector& v) { return v; }, 0, Vector(), {}),
                  std::invalid_argument);

  const auto blow_up = [](const Vector& v) {
    return Vector(v * std::numeric_limits<double>::quiet_NaN());
  };
  CHECK_THROWS_WITH(minimize_quadratic_on_simplex(blow_up, 1, w0, {}),
                    Catch::Matchers::ContainsSubstring("numerical blow-up"));
}

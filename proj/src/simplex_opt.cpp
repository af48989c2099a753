#include "bbis/simplex_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bbis {

Vector project_to_simplex(const Vector& v) {
  const Index n = v.size();
  if (n < 1) throw std::invalid_argument("empty input");
  if (!v.allFinite()) throw std::invalid_argument("non-finite input");

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return v[a] > v[b]; });

  // Largest k with u_k > (cumsum_k - 1) / k, then theta = (cumsum_k* - 1) / k*.
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index k = 0; k < n; ++k) {
    cumsum += v[order[k]];
    const double t = (cumsum - 1.0) / double(k + 1);
    if (v[order[k]] - t > 0.0) theta = t;
  }

  return (v.array() - theta).max(0.0);
}

namespace {

//! Deterministic power-iteration upper bound on the spectral norm of Q.
double spectral_bound(const std::function<Vector(const Vector&)>& apply_Q,
                      Index n, int iters) {
  // A fixed LCG keeps the starting vector reproducible without threading an
  // RNG through the solver.
  std::uint64_t state = 0x5eed5eed5eedULL + static_cast<std::uint64_t>(n);
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    v[i] = double(state >> 11) / double(1ULL << 53) - 0.5;
  }
  double vn = v.norm();
  if (vn == 0.0) v.setConstant(1.0 / std::sqrt(double(n)));
  else v /= vn;

  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector qv = apply_Q(v);
    const double norm = qv.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    lambda = norm;
    v = qv / norm;
  }
  return lambda * 1.01;
}

}  // namespace

QPResult minimize_quadratic_on_simplex(
    const std::function<Vector(const Vector&)>& apply_Q, Index n,
    const Vector& w0, const QPConfig& cfg) {
  if (n < 1) throw std::invalid_argument("empty problem");
  if (w0.size() != n) throw std::invalid_argument("dimension mismatch");
  check_weights(w0);

  QPResult result;
  Vector w = w0;
  Vector qw = apply_Q(w);
  double f = w.dot(qw);
  if (!std::isfinite(f)) {
    throw std::runtime_error("numerical blow-up at iterate 0");
  }
  result.objective_trace.push_back(f);

  double eta = 1.0;
  if (cfg.step_rule == StepRule::kFixedFromSpectralBound) {
    const double bound = spectral_bound(apply_Q, n, cfg.power_iters);
    eta = bound > 0.0 ? 1.0 / (2.0 * bound) : 1.0;
  }

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const Vector grad = 2.0 * qw;

    Vector w_next;
    Vector qw_next;
    double f_next;
    if (cfg.step_rule == StepRule::kBacktracking) {
      double step = eta;
      bool found = false;
      for (int half = 0; half < 60; ++half) {
        w_next = project_to_simplex(w - step * grad);
        qw_next = apply_Q(w_next);
        f_next = w_next.dot(qw_next);
        if (!std::isfinite(f_next)) {
          throw std::runtime_error("numerical blow-up at iterate " +
                                   std::to_string(it));
        }
        if (f_next <= f) {
          found = true;
          break;
        }
        step *= 0.5;
      }
      if (!found) {  // no descent direction left at float resolution
        result.iterations = it - 1;
        result.converged = true;
        break;
      }
      eta = step * 2.0;  // allow the step to grow back
    } else {
      w_next = project_to_simplex(w - eta * grad);
      qw_next = apply_Q(w_next);
      f_next = w_next.dot(qw_next);
      if (!std::isfinite(f_next)) {
        throw std::runtime_error("numerical blow-up at iterate " +
                                 std::to_string(it));
      }
    }

    if (f_next > f) {  // keep the trace monotone; the previous iterate stands
      result.iterations = it - 1;
      result.converged = true;
      break;
    }

    const double decrease = f - f_next;
    w = std::move(w_next);
    qw = std::move(qw_next);
    f = f_next;
    result.objective_trace.push_back(f);
    result.iterations = it;

    if (decrease <= cfg.tol * std::max(std::abs(f), 1e-300)) {
      result.converged = true;
      break;
    }
  }

  result.weights = std::move(w);
  return result;
}

QPResult minimize_quadratic_on_simplex(const Matrix& Q, const Vector& w0,
                                       const QPConfig& cfg) {
  return minimize_quadratic_on_simplex(
      [&Q](const Vector& v) -> Vector { return Q.selfadjointView<Eigen::Lower>() * v; },
      Q.rows(), w0, cfg);
}

}  // namespace bbis

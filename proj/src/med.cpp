#include "bbis/med.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bbis/core.hpp"
#include "bbis/util.hpp"

namespace bbis {

EnergyMatrix build_energy_matrix(const Vector& log_gamma, const Matrix& sq_dists,
                                 Index p, const MedConfig& cfg) {
  const Index n = log_gamma.size();
  if (n < 1) throw std::invalid_argument("empty input");
  if (p < 1) throw std::invalid_argument("dimension must be positive");
  if (!log_gamma.allFinite()) {
    throw std::invalid_argument("non-finite log_gamma");  // callers filter first
  }
  if (sq_dists.rows() != n || sq_dists.cols() != n) {
    throw std::invalid_argument("dimension mismatch");
  }
  if ((sq_dists.array() < 0.0).any() ||
      !sq_dists.isApprox(sq_dists.transpose(), 1e-12) ||
      sq_dists.diagonal().cwiseAbs().maxCoeff() != 0.0) {
    throw std::invalid_argument("sq_dists must be symmetric, nonnegative, zero-diagonal");
  }

  // Re-center log_gamma at its max before dividing by 2p: any constant shift
  // of the input then cancels exactly, entry by entry, which makes the weights
  // bitwise shift-invariant (the normalizing constant never matters).
  const double lg_max = log_gamma.maxCoeff();
  const Vector g = (log_gamma.array() - lg_max) / (2.0 * double(p));

  EnergyMatrix em;
  em.log_entries.resize(n, n);
  parallel_for_blocks(0, n, [&](Index lo, Index hi) {
    for (Index i = lo; i < hi; ++i) {
      for (Index j = 0; j <= i; ++j) {
        const double v =
            -cfg.k * (g[i] + g[j] + 0.5 * std::log(sq_dists(i, j) + cfg.delta));
        em.log_entries(i, j) = v;
        em.log_entries(j, i) = v;
      }
    }
  });

  em.stabilizer = em.log_entries.maxCoeff();
  em.log_entries.array() -= em.stabilizer;
  return em;
}

std::vector<Index> low_density_filter(const Vector& log_gamma, Index p,
                                      double delta, double* nu_out) {
  const Index n = log_gamma.size();
  if (n < 1) throw std::invalid_argument("empty input");
  if (p < 1 || delta <= 0.0) throw std::invalid_argument("invalid parameters");

  double max_lg = -std::numeric_limits<double>::infinity();
  Index argmax = -1;
  for (Index i = 0; i < n; ++i) {
    if (std::isnan(log_gamma[i]) ||
        log_gamma[i] == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("non-finite input");  // only -inf is allowed
    }
    if (log_gamma[i] > max_lg) {
      max_lg = log_gamma[i];
      argmax = i;
    }
  }
  if (!std::isfinite(max_lg)) {
    throw std::runtime_error("all samples have zero density");
  }

  const double pd = double(p);
  const double span = 20.0 * std::sqrt(pd);
  const double drop =
      pd * (1.0 / std::sqrt(delta) - 1.0 / std::sqrt(span * span + delta)) + 1.0;
  if (nu_out) *nu_out = max_lg - drop;

  // Compare against the max by difference so that constant shifts of
  // log_gamma cannot move points across the threshold.
  std::vector<Index> active;
  active.reserve(n);
  for (Index i = 0; i < n; ++i) {
    if (log_gamma[i] - max_lg >= -drop || i == argmax) active.push_back(i);
  }
  return active;
}

MedResult med_weights(const Matrix& samples, const Vector& log_gamma,
                      const MedConfig& cfg) {
  const Index n = samples.rows();
  const Index p = samples.cols();
  if (log_gamma.size() != n) throw std::invalid_argument("dimension mismatch");
  check_samples(samples);

  MedResult result;
  result.diag.filter_heuristic_for_k = (cfg.k != 1.0);

  if (n == 1) {
    result.weights = Vector::Ones(1);
    result.qp.weights = result.weights;
    result.qp.objective_trace = {0.0};
    result.qp.converged = true;
    result.diag.active_count = 1;
    return result;
  }

  const auto [transform, standardized] = standardize(samples);
  const MahalanobisMetric metric = mahalanobis_metric(standardized, cfg.jitter);
  result.diag.jitter_used = metric.jitter();
  const Matrix d2 = pairwise_sq_dist(standardized, metric);

  std::vector<Index> active;
  if (cfg.filter_enabled) {
    active = low_density_filter(log_gamma, p, cfg.delta, &result.diag.nu);
  } else {
    // Even unfiltered, -inf densities cannot enter the energy matrix.
    for (Index i = 0; i < n; ++i) {
      if (std::isfinite(log_gamma[i])) active.push_back(i);
    }
    if (active.empty()) throw std::runtime_error("all samples have zero density");
    result.diag.nu = -std::numeric_limits<double>::infinity();
  }
  const Index m = static_cast<Index>(active.size());
  result.diag.active_count = m;

  Vector lg_active(m);
  Matrix d2_active(m, m);
  for (Index a = 0; a < m; ++a) {
    lg_active[a] = log_gamma[active[a]];
    for (Index b = 0; b < m; ++b) d2_active(a, b) = d2(active[a], active[b]);
  }

  const EnergyMatrix em = build_energy_matrix(lg_active, d2_active, p, cfg);
  result.diag.stabilizer = em.stabilizer;

  const Matrix Q = em.log_entries.array().exp();
  const Vector w0 = Vector::Constant(m, 1.0 / double(m));
  result.qp = minimize_quadratic_on_simplex(Q, w0, cfg.qp);

  result.weights = Vector::Zero(n);
  for (Index a = 0; a < m; ++a) result.weights[active[a]] = result.qp.weights[a];
  return result;
}

}  // namespace bbis

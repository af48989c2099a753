#include "bbis/samplers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bbis/util.hpp"

namespace bbis {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

ChainRecord ram_chain(const TargetBundle& target, Index n, std::uint64_t seed,
                      const RamOptions& options) {
  if (n < 1) throw std::invalid_argument("chain length must be positive");
  if (!target.log_gamma) throw std::invalid_argument("target has no log density");
  const Index p = target.dim;

  Rng rng(seed);
  Vector x = options.init ? *options.init : rng.normal_vector(p);
  double lg_x = target.log_gamma(x);
  if (!std::isfinite(lg_x)) throw std::invalid_argument("invalid initialization");

  ChainRecord rec;
  rec.seed = seed;
  rec.initial_state = x;
  rec.proposals.resize(n, p);
  rec.accepted.resize(n, p);
  rec.accept_flags.assign(n, 0);
  rec.log_gamma_values.resize(n);

  // Proposal shape factor kept as a Cholesky factorization of S S^T so the
  // rank-one adaptation stays O(p^2) per step.
  Matrix cov = options.initial_scale * options.initial_scale *
               Matrix::Identity(p, p);
  Eigen::LLT<Matrix> llt(cov);

  for (Index i = 0; i < n; ++i) {
    const Vector u = rng.normal_vector(p);
    const Matrix s_factor = llt.matrixL();
    const Vector y = x + s_factor * u;
    const double lg_y = target.log_gamma(y);

    double alpha = 0.0;
    if (lg_y == kNegInf) {
      alpha = 0.0;
    } else {
      alpha = std::min(1.0, std::exp(lg_y - lg_x));
    }

    rec.proposals.row(i) = y;
    rec.log_gamma_values[i] = lg_y;
    if (rng.uniform() < alpha) {
      rec.accept_flags[i] = 1;
      x = y;
      lg_x = lg_y;
    }
    rec.accepted.row(i) = x;

    if (options.adapt) {
      // S S^T <- S (I + eta_i (alpha - alpha*) u u^T / ||u||^2) S^T
      const double u_norm2 = u.squaredNorm();
      if (u_norm2 > 0.0) {
        const double eta =
            std::min(1.0, double(p) * std::pow(double(i + 1),
                                               -options.decay_exponent));
        const double c = eta * (alpha - options.target_accept);
        const Vector dir = s_factor * (u / std::sqrt(u_norm2));
        Eigen::LLT<Matrix> updated = llt;
        updated.rankUpdate(dir, c);
        if (updated.info() == Eigen::Success) {
          llt = std::move(updated);
        }  // else: skip this adaptation step; the factor stays valid
      }
    }
  }
  return rec;
}

Vector discrete_conditional(const TargetBundle& target, double x1, double x2,
                            int levels) {
  Vector lg(levels);
  Vector v(3);
  for (int k = 0; k < levels; ++k) {
    v << x1, x2, double(k);
    lg[k] = target.log_gamma(v);
  }
  const double lse = log_sum_exp(lg);
  if (!std::isfinite(lse)) {
    throw std::runtime_error("discrete conditional is degenerate");
  }
  return (lg.array() - lse).exp();
}

ChainRecord gibbs_mixed_chain(const TargetBundle& target, Index n,
                              std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("chain length must be positive");
  if (target.dim != 3) throw std::invalid_argument("expected a 3-column mixed target");

  Rng rng(seed);
  Vector state(3);
  state << rng.uniform(), rng.uniform(), double(rng.uniform_int(0, 3));
  double lg = target.log_gamma(state);
  if (!std::isfinite(lg)) throw std::invalid_argument("invalid initialization");

  ChainRecord rec;
  rec.seed = seed;
  rec.initial_state = state;
  rec.proposals.resize(n, 3);
  rec.accepted.resize(n, 3);
  rec.accept_flags.assign(n, 0);
  rec.log_gamma_values.resize(n);

  const double step_sd = 0.1;
  for (Index i = 0; i < n; ++i) {
    if (i % 2 == 0) {
      // Random-walk MH on the continuous pair at the current level.
      Vector prop = state;
      prop[0] += step_sd * rng.normal();
      prop[1] += step_sd * rng.normal();
      const double lg_prop = target.log_gamma(prop);
      const double alpha =
          lg_prop == kNegInf ? 0.0 : std::min(1.0, std::exp(lg_prop - lg));
      rec.proposals.row(i) = prop;
      rec.log_gamma_values[i] = lg_prop;
      if (rng.uniform() < alpha) {
        rec.accept_flags[i] = 1;
        state = prop;
        lg = lg_prop;
      }
    } else {
      // Exact draw of the level from its conditional; always accepted.
      const Vector probs = discrete_conditional(target, state[0], state[1]);
      const double u = rng.uniform();
      double acc = 0.0;
      int level = int(probs.size()) - 1;
      for (int k = 0; k < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc) {
          level = k;
          break;
        }
      }
      state[2] = double(level);
      lg = target.log_gamma(state);
      rec.proposals.row(i) = state;
      rec.log_gamma_values[i] = lg;
      rec.accept_flags[i] = 1;
    }
    rec.accepted.row(i) = state;
  }
  return rec;
}

WeightedSampleSet self_normalized_is(const TargetBundle& target, Index m,
                                     std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("sample count must be positive");
  if (target.dim != 3) throw std::invalid_argument("expected a 3-column mixed target");

  Rng rng(seed);
  WeightedSampleSet ws;
  ws.samples.resize(m, 3);
  Vector lg(m);
  for (Index i = 0; i < m; ++i) {
    ws.samples(i, 0) = rng.uniform();
    ws.samples(i, 1) = rng.uniform();
    ws.samples(i, 2) = double(rng.uniform_int(0, 3));
    lg[i] = target.log_gamma(ws.samples.row(i).transpose());
  }

  // Flat prior proposal: weights are proportional to exp(log posterior).
  const double lse = log_sum_exp(lg);
  if (!std::isfinite(lse)) {
    throw std::runtime_error("all importance weights are zero");
  }
  ws.weights = (lg.array() - lse).exp();
  ws.weights /= ws.weights.sum();
  return ws;
}

}  // namespace bbis

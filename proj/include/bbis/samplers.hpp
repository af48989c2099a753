#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bbis/metrics.hpp"
#include "bbis/targets.hpp"
#include "bbis/types.hpp"

namespace bbis {

//! One MCMC run: every proposed point in order, the chain state after each
//! step, acceptance flags, and the log density at each proposal.
struct ChainRecord {
  Matrix proposals;
  Matrix accepted;
  std::vector<std::uint8_t> accept_flags;
  Vector log_gamma_values;  // at proposals; -inf proposals are valid records
  std::uint64_t seed = 0;
  Vector initial_state;

  Index size() const { return proposals.rows(); }
};

struct RamOptions {
  std::optional<Vector> init;   // default: seeded N(0, I) draw
  double initial_scale = 1.0;   // proposal shape starts at initial_scale * I
  bool adapt = true;            // false reduces to fixed random-walk Metropolis
  double target_accept = 0.234;
  double decay_exponent = 2.0 / 3.0;  // eta_i = min(1, p * i^-decay_exponent)
};

//! Robust adaptive Metropolis: proposes y = x + S u with u ~ N(0, I) and
//! updates S S^T <- S (I + eta_i (alpha - alpha*) u u^T / ||u||^2) S^T by a
//! rank-one Cholesky update. Throws "invalid initialization" when the
//! starting point has zero density.
ChainRecord ram_chain(const TargetBundle& target, Index n, std::uint64_t seed,
                      const RamOptions& options = {});

//! Gibbs-type sampler for the mixed calibration posterior. Each sweep is two
//! recorded sub-steps: (i) random-walk MH on (x1, x2) with fixed
//! N(0, 0.1^2 I) increments at the current rho, (ii) an exact draw of rho
//! from its conditional over {0,1,2,3} (always accepted). `n` counts recorded
//! sub-steps, so n = 2 * sweeps.
ChainRecord gibbs_mixed_chain(const TargetBundle& target, Index n,
                              std::uint64_t seed);

//! Conditional distribution of the discrete level given the continuous
//! coordinates, normalized over {0, ..., levels-1} via log-sum-exp.
Vector discrete_conditional(const TargetBundle& target, double x1, double x2,
                            int levels = 4);

//! Self-normalized importance sampling with the calibration prior
//! (x1, x2 ~ U[0,1], rho ~ U{0..3}) as the proposal. Ground truth for the
//! mixed-variable experiment.
WeightedSampleSet self_normalized_is(const TargetBundle& target, Index m,
                                     std::uint64_t seed);

}  // namespace bbis

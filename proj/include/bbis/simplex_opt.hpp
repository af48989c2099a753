#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bbis/types.hpp"

namespace bbis {

enum class StepRule { kFixedFromSpectralBound, kBacktracking };

struct QPConfig {
  int max_iters = 5000;
  double tol = 1e-8;  // relative objective decrease
  StepRule step_rule = StepRule::kFixedFromSpectralBound;
  int power_iters = 50;
};

struct QPResult {
  Vector weights;
  std::vector<double> objective_trace;  // non-increasing, starts at f(w0)
  int iterations = 0;
  bool converged = false;
};

//! Euclidean projection onto the probability simplex via the sorted-threshold
//! construction: w = max(v - theta, 0) with theta chosen so sum(w) = 1.
//! Ties are resolved by stable sort, so the output is deterministic.
Vector project_to_simplex(const Vector& v);

//! Projected gradient descent for min_{w in simplex} w^T Q w with Q symmetric
//! PSD given as a matrix-vector product. The fixed step is 1/(2*L) with L a
//! power-iteration upper bound on the spectral norm (inflated by 1%);
//! backtracking halves the step until the objective decreases. A new iterate
//! is accepted only if it does not increase the objective, so the recorded
//! trace is non-increasing by construction.
QPResult minimize_quadratic_on_simplex(
    const std::function<Vector(const Vector&)>& apply_Q, Index n,
    const Vector& w0, const QPConfig& cfg = {});

//! Convenience overload for a dense Q.
QPResult minimize_quadratic_on_simplex(const Matrix& Q, const Vector& w0,
                                       const QPConfig& cfg = {});

}  // namespace bbis

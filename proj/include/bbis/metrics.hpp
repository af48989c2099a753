#pragma once

#include <cstdint>

#include "bbis/types.hpp"

namespace bbis {

struct WeightedSampleSet {
  Matrix samples;
  Vector weights;
};

struct ReferenceSet {
  Matrix samples;  // M x p, drawn from the target
};

//! Known moments of a target: E[X], E[diag(X X^T)], E[sin(1^T X)].
struct Moments {
  Vector mean;
  Vector diag_second;
  double sin_moment = 0.0;
};

struct MomentErrors {
  double mean_sq_err = 0.0;  // ||sum w_i x_i - E X||^2 / p
  double diag_sq_err = 0.0;  // ||sum w_i diag(x_i x_i^T) - E diag||^2 / p
  double sin_sq_err = 0.0;   // (sum w_i sin(1^T x_i) - E sin(1^T X))^2
};

//! (2/M) sum_i sum_m w_i ||x_i - y_m|| - sum_i sum_j w_i w_j ||x_i - x_j||.
//! Exact double sums, Euclidean norm.
double energy_distance_simplified(const WeightedSampleSet& ws,
                                  const ReferenceSet& ref);

//! Simplified value minus the plug-in mean pairwise reference distance
//! (1/M^2) sum_{m != m'} ||y_m - y_m'||, i.e. the energy distance between the
//! two empirical measures; nonnegative up to rounding and exactly 0 when the
//! weighted set is the reference itself with uniform weights. For large M the
//! pair term averages at most `max_pairs` seeded random distinct pairs.
double energy_distance_full(const WeightedSampleSet& ws, const ReferenceSet& ref,
                            std::uint64_t pair_subsample_seed = 0x9e3779b97f4a7c15ULL,
                            std::int64_t max_pairs = 2000000);

MomentErrors weighted_moment_errors(const WeightedSampleSet& ws,
                                    const Moments& truth);

}  // namespace bbis

#include "bbis/metrics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "bbis/util.hpp"

namespace bbis {

namespace {

void check_pair(const WeightedSampleSet& ws, const ReferenceSet& ref) {
  check_samples(ws.samples);
  check_samples(ref.samples);
  if (ws.weights.size() != ws.samples.rows()) {
    throw std::invalid_argument("dimension mismatch");
  }
  if (ws.samples.cols() != ref.samples.cols()) {
    throw std::invalid_argument("dimension mismatch");
  }
  check_weights(ws.weights);
}

}  // namespace

double energy_distance_simplified(const WeightedSampleSet& ws,
                                  const ReferenceSet& ref) {
  check_pair(ws, ref);
  const Index n = ws.samples.rows();
  const Index big_m = ref.samples.rows();

  const double cross = parallel_block_sum(n, [&](Index i) {
    double row = 0.0;
    for (Index m = 0; m < big_m; ++m) {
      row += (ws.samples.row(i) - ref.samples.row(m)).norm();
    }
    return ws.weights[i] * row;
  });

  const double self = parallel_block_sum(n, [&](Index i) {
    double row = 0.0;
    for (Index j = 0; j < i; ++j) {
      row += ws.weights[j] * (ws.samples.row(i) - ws.samples.row(j)).norm();
    }
    return 2.0 * ws.weights[i] * row;  // off-diagonal pairs; diagonal is zero
  });

  return 2.0 / double(big_m) * cross - self;
}

double energy_distance_full(const WeightedSampleSet& ws, const ReferenceSet& ref,
                            std::uint64_t pair_subsample_seed,
                            std::int64_t max_pairs) {
  const Index big_m = ref.samples.rows();
  if (big_m < 2) throw std::invalid_argument("reference needs at least 2 rows");

  const double simplified = energy_distance_simplified(ws, ref);

  // Mean pairwise distance over ordered reference pairs, (1/M^2) sum_{m != m'}.
  // This is the plug-in normalization, so the full value is the energy
  // distance between the two empirical measures: nonnegative and exactly zero
  // when the weighted set reproduces the reference.
  const std::int64_t total_pairs =
      static_cast<std::int64_t>(big_m) * (big_m - 1) / 2;
  double pair_term;
  if (total_pairs <= max_pairs) {
    const double sum = parallel_block_sum(big_m, [&](Index m) {
      double row = 0.0;
      for (Index k = 0; k < m; ++k) {
        row += (ref.samples.row(m) - ref.samples.row(k)).norm();
      }
      return row;
    });
    pair_term = 2.0 * sum / (double(big_m) * double(big_m));
  } else {
    // ws-independent constant: estimate the mean distinct-pair distance from
    // a seeded subsample and apply the same (M-1)/M plug-in normalization.
    std::mt19937_64 rng(pair_subsample_seed);
    std::uniform_int_distribution<Index> pick(0, big_m - 1);
    double sum = 0.0;
    std::int64_t count = 0;
    while (count < max_pairs) {
      const Index a = pick(rng);
      const Index b = pick(rng);
      if (a == b) continue;
      sum += (ref.samples.row(a) - ref.samples.row(b)).norm();
      ++count;
    }
    pair_term = (sum / double(max_pairs)) * double(big_m - 1) / double(big_m);
  }

  return simplified - pair_term;
}

MomentErrors weighted_moment_errors(const WeightedSampleSet& ws,
                                    const Moments& truth) {
  check_samples(ws.samples);
  check_weights(ws.weights);
  const Index p = ws.samples.cols();
  if (truth.mean.size() != p || truth.diag_second.size() != p) {
    throw std::invalid_argument("moment record does not match dimension");
  }

  const Vector mean_hat = ws.samples.transpose() * ws.weights;
  const Vector diag_hat =
      ws.samples.array().square().matrix().transpose() * ws.weights;
  double sin_hat = 0.0;
  for (Index i = 0; i < ws.samples.rows(); ++i) {
    sin_hat += ws.weights[i] * std::sin(ws.samples.row(i).sum());
  }

  MomentErrors err;
  err.mean_sq_err = (mean_hat - truth.mean).squaredNorm() / double(p);
  err.diag_sq_err = (diag_hat - truth.diag_second).squaredNorm() / double(p);
  err.sin_sq_err = std::pow(sin_hat - truth.sin_moment, 2);
  return err;
}

}  // namespace bbis

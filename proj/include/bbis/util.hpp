#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "bbis/types.hpp"

namespace bbis {

//! Seeded random number generator shared by samplers and experiments.
//! A thin wrapper around std::mt19937_64 so call sites stay terse.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  //! Uniform on [0, 1).
  double uniform() { return unif_(engine_); }

  //! Standard normal draw.
  double normal() { return norm_(engine_); }

  //! Uniform integer on {lo, ..., hi} inclusive.
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

  Vector normal_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Matrix normal_matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

//! Derives an independent stream seed for a replicate/chain index from a base
//! seed. splitmix64 of (base xor odd-constant * (index+1)); documented so that
//! runs are reproducible across machines.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

//! log(sum(exp(v))) computed against the max entry. Returns -inf for
//! all -inf input.
double log_sum_exp(const Vector& v);

//! Number of worker threads used by parallel loops. Defaults to the
//! BBIS_THREADS environment variable, else std::thread::hardware_concurrency.
int num_threads();
void set_num_threads(int n);

//! Runs fn(block_begin, block_end) over [begin, end) split into fixed-size
//! blocks. Block boundaries depend only on the range, never on the thread
//! count, so per-block outputs (and any block-ordered reduction done by the
//! caller) are identical for any schedule.
void parallel_for_blocks(Index begin, Index end,
                         const std::function<void(Index, Index)>& fn,
                         Index block = 256);

//! Block-ordered parallel sum of fn over [0, n): partial sums are computed
//! per fixed-size block and combined sequentially in block order.
double parallel_block_sum(Index n, const std::function<double(Index)>& fn,
                          Index block = 256);

}  // namespace bbis

#include "bbis/util.hpp"

#include <atomic>
#include <cstdlib>
#include <limits>
#include <thread>

namespace bbis {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over base xor a distinct odd multiple of the index.
  std::uint64_t z = base ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or an inf/NaN propagates)
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

namespace {

int resolve_default_threads() {
  if (const char* env = std::getenv("BBIS_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int> g_threads{0};  // 0 = not yet resolved

}  // namespace

int num_threads() {
  int n = g_threads.load(std::memory_order_relaxed);
  if (n == 0) {
    n = resolve_default_threads();
    g_threads.store(n, std::memory_order_relaxed);
  }
  return n;
}

void set_num_threads(int n) {
  g_threads.store(n < 1 ? 1 : n, std::memory_order_relaxed);
}

void parallel_for_blocks(Index begin, Index end,
                         const std::function<void(Index, Index)>& fn,
                         Index block) {
  if (end <= begin) return;
  const Index n_blocks = (end - begin + block - 1) / block;
  const int workers = std::min<Index>(num_threads(), n_blocks);
  if (workers <= 1) {
    for (Index b = 0; b < n_blocks; ++b) {
      const Index lo = begin + b * block;
      fn(lo, std::min(end, lo + block));
    }
    return;
  }
  std::atomic<Index> next{0};
  auto work = [&] {
    for (;;) {
      const Index b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= n_blocks) return;
      const Index lo = begin + b * block;
      fn(lo, std::min(end, lo + block));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
}

double parallel_block_sum(Index n, const std::function<double(Index)>& fn,
                          Index block) {
  if (n <= 0) return 0.0;
  const Index n_blocks = (n + block - 1) / block;
  std::vector<double> partial(n_blocks, 0.0);
  parallel_for_blocks(
      0, n,
      [&](Index lo, Index hi) {
        double s = 0.0;
        for (Index i = lo; i < hi; ++i) s += fn(i);
        partial[lo / block] = s;
      },
      block);
  double total = 0.0;
  for (double s : partial) total += s;  // fixed block order
  return total;
}

}  // namespace bbis

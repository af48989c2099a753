#include "bbis/ksd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "bbis/util.hpp"

namespace bbis {

double median_heuristic(const Matrix& samples) {
  check_samples(samples);
  const Index n = samples.rows();
  if (n < 2) throw std::invalid_argument("insufficient samples");

  std::vector<double> dists;
  dists.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      dists.push_back((samples.row(i) - samples.row(j)).norm());
    }
  }

  const size_t m = dists.size();
  const size_t mid = m / 2;
  std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
  double med = dists[mid];
  if (m % 2 == 0) {
    // mean of the two central order statistics
    const double lower = *std::max_element(dists.begin(), dists.begin() + mid);
    med = 0.5 * (lower + med);
  }
  if (med <= 0.0) throw std::runtime_error("degenerate sample set");
  return med;
}

SteinMatrix stein_kernel_matrix(const Matrix& samples, const Matrix& scores,
                                double ell) {
  check_samples(samples);
  if (scores.rows() != samples.rows() || scores.cols() != samples.cols()) {
    throw std::invalid_argument("dimension mismatch");
  }
  if (!(ell > 0.0)) throw std::invalid_argument("bandwidth must be positive");

  const Index n = samples.rows();
  const double p = double(samples.cols());
  const double inv_ell2 = 1.0 / (ell * ell);

  SteinMatrix sm;
  sm.bandwidth = ell;
  sm.entries.resize(n, n);

  parallel_for_blocks(0, n, [&](Index lo, Index hi) {
    for (Index i = lo; i < hi; ++i) {
      const auto xi = samples.row(i);
      const auto si = scores.row(i);
      for (Index j = 0; j <= i; ++j) {
        const auto diff = xi - samples.row(j);
        const double r2 = diff.squaredNorm() * inv_ell2;
        const double b = 1.0 / std::sqrt(1.0 + r2);
        const double b3 = b * b * b;
        const double b5 = b3 * b * b;
        const double v = si.dot(scores.row(j)) * b +
                         (si - scores.row(j)).dot(diff) * inv_ell2 * b3 +
                         p * inv_ell2 * b3 - 3.0 * r2 * inv_ell2 * b5;
        sm.entries(i, j) = v;
        sm.entries(j, i) = v;
      }
    }
  });
  return sm;
}

KsdResult ksd_weights(const Matrix& samples, const ScoreFn& score,
                      const QPConfig& qp) {
  check_samples(samples);
  if (!score) throw std::invalid_argument("score function required");

  const Index n = samples.rows();
  KsdResult result;
  if (n == 1) {
    result.weights = Vector::Ones(1);
    result.qp.weights = result.weights;
    result.qp.objective_trace = {0.0};
    result.qp.converged = true;
    return result;
  }

  Matrix scores(n, samples.cols());
  for (Index i = 0; i < n; ++i) {
    scores.row(i) = score(samples.row(i).transpose());
  }
  if (!scores.allFinite()) {
    throw std::runtime_error("score evaluated to a non-finite value");
  }

  result.bandwidth = median_heuristic(samples);
  const SteinMatrix sm = stein_kernel_matrix(samples, scores, result.bandwidth);

  const Vector w0 = Vector::Constant(n, 1.0 / double(n));
  result.qp = minimize_quadratic_on_simplex(sm.entries, w0, qp);
  result.weights = result.qp.weights;
  return result;
}

}  // namespace bbis

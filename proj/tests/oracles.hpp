// Independent reference computations used to pin expected values. These stay
// deliberately brute-force and share no code with the library paths they
// check.
#pragma once

#include <cmath>
#include <random>
#include <stdexcept>

#include "bbis/types.hpp"

namespace oracles {

using bbis::Index;
using bbis::Matrix;
using bbis::Vector;

//! Exhaustive grid search of min w^T Q w over the 3-simplex with the given
//! step. Returns the best grid point.
inline Vector grid_min_simplex3(const Matrix& Q, double step = 1e-3) {
  if (Q.rows() != 3 || Q.cols() != 3) {
    throw std::invalid_argument("grid oracle is for n = 3");
  }
  const int m = int(std::lround(1.0 / step));
  Vector best(3);
  double best_val = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= m; ++a) {
    for (int b = 0; b <= m - a; ++b) {
      const double w0 = double(a) * step;
      const double w1 = double(b) * step;
      const double w2 = 1.0 - w0 - w1;
      const double val = Q(0, 0) * w0 * w0 + Q(1, 1) * w1 * w1 +
                         Q(2, 2) * w2 * w2 + 2.0 * Q(0, 1) * w0 * w1 +
                         2.0 * Q(0, 2) * w0 * w2 + 2.0 * Q(1, 2) * w1 * w2;
      if (val < best_val) {
        best_val = val;
        best << w0, w1, w2;
      }
    }
  }
  return best;
}

//! KKT conditions for the Euclidean projection of v onto the simplex:
//! feasibility, a common multiplier on the active set, and v_i <= theta off it.
inline bool satisfies_projection_kkt(const Vector& v, const Vector& w,
                                     double tol = 1e-9) {
  if ((w.array() < -tol).any()) return false;
  if (std::abs(w.sum() - 1.0) > 1e-9) return false;
  double theta = 0.0;
  bool have_theta = false;
  for (Index i = 0; i < w.size(); ++i) {
    if (w[i] > tol) {
      const double t = v[i] - w[i];
      if (!have_theta) {
        theta = t;
        have_theta = true;
      } else if (std::abs(t - theta) > tol) {
        return false;
      }
    }
  }
  if (!have_theta) return false;
  for (Index i = 0; i < w.size(); ++i) {
    if (w[i] <= tol && v[i] > theta + tol) return false;
  }
  return true;
}

//! Central finite differences of a scalar function.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

//! Random symmetric PSD matrix A^T A with entries from N(0, 1).
inline Matrix random_psd(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = gauss(rng);
  return a.transpose() * a;
}

}  // namespace oracles

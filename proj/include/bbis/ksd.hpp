#pragma once

#include <functional>

#include "bbis/simplex_opt.hpp"
#include "bbis/types.hpp"

namespace bbis {

using ScoreFn = std::function<Vector(const Vector&)>;

struct SteinMatrix {
  Matrix entries;
  double bandwidth = 0.0;
};

//! Median of the n(n-1)/2 pairwise Euclidean distances (mean of the two
//! central order statistics for an even count). Raw samples, no
//! standardization. Throws "degenerate sample set" if the median is zero.
double median_heuristic(const Matrix& samples);

//! Stein kernel matrix for the inverse multiquadric base kernel
//! k(x,x') = (1 + ||x-x'||^2 / ell^2)^(-1/2). With u = (x-x')/ell^2,
//! r2 = ||x-x'||^2/ell^2 and b = (1+r2)^(-1/2):
//!   k_pi(x,x') = (s.s') b + ((s-s').(x-x'))/ell^2 * b^3
//!                + p b^3/ell^2 - 3 (r2/ell^2) b^5,
//! where s, s' are the precomputed score rows. The closed forms are gated by
//! a finite-difference test against the base kernel.
SteinMatrix stein_kernel_matrix(const Matrix& samples, const Matrix& scores,
                                double ell);

struct KsdResult {
  Vector weights;
  QPResult qp;
  double bandwidth = 0.0;
};

//! Stein importance weights: median-heuristic bandwidth, Stein kernel matrix,
//! simplex QP from a uniform start. Scores are evaluated once per sample.
KsdResult ksd_weights(const Matrix& samples, const ScoreFn& score,
                      const QPConfig& qp = {});

}  // namespace bbis

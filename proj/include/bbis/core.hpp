#pragma once

#include "bbis/types.hpp"

namespace bbis {

//! Column-wise affine transform x -> (x - mean) / scale fitted on a sample
//! matrix. Scales use the n-1 standard deviation; constant columns get
//! scale 1 so degenerate coordinates pass through unchanged.
struct StandardizationTransform {
  Vector means;
  Vector scales;

  Matrix apply(const Matrix& samples) const;
  Matrix invert(const Matrix& standardized) const;
};

//! Fits the transform and returns it with the standardized matrix.
//! Requires n >= 2 ("insufficient samples") and finite entries
//! ("non-finite input").
std::pair<StandardizationTransform, Matrix> standardize(const Matrix& samples);

//! Mahalanobis metric from the sample covariance (n-1 divisor) plus
//! jitter * I. Holds the Cholesky factor so quadratic forms
//! (x-y)^T Sigma^-1 (x-y) reduce to squared norms of whitened differences.
class MahalanobisMetric {
 public:
  MahalanobisMetric(Matrix covariance, double jitter_used);

  double squared_distance(const Vector& x, const Vector& y) const;

  //! Rows of `samples` mapped through L^-1 so that squared Euclidean
  //! distances of the result equal Mahalanobis squared distances.
  Matrix whiten(const Matrix& samples) const;

  const Matrix& covariance() const { return covariance_; }
  double jitter() const { return jitter_; }
  Index dim() const { return covariance_.rows(); }

 private:
  Matrix covariance_;
  Eigen::LLT<Matrix> llt_;
  double jitter_;
};

//! Estimates the metric from samples. If the covariance (plus the requested
//! jitter) does not factor, the jitter is escalated x10 starting from 1e-10
//! until factorization succeeds; past 1e-2 the covariance is declared
//! degenerate ("degenerate covariance").
MahalanobisMetric mahalanobis_metric(const Matrix& samples, double jitter = 1e-10);

//! n x n matrix of pairwise Mahalanobis squared distances. Symmetric with an
//! exactly zero diagonal; entries are computed independently so results do
//! not depend on the parallel schedule.
Matrix pairwise_sq_dist(const Matrix& samples, const MahalanobisMetric& metric);

}  // namespace bbis

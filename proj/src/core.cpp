#include "bbis/core.hpp"

#include <cmath>
#include <stdexcept>

#include "bbis/util.hpp"

namespace bbis {

Matrix StandardizationTransform::apply(const Matrix& samples) const {
  Matrix out = samples.rowwise() - means.transpose();
  out.array().rowwise() /= scales.transpose().array();
  return out;
}

Matrix StandardizationTransform::invert(const Matrix& standardized) const {
  Matrix out = standardized.array().rowwise() * scales.transpose().array();
  out.rowwise() += means.transpose();
  return out;
}

std::pair<StandardizationTransform, Matrix> standardize(const Matrix& samples) {
  if (samples.rows() < 2) throw std::invalid_argument("insufficient samples");
  check_samples(samples);

  const Index n = samples.rows();
  StandardizationTransform t;
  t.means = samples.colwise().mean();
  const Matrix centered = samples.rowwise() - t.means.transpose();
  t.scales =
      (centered.array().square().colwise().sum() / double(n - 1)).sqrt();
  for (Index j = 0; j < t.scales.size(); ++j) {
    if (t.scales[j] < 1e-12) t.scales[j] = 1.0;  // constant column
  }
  return {t, t.apply(samples)};
}

MahalanobisMetric::MahalanobisMetric(Matrix covariance, double jitter_used)
    : covariance_(std::move(covariance)), jitter_(jitter_used) {
  llt_.compute(covariance_);
  if (llt_.info() != Eigen::Success) {
    throw std::runtime_error("degenerate covariance");
  }
}

double MahalanobisMetric::squared_distance(const Vector& x, const Vector& y) const {
  if (x.size() != dim() || y.size() != dim()) {
    throw std::invalid_argument("dimension mismatch");
  }
  const Vector z = llt_.matrixL().solve(x - y);
  return z.squaredNorm();
}

Matrix MahalanobisMetric::whiten(const Matrix& samples) const {
  if (samples.cols() != dim()) {
    throw std::invalid_argument("dimension mismatch");
  }
  // rows z_i = L^-1 x_i, so ||z_i - z_j||^2 = (x_i-x_j)^T Sigma^-1 (x_i-x_j)
  return llt_.matrixL().solve(samples.transpose()).transpose();
}

MahalanobisMetric mahalanobis_metric(const Matrix& samples, double jitter) {
  if (samples.rows() < 2) throw std::invalid_argument("insufficient samples");
  check_samples(samples);

  const Index n = samples.rows();
  const Matrix centered = samples.rowwise() - samples.colwise().mean();
  const Matrix cov = centered.transpose() * centered / double(n - 1);
  const Matrix eye = Matrix::Identity(cov.rows(), cov.cols());

  double j = jitter;
  for (;;) {
    Eigen::LLT<Matrix> llt(cov + j * eye);
    if (llt.info() == Eigen::Success) {
      // A successful pivot sequence can still hide a semi-definite direction;
      // require the implied quadratic form to be comfortably positive.
      const double min_pivot = Matrix(llt.matrixL()).diagonal().minCoeff();
      const double scale = cov.diagonal().maxCoeff() + j;
      if (min_pivot * min_pivot > 1e-14 * scale) {
        return MahalanobisMetric(cov + j * eye, j);
      }
    }
    j = (j == 0.0) ? 1e-10 : j * 10.0;
    if (j > 1e-2) throw std::runtime_error("degenerate covariance");
  }
}

Matrix pairwise_sq_dist(const Matrix& samples, const MahalanobisMetric& metric) {
  if (samples.cols() != metric.dim()) {
    throw std::invalid_argument("dimension mismatch");
  }
  const Index n = samples.rows();
  const Matrix z = metric.whiten(samples);
  // ||zi - zj||^2 = ||zi||^2 + ||zj||^2 - 2 zi.zj via one GEMM; cancellation
  // can leave tiny negatives, clamped to 0. Entries are mirrored from the
  // lower triangle so the matrix is exactly symmetric with a zero diagonal,
  // independent of the block schedule.
  const Matrix gram = z * z.transpose();
  const Vector sq_norms = gram.diagonal();
  Matrix d2(n, n);
  parallel_for_blocks(0, n, [&](Index lo, Index hi) {
    for (Index i = lo; i < hi; ++i) {
      d2(i, i) = 0.0;
      for (Index j = 0; j < i; ++j) {
        const double v =
            std::max(0.0, sq_norms[i] + sq_norms[j] - 2.0 * gram(i, j));
        d2(i, j) = v;
        d2(j, i) = v;
      }
    }
  });
  return d2;
}

}  // namespace bbis

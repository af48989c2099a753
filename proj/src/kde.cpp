#include "bbis/kde.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bbis/util.hpp"

namespace bbis {

double rot_bandwidth(const Matrix& samples) {
  check_samples(samples);
  const Index n = samples.rows();
  if (n < 2) throw std::invalid_argument("insufficient samples");
  const double p = double(samples.cols());

  const Matrix centered = samples.rowwise() - samples.colwise().mean();
  const Vector sds =
      (centered.array().square().colwise().sum() / double(n - 1)).sqrt();
  const double sigma_hat = sds.mean();
  if (sigma_hat <= 0.0) throw std::runtime_error("degenerate sample set");

  const double num = p * std::pow(2.0, p + 5.0) * std::tgamma(p / 2.0 + 3.0);
  const double den = (2.0 * p + 1.0) * double(n);
  return sigma_hat * std::pow(num / den, 1.0 / (4.0 + p));
}

Vector loo_kde_log_density(const Matrix& samples, double h) {
  check_samples(samples);
  const Index n = samples.rows();
  if (n < 2) throw std::invalid_argument("insufficient samples");
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");

  const double p = double(samples.cols());
  const double inv_2h2 = 1.0 / (2.0 * h * h);
  const double log_norm =
      -std::log(double(n - 1)) - 0.5 * p * std::log(2.0 * M_PI * h * h);

  Vector out(n);
  parallel_for_blocks(0, n, [&](Index lo, Index hi) {
    Vector exponents(n - 1);
    for (Index i = lo; i < hi; ++i) {
      Index k = 0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        exponents[k++] =
            -(samples.row(i) - samples.row(j)).squaredNorm() * inv_2h2;
      }
      out[i] = log_norm + log_sum_exp(exponents);
    }
  });
  return out;
}

Vector loo_kde_density(const Matrix& samples, double h) {
  return loo_kde_log_density(samples, h).array().exp();
}

Vector kde_weights(const Matrix& samples, const Vector& log_gamma,
                   std::optional<double> h) {
  check_samples(samples);
  const Index n = samples.rows();
  if (log_gamma.size() != n) throw std::invalid_argument("dimension mismatch");

  const double bandwidth = h.value_or(rot_bandwidth(samples));
  const Vector log_q = loo_kde_log_density(samples, bandwidth);

  double lg_max = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    if (std::isnan(log_gamma[i]) ||
        log_gamma[i] == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("non-finite input");
    }
    lg_max = std::max(lg_max, log_gamma[i]);
  }
  if (!std::isfinite(lg_max)) {
    throw std::runtime_error("all samples have zero density");
  }

  // Re-center log_gamma at its max before mixing in log_q; additive shifts of
  // the input then cancel exactly and the weights are bitwise invariant.
  Vector log_ratio(n);
  for (Index i = 0; i < n; ++i) {
    log_ratio[i] = (log_gamma[i] - lg_max) - log_q[i];  // -inf stays -inf
  }

  const double lse = log_sum_exp(log_ratio);
  if (!std::isfinite(lse)) {
    throw std::runtime_error("all samples have zero density");
  }
  Vector w = (log_ratio.array() - lse).exp();
  w /= w.sum();  // tidy up the float sum to machine precision
  return w;
}

}  // namespace bbis

#pragma once

#include <optional>

#include "bbis/types.hpp"

namespace bbis {

//! Rule-of-thumb bandwidth
//!   h = sigma_hat * (p 2^(p+5) Gamma(p/2+3) / ((2p+1) n))^(1/(4+p)),
//! with sigma_hat the mean of the per-coordinate n-1 standard deviations.
double rot_bandwidth(const Matrix& samples);

//! log of the leave-one-out Gaussian KDE at each sample,
//! log q_i = log( (1/(n-1)) sum_{j != i} (2 pi h^2)^(-p/2) e^(-||xi-xj||^2/(2h^2)) ),
//! evaluated with log-sum-exp so well-separated points do not underflow.
Vector loo_kde_log_density(const Matrix& samples, double h);

//! exp of the above; positive for any sane input.
Vector loo_kde_density(const Matrix& samples, double h);

//! Self-normalized KDE importance weights w_i proportional to
//! exp(log_gamma_i - log q_i). -inf log_gamma gives weight exactly 0.
//! h defaults to rot_bandwidth(samples).
Vector kde_weights(const Matrix& samples, const Vector& log_gamma,
                   std::optional<double> h = std::nullopt);

}  // namespace bbis

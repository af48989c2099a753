#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bbis/metrics.hpp"
#include "bbis/types.hpp"
#include "bbis/util.hpp"

namespace bbis {

//! Everything a weighting method may ask of a target distribution. Only the
//! unnormalized log density is mandatory; score, exact sampler and moments
//! are present when the target supports them.
struct TargetBundle {
  Index dim = 0;
  std::function<double(const Vector&)> log_gamma;
  std::function<Vector(const Vector&)> score;          // empty if unavailable
  std::function<Matrix(Index, Rng&)> exact_sampler;    // empty if unavailable
  std::optional<Moments> moments;

  bool has_score() const { return static_cast<bool>(score); }
  bool has_sampler() const { return static_cast<bool>(exact_sampler); }
};

//! N(0, Sigma) with Sigma_ij = tau^|i-j|, tau in [0, 1).
TargetBundle gaussian_target(Index p, double tau);

//! Equal-weight mixture of unit-covariance Gaussians at the given centers
//! (one row per center).
TargetBundle mixture_target(const Matrix& centers);

//! Bayesian logistic regression posterior. `features` is N x (p-1); a leading
//! intercept column of ones is prepended. Labels must be -1/+1. The prior is
//! N(0, prior_var * I).
TargetBundle logistic_target(const Matrix& features,
                             const Eigen::VectorXi& labels,
                             double prior_var = 0.1);

struct LogisticData {
  Matrix features;
  Eigen::VectorXi labels;
};

//! Synthetic logistic dataset: features ~ N(0, I), true coefficients ~ N(0, I),
//! labels drawn from the model.
LogisticData make_synthetic_logistic(Index n_obs, Index n_features,
                                     std::uint64_t seed);

//! Reads a dataset CSV with a header row: feature columns followed by a
//! `label` column with -1/1 values (0/1 is accepted and mapped with a warning
//! on stderr).
LogisticData load_logistic_csv(const std::string& path);

//! Mixed continuous/discrete calibration posterior over (x1, x2, rho):
//! h(t) = x1 sin(2 pi (rho/7) t - pi) + x2 sin(2 pi (1 - rho/7) t - pi)
//! observed at 26 evenly spaced t in [0,1] with N(0, 0.2^2) noise generated
//! from `seed` at the true parameters (0.719, 0.552, rho=3). The posterior is
//! -(N/2) log sum_i (y_i - h(t_i))^2 plus flat priors: uniform [0,1] on
//! x1, x2 and uniform over rho in {0,1,2,3}. No score, by construction.
struct CalibrationProblem {
  TargetBundle bundle;      // dim = 3: columns (x1, x2, rho)
  Vector t_grid;
  Vector y_obs;
  double x1_true = 0.719;
  double x2_true = 0.552;
  int rho_true = 3;
};

CalibrationProblem calibration_target(std::uint64_t seed);

//! The calibration model response h(t; x1, x2, rho).
double calibration_model(double t, double x1, double x2, double rho);

//! Slice of the calibration posterior at fixed rho, as a 2-D bundle over
//! (x1, x2). Used to run one chain per discrete level.
TargetBundle calibration_slice(const CalibrationProblem& problem, int rho);

//! Discrete-column encoding for distance computation.
struct DiscreteSpec {
  enum class Kind { kOrdinal, kNominal };
  Index column = 0;
  Kind kind = Kind::kOrdinal;
  int levels = 2;  // values are expected in {0, ..., levels-1}
};

//! Ordinal columns keep their integer scores; a nominal column with L levels
//! expands to L-1 Helmert contrast columns scaled to unit norm, which places
//! the levels at the vertices of a regular simplex. Continuous columns pass
//! through. Unseen levels raise an error.
Matrix encode_discrete(const Matrix& samples,
                       const std::vector<DiscreteSpec>& specs);

}  // namespace bbis

#include "bbis/targets.hpp"

#include "bbis/io.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace bbis {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

TargetBundle gaussian_target(Index p, double tau) {
  if (p < 1) throw std::invalid_argument("dimension must be positive");
  if (tau < 0.0 || tau >= 1.0) throw std::invalid_argument("tau must be in [0, 1)");

  Matrix sigma(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      sigma(i, j) = std::pow(tau, std::abs(double(i - j)));
    }
  }
  auto llt = std::make_shared<Eigen::LLT<Matrix>>(sigma);
  if (llt->info() != Eigen::Success) {
    throw std::runtime_error("covariance factorization failed");
  }

  TargetBundle t;
  t.dim = p;
  t.log_gamma = [llt](const Vector& x) {
    return -0.5 * x.dot(llt->solve(x));
  };
  t.score = [llt](const Vector& x) -> Vector { return -llt->solve(x); };
  t.exact_sampler = [llt, p](Index n, Rng& rng) {
    const Matrix l = llt->matrixL();
    Matrix draws = rng.normal_matrix(n, p);
    return Matrix(draws * l.transpose());
  };
  Moments m;
  m.mean = Vector::Zero(p);
  m.diag_second = Vector::Ones(p);
  m.sin_moment = 0.0;  // odd symmetry
  t.moments = m;
  return t;
}

TargetBundle mixture_target(const Matrix& centers) {
  check_samples(centers);
  const Index k = centers.rows();
  const Index p = centers.cols();
  auto mu = std::make_shared<Matrix>(centers);

  TargetBundle t;
  t.dim = p;
  t.log_gamma = [mu](const Vector& x) {
    Vector comp(mu->rows());
    for (Index c = 0; c < mu->rows(); ++c) {
      comp[c] = -0.5 * (x - mu->row(c).transpose()).squaredNorm();
    }
    return log_sum_exp(comp);
  };
  t.score = [mu](const Vector& x) -> Vector {
    Vector comp(mu->rows());
    for (Index c = 0; c < mu->rows(); ++c) {
      comp[c] = -0.5 * (x - mu->row(c).transpose()).squaredNorm();
    }
    const double lse = log_sum_exp(comp);
    Vector s = Vector::Zero(x.size());
    for (Index c = 0; c < mu->rows(); ++c) {
      const double resp = std::exp(comp[c] - lse);
      s += resp * (mu->row(c).transpose() - x);
    }
    return s;
  };
  t.exact_sampler = [mu, p](Index n, Rng& rng) {
    Matrix draws(n, p);
    for (Index i = 0; i < n; ++i) {
      const int c = rng.uniform_int(0, int(mu->rows()) - 1);
      draws.row(i) = mu->row(c) + rng.normal_vector(p).transpose();
    }
    return draws;
  };
  Moments m;
  m.mean = centers.colwise().mean();
  m.diag_second =
      Vector::Ones(p) + centers.array().square().colwise().mean().matrix().transpose();
  double s = 0.0;
  for (Index c = 0; c < k; ++c) s += std::sin(centers.row(c).sum());
  m.sin_moment = std::exp(-double(p) / 2.0) * s / double(k);
  t.moments = m;
  return t;
}

TargetBundle logistic_target(const Matrix& features,
                             const Eigen::VectorXi& labels,
                             double prior_var) {
  check_samples(features);
  const Index n_obs = features.rows();
  if (labels.size() != n_obs) throw std::invalid_argument("dimension mismatch");
  for (Index i = 0; i < n_obs; ++i) {
    if (labels[i] != 1 && labels[i] != -1) {
      throw std::invalid_argument("labels must be -1 or 1");
    }
  }
  if (!(prior_var > 0.0)) throw std::invalid_argument("prior variance must be positive");

  // Design matrix with a leading intercept column, rows pre-scaled by y_i.
  auto yx = std::make_shared<Matrix>(n_obs, features.cols() + 1);
  for (Index i = 0; i < n_obs; ++i) {
    yx->coeffRef(i, 0) = double(labels[i]);
    yx->row(i).tail(features.cols()) = double(labels[i]) * features.row(i);
  }

  const auto softplus = [](double t) {  // log(1 + e^t), overflow-safe
    return t > 30.0 ? t : std::log1p(std::exp(t));
  };

  TargetBundle t;
  t.dim = features.cols() + 1;
  t.log_gamma = [yx, prior_var, softplus](const Vector& beta) {
    const Vector margins = (*yx) * beta;
    double loglik = 0.0;
    for (Index i = 0; i < margins.size(); ++i) loglik -= softplus(-margins[i]);
    return loglik - beta.squaredNorm() / (2.0 * prior_var);
  };
  t.score = [yx, prior_var](const Vector& beta) -> Vector {
    const Vector margins = (*yx) * beta;
    Vector probs(margins.size());
    for (Index i = 0; i < margins.size(); ++i) {
      probs[i] = 1.0 / (1.0 + std::exp(margins[i]));  // sigma(-margin)
    }
    return yx->transpose() * probs - beta / prior_var;
  };
  return t;
}

LogisticData make_synthetic_logistic(Index n_obs, Index n_features,
                                     std::uint64_t seed) {
  Rng rng(seed);
  LogisticData data;
  data.features = rng.normal_matrix(n_obs, n_features);
  const Vector beta_true = rng.normal_vector(n_features + 1);
  data.labels.resize(n_obs);
  for (Index i = 0; i < n_obs; ++i) {
    const double margin =
        beta_true[0] + data.features.row(i).dot(beta_true.tail(n_features));
    const double prob = 1.0 / (1.0 + std::exp(-margin));
    data.labels[i] = rng.uniform() < prob ? 1 : -1;
  }
  return data;
}

LogisticData load_logistic_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty dataset file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header.back() != "label") {
    throw ParseError("dataset must end with a 'label' column");
  }
  const size_t n_cols = header.size();

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != n_cols) throw ParseError("ragged dataset row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("dataset has no rows");

  LogisticData data;
  data.features.resize(Index(rows.size()), Index(n_cols - 1));
  data.labels.resize(Index(rows.size()));
  bool warned = false;
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j + 1 < n_cols; ++j) data.features(Index(i), Index(j)) = rows[i][j];
    const double y = rows[i][n_cols - 1];
    if (y == 1.0 || y == -1.0) {
      data.labels[Index(i)] = int(y);
    } else if (y == 0.0) {
      if (!warned) {
        std::cerr << "warning: mapping 0/1 labels to -1/1\n";
        warned = true;
      }
      data.labels[Index(i)] = -1;
    } else {
      throw ParseError("labels must be -1/1 (or 0/1)");
    }
  }
  return data;
}

double calibration_model(double t, double x1, double x2, double rho) {
  const double two_pi = 2.0 * M_PI;
  return x1 * std::sin(two_pi * (rho / 7.0) * t - M_PI) +
         x2 * std::sin(two_pi * (1.0 - rho / 7.0) * t - M_PI);
}

CalibrationProblem calibration_target(std::uint64_t seed) {
  CalibrationProblem prob;
  const Index n_obs = 26;
  prob.t_grid.resize(n_obs);
  prob.y_obs.resize(n_obs);
  Rng rng(seed);
  for (Index i = 0; i < n_obs; ++i) {
    prob.t_grid[i] = 0.04 * double(i);
    prob.y_obs[i] =
        calibration_model(prob.t_grid[i], prob.x1_true, prob.x2_true,
                          double(prob.rho_true)) +
        0.2 * rng.normal();
  }

  auto t_grid = std::make_shared<Vector>(prob.t_grid);
  auto y_obs = std::make_shared<Vector>(prob.y_obs);
  TargetBundle t;
  t.dim = 3;
  t.log_gamma = [t_grid, y_obs](const Vector& v) {
    const double x1 = v[0];
    const double x2 = v[1];
    const double rho = v[2];
    if (x1 < 0.0 || x1 > 1.0 || x2 < 0.0 || x2 > 1.0) return kNegInf;
    const double rho_round = std::round(rho);
    if (std::abs(rho - rho_round) > 1e-9 || rho_round < 0.0 || rho_round > 3.0) {
      return kNegInf;
    }
    double ss = 0.0;
    for (Index i = 0; i < t_grid->size(); ++i) {
      const double r =
          (*y_obs)[i] - calibration_model((*t_grid)[i], x1, x2, rho_round);
      ss += r * r;
    }
    return -0.5 * double(t_grid->size()) * std::log(std::max(ss, 1e-300));
  };
  prob.bundle = std::move(t);
  return prob;
}

TargetBundle calibration_slice(const CalibrationProblem& problem, int rho) {
  if (rho < 0 || rho > 3) throw std::invalid_argument("rho level out of range");
  TargetBundle full = problem.bundle;
  TargetBundle slice;
  slice.dim = 2;
  slice.log_gamma = [full, rho](const Vector& x) {
    Vector v(3);
    v << x[0], x[1], double(rho);
    return full.log_gamma(v);
  };
  return slice;
}

Matrix encode_discrete(const Matrix& samples,
                       const std::vector<DiscreteSpec>& specs) {
  check_samples(samples);
  const Index n = samples.rows();
  const Index p = samples.cols();

  std::vector<const DiscreteSpec*> by_col(p, nullptr);
  for (const auto& spec : specs) {
    if (spec.column < 0 || spec.column >= p) {
      throw std::invalid_argument("discrete spec column out of range");
    }
    if (spec.levels < 2) throw std::invalid_argument("levels must be >= 2");
    by_col[spec.column] = &spec;
  }

  Index out_cols = 0;
  for (Index j = 0; j < p; ++j) {
    const auto* spec = by_col[j];
    out_cols += (spec && spec->kind == DiscreteSpec::Kind::kNominal)
                    ? spec->levels - 1
                    : 1;
  }

  Matrix out(n, out_cols);
  Index col = 0;
  for (Index j = 0; j < p; ++j) {
    const auto* spec = by_col[j];
    if (!spec) {
      out.col(col++) = samples.col(j);
      continue;
    }
    // Validate levels for both kinds: integers within {0, ..., L-1}.
    Eigen::VectorXi levels(n);
    for (Index i = 0; i < n; ++i) {
      const double v = samples(i, j);
      const double r = std::round(v);
      if (std::abs(v - r) > 1e-9 || r < 0.0 || r >= double(spec->levels)) {
        throw std::invalid_argument("unseen discrete level");
      }
      levels[i] = int(r);
    }
    if (spec->kind == DiscreteSpec::Kind::kOrdinal) {
      for (Index i = 0; i < n; ++i) out(i, col) = double(levels[i]);
      ++col;
    } else {
      // Helmert contrasts, columns scaled to unit norm: contrast c compares
      // level c+1 against the mean of levels 0..c. The resulting level rows
      // sit at the vertices of a regular simplex (all pairs equidistant).
      const int l = spec->levels;
      Matrix contrasts = Matrix::Zero(l, l - 1);
      for (int c = 0; c < l - 1; ++c) {
        for (int r = 0; r <= c; ++r) contrasts(r, c) = -1.0;
        contrasts(c + 1, c) = double(c + 1);
        contrasts.col(c).normalize();
      }
      for (Index i = 0; i < n; ++i) {
        out.row(i).segment(col, l - 1) = contrasts.row(levels[i]);
      }
      col += l - 1;
    }
  }
  return out;
}

}  // namespace bbis

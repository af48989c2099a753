#pragma once

#include <vector>

#include "bbis/simplex_opt.hpp"
#include "bbis/types.hpp"

namespace bbis {

struct MedConfig {
  double k = 1.0;
  double delta = 0.01;
  QPConfig qp;
  bool filter_enabled = true;
  double jitter = 1e-10;  // forwarded to mahalanobis_metric
};

//! Energy matrix held in log space, shifted so the maximum entry is 0.
//! exp(log_entries) is the matrix the simplex QP minimizes over; the shift
//! (and the unknown normalizing constant) cancel in the argmin.
struct EnergyMatrix {
  Matrix log_entries;
  double stabilizer = 0.0;  // constant subtracted from the raw log entries
};

//! log R_ij = -k * ((g_i + g_j) / (2p) + log(d2_ij + delta) / 2), where g is
//! log_gamma re-centered at its max before any division. Re-centering first
//! keeps the result exactly invariant to constant shifts of log_gamma.
EnergyMatrix build_energy_matrix(const Vector& log_gamma, const Matrix& sq_dists,
                                 Index p, const MedConfig& cfg = {});

//! Indices i with log_gamma[i] >= nu, where
//! nu = max_j log_gamma[j] - p*(delta^-1/2 - ((20 sqrt(p))^2 + delta)^-1/2) - 1.
//! -inf entries are always dropped; the argmax is always retained. nu_out,
//! when non-null, receives the threshold.
std::vector<Index> low_density_filter(const Vector& log_gamma, Index p,
                                      double delta, double* nu_out = nullptr);

struct MedDiagnostics {
  double nu = 0.0;
  Index active_count = 0;
  double stabilizer = 0.0;
  double jitter_used = 0.0;
  bool filter_heuristic_for_k = false;  // nu formula is stated for k = 1 only
};

struct MedResult {
  Vector weights;  // full length; filtered indices carry weight exactly 0
  QPResult qp;     // solver output on the active subset
  MedDiagnostics diag;
};

//! Minimum-energy importance weights for arbitrary samples given their
//! unnormalized log densities: standardize, Mahalanobis pairwise distances,
//! low-density filter, energy matrix on the active set, simplex QP from a
//! uniform start, then scatter back with zeros at filtered indices.
MedResult med_weights(const Matrix& samples, const Vector& log_gamma,
                      const MedConfig& cfg = {});

}  // namespace bbis

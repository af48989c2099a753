#pragma once

#include <Eigen/Dense>

namespace bbis {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

//! Sample matrices are n x p: one row per sample, one column per coordinate.
//! Weight vectors are length-n, nonnegative, summing to one.

//! Throws std::invalid_argument("non-finite input") on NaN/Inf entries,
//! or if the matrix is empty.
void check_samples(const Matrix& samples);

//! True iff w is a valid point of the probability simplex:
//! all entries >= 0 and |sum - 1| <= sum_tol.
bool is_weight_vector(const Vector& w, double sum_tol = 1e-10);

void check_weights(const Vector& w, double sum_tol = 1e-10);

}  // namespace bbis

#include "bbis/types.hpp"

#include <stdexcept>

namespace bbis {

void check_samples(const Matrix& samples) {
  if (samples.rows() < 1 || samples.cols() < 1) {
    throw std::invalid_argument("insufficient samples");
  }
  if (!samples.allFinite()) {
    throw std::invalid_argument("non-finite input");
  }
}

bool is_weight_vector(const Vector& w, double sum_tol) {
  if (w.size() < 1 || !w.allFinite()) return false;
  if ((w.array() < 0.0).any()) return false;
  return std::abs(w.sum() - 1.0) <= sum_tol;
}

void check_weights(const Vector& w, double sum_tol) {
  if (!is_weight_vector(w, sum_tol)) {
    throw std::invalid_argument("invalid weight vector");
  }
}

}  // namespace bbis

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbis/types.hpp"

namespace bbis {

//! File/format problems, kept distinct from numerical failures so the CLI
//! can map them to different exit codes.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Samples CSV: header `x1,...,xp[,logdensity][,weight]`, one row per sample.
struct SamplesFile {
  Matrix samples;
  std::optional<Vector> log_density;
  std::optional<Vector> weights;
};

SamplesFile read_samples_csv(const std::string& path);

//! Writes `x1,...,xp` columns plus optional logdensity/weight columns with
//! 17 significant digits.
void write_samples_csv(const std::string& path, const Matrix& samples,
                       const Vector* log_density = nullptr,
                       const Vector* weights = nullptr);

//! Weights CSV: header `index,weight`.
void write_weights_csv(const std::string& path, const Vector& weights);

//! Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

}  // namespace bbis

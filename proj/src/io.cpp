#include "bbis/io.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bbis {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

SamplesFile read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open samples file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty samples file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }

  Index logdens_col = -1;
  Index weight_col = -1;
  std::vector<Index> coord_cols;
  for (size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "logdensity") logdens_col = Index(j);
    else if (header[j] == "weight") weight_col = Index(j);
    else coord_cols.push_back(Index(j));
  }
  if (coord_cols.empty()) throw ParseError("no coordinate columns");

  std::vector<std::vector<double>> rows;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        if (cell == "-inf") row.push_back(-std::numeric_limits<double>::infinity());
        else row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("bad number at line " + std::to_string(line_no));
      }
    }
    if (row.size() != header.size()) {
      throw ParseError("ragged row at line " + std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("samples file has no rows");

  SamplesFile out;
  const Index n = Index(rows.size());
  out.samples.resize(n, Index(coord_cols.size()));
  for (Index i = 0; i < n; ++i) {
    for (size_t j = 0; j < coord_cols.size(); ++j) {
      out.samples(i, Index(j)) = rows[i][coord_cols[j]];
    }
  }
  if (logdens_col >= 0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rows[i][logdens_col];
    out.log_density = v;
  }
  if (weight_col >= 0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rows[i][weight_col];
    out.weights = v;
  }
  return out;
}

void write_samples_csv(const std::string& path, const Matrix& samples,
                       const Vector* log_density, const Vector* weights) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);

  for (Index j = 0; j < samples.cols(); ++j) {
    if (j) out << ',';
    out << 'x' << (j + 1);
  }
  if (log_density) out << ",logdensity";
  if (weights) out << ",weight";
  out << '\n';

  for (Index i = 0; i < samples.rows(); ++i) {
    for (Index j = 0; j < samples.cols(); ++j) {
      if (j) out << ',';
      out << format_double(samples(i, j));
    }
    if (log_density) out << ',' << format_double((*log_density)[i]);
    if (weights) out << ',' << format_double((*weights)[i]);
    out << '\n';
  }
}

void write_weights_csv(const std::string& path, const Vector& weights) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "index,weight\n";
  for (Index i = 0; i < weights.size(); ++i) {
    out << i << ',' << format_double(weights[i]) << '\n';
  }
}

}  // namespace bbis

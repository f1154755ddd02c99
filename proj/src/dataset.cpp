#include "ikde/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string_view>

namespace ikde {

Dataset::Dataset(std::size_t dim, std::vector<double> values) : dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) throw std::invalid_argument("dataset: ambient dimension must be >= 1");
  if (values_.size() % dim_ != 0) throw std::invalid_argument("dataset: value count not a multiple of D");
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite coordinate");
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view field, std::size_t line_no) {
  field = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw std::invalid_argument("csv line " + std::to_string(line_no) + ": bad value '" +
                                std::string(field) + "'");
  }
  return v;
}

}  // namespace

Dataset read_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    std::size_t cols = 0;
    while (true) {
      const auto comma = rest.find(',');
      values.push_back(parse_field(rest.substr(0, comma), line_no));
      ++cols;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (dim == 0) {
      dim = cols;
    } else if (cols != dim) {
      throw std::invalid_argument("csv line " + std::to_string(line_no) + ": ragged row (" +
                                  std::to_string(cols) + " columns, expected " + std::to_string(dim) + ")");
    }
  }
  if (dim == 0) throw std::invalid_argument("csv: no rows");
  return Dataset(dim, std::move(values));
}

Dataset read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(in);
}

void write_csv(std::ostream& out, const Dataset& data) {
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g", row[k]);
      out << buf;
    }
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(out, data);
}

}  // namespace ikde

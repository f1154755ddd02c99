#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ikde {

// n x D row-major block of sample points. All coordinates are finite.
class Dataset {
public:
  Dataset() = default;

  // Throws std::invalid_argument on D == 0, size mismatch or non-finite values.
  Dataset(std::size_t dim, std::vector<double> values);

  std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return values_.empty(); }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  std::span<const double> values() const { return values_; }

private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

// CSV: one point per row, D comma-separated columns, no header.
// Rejects ragged rows and unparsable or non-finite fields (std::invalid_argument).
Dataset read_csv(std::istream& in);
Dataset read_csv_file(const std::string& path);

// Values are written with 17 significant digits so a round trip is exact.
void write_csv(std::ostream& out, const Dataset& data);
void write_csv_file(const std::string& path, const Dataset& data);

double squared_distance(std::span<const double> a, std::span<const double> b);

// Exact Euclidean distance, computed the same way everywhere so that index
// backends agree bit-for-bit.
inline double distance(std::span<const double> a, std::span<const double> b);

}  // namespace ikde

#include <cmath>

namespace ikde {
inline double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}
}  // namespace ikde

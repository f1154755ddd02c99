#pragma once

#include <cstddef>
#include <variant>

namespace ikde {

struct FixedBandwidth {
  double h;
};

// h_n = c * n^{-1/(d + 2m)}
struct RateSchedule {
  double c = 1.0;
  int d = 1;
  double m = 2.0;
};

using BandwidthRule = std::variant<FixedBandwidth, RateSchedule>;

// Throws std::invalid_argument for n == 0 or invalid rule parameters.
double bandwidth(const BandwidthRule& rule, std::size_t n);

}  // namespace ikde

#include "ikde/bandwidth.hpp"

#include <cmath>
#include <stdexcept>

namespace ikde {

double bandwidth(const BandwidthRule& rule, std::size_t n) {
  if (n == 0) throw std::invalid_argument("bandwidth: n must be >= 1");
  if (const auto* fixed = std::get_if<FixedBandwidth>(&rule)) {
    if (!(fixed->h > 0.0) || !std::isfinite(fixed->h)) throw std::invalid_argument("bandwidth: h must be positive");
    return fixed->h;
  }
  const auto& s = std::get<RateSchedule>(rule);
  if (!(s.c > 0.0) || s.d < 1 || !(s.m > 0.0)) throw std::invalid_argument("bandwidth: invalid rate schedule");
  return s.c * std::pow(static_cast<double>(n), -1.0 / (s.d + 2.0 * s.m));
}

}  // namespace ikde

#include "ikde/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ikde {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::string_view name) {
  return splitmix64(splitmix64(seed) ^ fnv1a(name));
}

void UniformSource::begin_draw() { first_pending_ = strata_ > 0; }

void UniformSource::stratify(std::uint64_t strata) {
  if (strata == 0) throw std::invalid_argument("stratify: strata must be positive");
  strata_ = strata;
  draw_ = 0;
}

double UniformSource::raw_uniform() {
  // 53 random bits, offset by half an ulp so 0 and 1 are never produced.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double UniformSource::next() {
  if (first_pending_) {
    first_pending_ = false;
    const double u = (static_cast<double>(draw_ % strata_) + raw_uniform()) /
                     static_cast<double>(strata_);
    ++draw_;
    return u;
  }
  return raw_uniform();
}

double UniformSource::next_normal() { return normal_quantile(next()); }

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("normal_quantile: u outside (0,1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace ikde

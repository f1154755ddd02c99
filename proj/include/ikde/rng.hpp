#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ikde {

// Derives an independent 64-bit seed for a named substream, e.g. "train:1000:3".
// Streams are keyed by name so adding cells never perturbs existing ones.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name);

// Source of uniform variates in the open interval (0,1).
//
// Samplers consume uniforms through this interface. A stratified source pins the
// first variate of each draw to a jittered stratum; every later variate of the
// same draw is i.i.d. This is what the Monte-Carlo probes use to cut variance
// without changing the distribution being sampled.
class UniformSource {
public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

  UniformSource(std::uint64_t seed, std::string_view stream)
      : engine_(substream_seed(seed, stream)) {}

  // Begin a new draw. Only meaningful for stratified sources.
  void begin_draw();

  double next();

  // Standard normal via the inverse CDF of next().
  double next_normal();

  // Switch to stratified mode: the k-th draw's first variate lies in
  // [k/strata, (k+1)/strata).
  void stratify(std::uint64_t strata);

private:
  double raw_uniform();

  std::mt19937_64 engine_;
  std::uint64_t strata_ = 0;
  std::uint64_t draw_ = 0;
  bool first_pending_ = false;
};

// Inverse of the standard normal CDF on (0,1).
double normal_quantile(double u);

// Standard normal CDF.
double normal_cdf(double x);

}  // namespace ikde

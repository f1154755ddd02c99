#include "ikde/kernels.hpp"

#include "ikde/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace ikde {

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "truncated_gaussian") return KernelKind::TruncatedGaussian;
  if (name == "uniform") return KernelKind::Uniform;
  if (name == "epanechnikov") return KernelKind::Epanechnikov;
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::TruncatedGaussian: return "truncated_gaussian";
    case KernelKind::Uniform: return "uniform";
    case KernelKind::Epanechnikov: return "epanechnikov";
  }
  return "unknown";
}

double NormalizedKernel::evaluate(double r) const {
  if (!std::isfinite(r)) throw std::invalid_argument("kernel evaluate: non-finite radius");
  if (r < 0.0) throw std::invalid_argument("kernel evaluate: negative radius");
  return (*this)(r);
}

NormalizedKernel normalize(KernelProfile profile, int d) {
  if (d < 1) throw std::invalid_argument("normalize: intrinsic dimension must be >= 1");
  const double mass = radial_integral([&](double r) { return profile(r); }, d);
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw std::domain_error("normalize: radial integral of profile is not positive");
  }
  const double c = 1.0 / mass;
  const double s = c * c * radial_integral([&](double r) { return profile(r) * profile(r); }, d);
  return NormalizedKernel(profile, d, c, s);
}

}  // namespace ikde

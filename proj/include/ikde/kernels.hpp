#pragma once

#include <cmath>
#include <string>
#include <string_view>

namespace ikde {

enum class KernelKind { TruncatedGaussian, Uniform, Epanechnikov };

// Parses "truncated_gaussian" | "uniform" | "epanechnikov".
KernelKind parse_kernel_kind(std::string_view name);
std::string to_string(KernelKind kind);

// Unnormalized radial profile k0(r), zero for r > 1.
//
// The Uniform profile is discontinuous at r = 1 and therefore outside the
// continuity assumption of the convergence theory; it is kept because its
// normalization is closed-form.
class KernelProfile {
public:
  explicit KernelProfile(KernelKind kind) : kind_(kind) {}

  KernelKind kind() const { return kind_; }

  double operator()(double r) const {
    if (r > 1.0) return 0.0;
    switch (kind_) {
      case KernelKind::TruncatedGaussian: return std::exp(-0.5 * r * r);
      case KernelKind::Uniform: return 1.0;
      case KernelKind::Epanechnikov: return 1.0 - r * r;
    }
    return 0.0;
  }

private:
  KernelKind kind_;
};

// A profile scaled so that its integral over R^d equals one.
// Bandwidth-free: the 1/h^d factor belongs to the estimator.
class NormalizedKernel {
public:
  KernelProfile profile() const { return profile_; }
  KernelKind kind() const { return profile_.kind(); }
  int dim() const { return dim_; }

  // c_d
  double normalization() const { return norm_; }

  // int_{R^d} K(||u||)^2 du
  double squared_integral() const { return squared_integral_; }

  // c_d * k0(r); exactly zero for r > 1. Throws on NaN or infinite r.
  double evaluate(double r) const;

  // Same as evaluate without the finiteness check, for inner loops.
  double operator()(double r) const { return norm_ * profile_(r); }

private:
  friend NormalizedKernel normalize(KernelProfile profile, int d);
  NormalizedKernel(KernelProfile p, int d, double c, double s)
      : profile_(p), dim_(d), norm_(c), squared_integral_(s) {}

  KernelProfile profile_;
  int dim_;
  double norm_;
  double squared_integral_;
};

// c_d = 1 / (S_{d-1} int_0^1 r^{d-1} k0(r) dr) by adaptive radial quadrature.
// Throws std::invalid_argument for d < 1 and std::domain_error when the radial
// integral underflows to zero.
NormalizedKernel normalize(KernelProfile profile, int d);

inline NormalizedKernel normalize(KernelKind kind, int d) { return normalize(KernelProfile(kind), d); }

}  // namespace ikde

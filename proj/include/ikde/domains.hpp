#pragma once

#include "ikde/dataset.hpp"
#include "ikde/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ikde {

// Thrown when a tangent plane is requested at a point where several strata meet.
class SingularPointError : public std::domain_error {
public:
  SingularPointError() : std::domain_error("singular point") {}
};

// Gaussian mixture over the C(D,d) coordinate d-planes of R^D, each plane
// chosen uniformly and carrying a standard d-dimensional normal.
struct SparseGaussian {
  int D;
  int d;
};

// Uniform distribution on the unit sphere S^{D-1} (intrinsic dimension D-1).
struct UniformSphere {
  int D;
};

// von Mises-Fisher distribution on S^{D-1} with mean direction mu.
struct VonMisesFisher {
  int D;
  std::vector<double> mu;  // unit length
  double kappa;
};

// Finite union of d-dimensional linear subspaces, component l carrying weight
// w_l and the uniform distribution on the radius-R ball of that subspace.
// Points on several subspaces (the origin, for a cross) are non-manifold points.
struct SubspaceCross {
  int D;
  int d;
  std::vector<std::vector<double>> bases;  // each d x D, orthonormal rows
  std::vector<double> weights;             // sums to one
  double radius = 1.0;
};

// Orthonormal basis of the tangent plane at `base`, stored as d rows of length D.
struct TangentFrame {
  std::vector<double> base;
  std::vector<double> basis;
  int d = 0;
  int D = 0;

  std::span<const double> direction(int i) const { return {basis.data() + i * D, static_cast<std::size_t>(D)}; }
};

// One stratum through a point: its tangent plane and the density it carries there.
struct WeightedFrame {
  TangentFrame frame;
  double density;
};

class DomainModel {
public:
  using Params = std::variant<SparseGaussian, UniformSphere, VonMisesFisher, SubspaceCross>;

  // Validates and canonicalizes (normalizes mu, orthonormalizes bases, rescales weights).
  // Throws std::invalid_argument on invalid parameters (d > D, kappa < 0, ...).
  explicit DomainModel(Params params);

  const Params& params() const { return params_; }
  int ambient_dim() const { return D_; }
  int intrinsic_dim() const { return d_; }

  // "sparse" | "sphere" | "vmf" | "cross"
  std::string id() const;

  // One draw written into out (length D), consuming uniforms from `src`.
  void draw(UniformSource& src, std::span<double> out) const;

  // n i.i.d. draws. Throws std::invalid_argument for n == 0.
  Dataset sample(std::size_t n, UniformSource& src) const;
  Dataset sample(std::size_t n, std::uint64_t seed) const;

  // Euclidean distance from x to the support.
  double support_distance(std::span<const double> x) const;

  // Density with respect to d-dimensional Hausdorff measure. At points shared by
  // several strata the contributions of all strata through x are summed.
  // Throws std::domain_error if x is farther than kSupportTolerance from the support.
  double exact_density(std::span<const double> x) const;

  // Throws SingularPointError where strata meet.
  TangentFrame tangent_frame(std::span<const double> x) const;

  // Every stratum through x with its density; a single entry at regular points.
  std::vector<WeightedFrame> tangent_strata(std::span<const double> x) const;

  static constexpr double kSupportTolerance = 1e-9;

private:
  void check_point(std::span<const double> x) const;

  Params params_;
  int D_ = 0;
  int d_ = 0;
};

DomainModel make_sparse_gaussian(int D, int d);
DomainModel make_uniform_sphere(int D);
DomainModel make_von_mises_fisher(std::vector<double> mu, double kappa);
DomainModel make_subspace_cross(int D, int d, std::vector<std::vector<double>> bases,
                                std::vector<double> weights, double radius = 1.0);

// `count` coordinate-aligned subspaces, the j-th spanned by e_{jd}, ..., e_{jd+d-1}.
// Requires count * d <= D. Empty weights means equal weights.
DomainModel make_coordinate_cross(int D, int d, int count, std::vector<double> weights = {},
                                  double radius = 1.0);

// Orthonormal completion of the unit vector u to a basis of u's orthogonal
// complement: D-1 rows of length D.
std::vector<double> orthogonal_complement(std::span<const double> u);

}  // namespace ikde

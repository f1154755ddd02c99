#include "ikde/domains.hpp"

#include "ikde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace ikde {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double norm(std::span<const double> x) { return std::sqrt(squared_distance(x, std::vector<double>(x.size(), 0.0))); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Writes the `rank`-th d-subset of {0..D-1} in lexicographic order.
void unrank_combination(int D, int d, std::uint64_t rank, std::vector<int>& out) {
  out.clear();
  int next = 0;
  for (int slot = 0; slot < d; ++slot) {
    for (int c = next; c < D; ++c) {
      const auto block = static_cast<std::uint64_t>(binomial(D - c - 1, d - slot - 1));
      if (rank < block) {
        out.push_back(c);
        next = c + 1;
        break;
      }
      rank -= block;
    }
  }
}

// Gram-Schmidt over the rows of a (rows x D) block; throws if rank deficient.
std::vector<double> orthonormalize_rows(std::vector<double> rows, int count, int D) {
  for (int i = 0; i < count; ++i) {
    std::span<double> v(rows.data() + i * D, D);
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < i; ++j) {
        std::span<const double> u(rows.data() + j * D, D);
        const double c = dot(v, u);
        for (int k = 0; k < D; ++k) v[k] -= c * u[k];
      }
    }
    const double len = norm(v);
    if (!(len > 1e-10)) throw std::invalid_argument("subspace basis is rank deficient");
    for (double& t : v) t /= len;
  }
  return rows;
}

// Uniform direction on S^{D-1} from D normals.
void uniform_direction(UniformSource& src, std::span<double> out) {
  double len = 0.0;
  do {
    for (double& t : out) t = src.next_normal();
    len = norm(out);
  } while (len == 0.0);
  for (double& t : out) t /= len;
}

// Splits a stratified uniform u into a category index and a fresh uniform in (0,1).
std::size_t split_uniform(double u, std::span<const double> cumulative, double& rest) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
  const double lo = j == 0 ? 0.0 : cumulative[j - 1];
  const double hi = cumulative[j];
  rest = std::clamp((u - lo) / (hi - lo), 0x1.0p-53, 1.0 - 0x1.0p-53);
  return j;
}

double sphere_distance(std::span<const double> x) { return std::abs(norm(x) - 1.0); }

// vMF log normalizer log C_D(kappa) with respect to surface measure.
double vmf_log_normalizer(int D, double kappa) {
  if (kappa == 0.0) return -std::log(unit_sphere_area(D));
  const double nu = 0.5 * D - 1.0;
  return nu * std::log(kappa) - 0.5 * D * std::log(2.0 * std::numbers::pi) -
         std::log(std::cyl_bessel_i(nu, kappa));
}

struct CrossProjection {
  double distance;       // to the radius-R ball in the subspace
  double residual;       // to the subspace itself
};

CrossProjection project_cross(const SubspaceCross& c, std::size_t l, std::span<const double> x) {
  const auto& B = c.bases[l];
  thread_local std::vector<double> rest;
  rest.assign(x.begin(), x.end());
  double in_plane2 = 0.0;
  for (int i = 0; i < c.d; ++i) {
    const std::span<const double> row(B.data() + i * c.D, c.D);
    const double coef = dot(row, x);
    in_plane2 += coef * coef;
    for (int k = 0; k < c.D; ++k) rest[k] -= coef * row[k];
  }
  const double residual = norm(rest);
  const double excess = std::max(0.0, std::sqrt(in_plane2) - c.radius);
  return {std::hypot(residual, excess), residual};
}

}  // namespace

std::vector<double> orthogonal_complement(std::span<const double> u) {
  const int D = static_cast<int>(u.size());
  std::vector<int> order(D);
  std::iota(order.begin(), order.end(), 0);
  // Coordinate axes least aligned with u first, for numerical stability.
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(u[a]) < std::abs(u[b]); });
  std::vector<double> rows;
  rows.reserve((D - 1) * D);
  std::vector<double> v(D);
  for (int k : order) {
    if (static_cast<int>(rows.size()) == (D - 1) * D) break;
    std::fill(v.begin(), v.end(), 0.0);
    v[k] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      const double cu = dot(v, u);
      for (int i = 0; i < D; ++i) v[i] -= cu * u[i];
      for (std::size_t j = 0; j < rows.size() / D; ++j) {
        std::span<const double> w(rows.data() + j * D, D);
        const double c = dot(v, w);
        for (int i = 0; i < D; ++i) v[i] -= c * w[i];
      }
    }
    const double len = norm(v);
    if (len < 1e-6) continue;
    for (double t : v) rows.push_back(t / len);
  }
  return rows;
}

DomainModel::DomainModel(Params params) : params_(std::move(params)) {
  std::visit(
      overloaded{
          [&](SparseGaussian& p) {
            if (p.D < 1 || p.d < 1 || p.d > p.D) throw std::invalid_argument("sparse: need 1 <= d <= D");
            if (binomial(p.D, p.d) > 0x1.0p52) throw std::invalid_argument("sparse: too many coordinate planes");
            D_ = p.D;
            d_ = p.d;
          },
          [&](UniformSphere& p) {
            if (p.D < 2) throw std::invalid_argument("sphere: need D >= 2");
            D_ = p.D;
            d_ = p.D - 1;
          },
          [&](VonMisesFisher& p) {
            if (p.D < 2 || static_cast<int>(p.mu.size()) != p.D) throw std::invalid_argument("vmf: mu must have length D >= 2");
            if (!(p.kappa >= 0.0) || !std::isfinite(p.kappa)) throw std::invalid_argument("vmf: kappa must be >= 0");
            if (p.kappa > 500.0) throw std::invalid_argument("vmf: kappa above 500 is not supported");
            const double len = norm(p.mu);
            if (!(len > 0.0) || !std::isfinite(len)) throw std::invalid_argument("vmf: mu must be non-zero");
            for (double& t : p.mu) t /= len;
            D_ = p.D;
            d_ = p.D - 1;
          },
          [&](SubspaceCross& p) {
            if (p.D < 1 || p.d < 1 || p.d > p.D) throw std::invalid_argument("cross: need 1 <= d <= D");
            if (p.bases.empty()) throw std::invalid_argument("cross: need at least one subspace");
            if (!(p.radius > 0.0) || !std::isfinite(p.radius)) throw std::invalid_argument("cross: radius must be positive");
            if (p.weights.empty()) p.weights.assign(p.bases.size(), 1.0);
            if (p.weights.size() != p.bases.size()) throw std::invalid_argument("cross: one weight per subspace");
            double total = 0.0;
            for (double w : p.weights) {
              if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("cross: weights must be positive");
              total += w;
            }
            for (double& w : p.weights) w /= total;
            for (auto& B : p.bases) {
              if (static_cast<int>(B.size()) != p.d * p.D) throw std::invalid_argument("cross: basis must be d x D");
              B = orthonormalize_rows(std::move(B), p.d, p.D);
            }
            D_ = p.D;
            d_ = p.d;
          },
      },
      params_);
}

std::string DomainModel::id() const {
  return std::visit(overloaded{[](const SparseGaussian&) { return std::string("sparse"); },
                               [](const UniformSphere&) { return std::string("sphere"); },
                               [](const VonMisesFisher&) { return std::string("vmf"); },
                               [](const SubspaceCross&) { return std::string("cross"); }},
                    params_);
}

void DomainModel::draw(UniformSource& src, std::span<double> out) const {
  src.begin_draw();
  std::visit(
      overloaded{
          [&](const SparseGaussian& p) {
            // The first uniform picks the coordinate plane and, rescaled, the
            // first in-plane coordinate.
            const double planes = binomial(p.D, p.d);
            const double scaled = src.next() * planes;
            const double j = std::min(std::floor(scaled), planes - 1.0);
            const double rest = std::clamp(scaled - j, 0x1.0p-53, 1.0 - 0x1.0p-53);
            thread_local std::vector<int> pattern;
            unrank_combination(p.D, p.d, static_cast<std::uint64_t>(j), pattern);
            std::fill(out.begin(), out.end(), 0.0);
            out[pattern[0]] = normal_quantile(rest);
            for (int i = 1; i < p.d; ++i) out[pattern[i]] = src.next_normal();
          },
          [&](const UniformSphere& p) {
            if (p.D == 2) {
              const double theta = 2.0 * std::numbers::pi * src.next();
              out[0] = std::cos(theta);
              out[1] = std::sin(theta);
            } else if (p.D == 3) {
              // Archimedes: height is uniform on [-1,1].
              const double z = 2.0 * src.next() - 1.0;
              const double phi = 2.0 * std::numbers::pi * src.next();
              const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
              out[0] = rho * std::cos(phi);
              out[1] = rho * std::sin(phi);
              out[2] = z;
            } else {
              uniform_direction(src, out);
            }
          },
          [&](const VonMisesFisher& p) {
            const int D = p.D;
            if (p.kappa == 0.0) {
              uniform_direction(src, out);
              return;
            }
            // Wood (1994) rejection sampler for the component along mu.
            const double k = p.kappa;
            const double dm1 = D - 1.0;
            const double b = dm1 / (2.0 * k + std::sqrt(4.0 * k * k + dm1 * dm1));
            const double x0 = (1.0 - b) / (1.0 + b);
            const double c = k * x0 + dm1 * std::log(1.0 - x0 * x0);
            thread_local std::vector<double> tmp;
            tmp.resize(D);
            double w = 0.0;
            while (true) {
              // Beta((D-1)/2, (D-1)/2) as (1 + first coordinate of a uniform direction) / 2.
              uniform_direction(src, tmp);
              const double z = 0.5 * (1.0 + tmp[0]);
              w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
              const double u = src.next();
              if (k * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
            }
            // Direction orthogonal to mu.
            double len = 0.0;
            do {
              for (double& t : tmp) t = src.next_normal();
              const double along = dot(tmp, p.mu);
              for (int i = 0; i < D; ++i) tmp[i] -= along * p.mu[i];
              len = norm(tmp);
            } while (len < 1e-12);
            const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
            for (int i = 0; i < D; ++i) out[i] = w * p.mu[i] + s * tmp[i] / len;
          },
          [&](const SubspaceCross& p) {
            thread_local std::vector<double> cumulative;
            cumulative.resize(p.weights.size());
            std::partial_sum(p.weights.begin(), p.weights.end(), cumulative.begin());
            cumulative.back() = 1.0;
            double rest = 0.0;
            const std::size_t l = split_uniform(src.next(), cumulative, rest);
            thread_local std::vector<double> coef;
            coef.resize(p.d);
            if (p.d == 1) {
              coef[0] = p.radius * (2.0 * rest - 1.0);
            } else {
              const double r = p.radius * std::pow(rest, 1.0 / p.d);
              uniform_direction(src, coef);
              for (double& t : coef) t *= r;
            }
            std::fill(out.begin(), out.end(), 0.0);
            const auto& B = p.bases[l];
            for (int i = 0; i < p.d; ++i) {
              for (int k = 0; k < p.D; ++k) out[k] += coef[i] * B[i * p.D + k];
            }
          },
      },
      params_);
}

Dataset DomainModel::sample(std::size_t n, UniformSource& src) const {
  if (n == 0) throw std::invalid_argument("sample: n must be >= 1");
  std::vector<double> values(n * D_);
  for (std::size_t i = 0; i < n; ++i) draw(src, std::span<double>(values.data() + i * D_, D_));
  return Dataset(static_cast<std::size_t>(D_), std::move(values));
}

Dataset DomainModel::sample(std::size_t n, std::uint64_t seed) const {
  UniformSource src(seed);
  return sample(n, src);
}

double DomainModel::support_distance(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != D_) throw std::invalid_argument("point has wrong dimension");
  return std::visit(
      overloaded{
          [&](const SparseGaussian& p) {
            std::vector<double> sq(x.size());
            std::transform(x.begin(), x.end(), sq.begin(), [](double t) { return t * t; });
            std::sort(sq.begin(), sq.end());
            double s = 0.0;
            for (int i = 0; i < p.D - p.d; ++i) s += sq[i];
            return std::sqrt(s);
          },
          [&](const UniformSphere&) { return sphere_distance(x); },
          [&](const VonMisesFisher&) { return sphere_distance(x); },
          [&](const SubspaceCross& p) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < p.bases.size(); ++l) best = std::min(best, project_cross(p, l, x).distance);
            return best;
          },
      },
      params_);
}

void DomainModel::check_point(std::span<const double> x) const {
  if (support_distance(x) > kSupportTolerance) throw std::domain_error("point is off the support");
}

std::vector<WeightedFrame> DomainModel::tangent_strata(std::span<const double> x) const {
  check_point(x);
  std::vector<WeightedFrame> strata;
  auto frame_from_rows = [&](std::vector<double> rows, int d) {
    return TangentFrame{std::vector<double>(x.begin(), x.end()), std::move(rows), d, D_};
  };
  std::visit(
      overloaded{
          [&](const SparseGaussian& p) {
            std::vector<int> nonzero;
            for (int k = 0; k < p.D; ++k) {
              if (std::abs(x[k]) > kSupportTolerance) nonzero.push_back(k);
            }
            const double per_plane = std::pow(2.0 * std::numbers::pi, -0.5 * p.d) * std::exp(-0.5 * dot(x, x)) /
                                     binomial(p.D, p.d);
            // Every coordinate plane containing the non-zero pattern of x.
            std::vector<int> pattern;
            const auto planes = static_cast<std::uint64_t>(binomial(p.D, p.d));
            for (std::uint64_t r = 0; r < planes; ++r) {
              unrank_combination(p.D, p.d, r, pattern);
              if (!std::includes(pattern.begin(), pattern.end(), nonzero.begin(), nonzero.end())) continue;
              std::vector<double> rows(p.d * p.D, 0.0);
              for (int i = 0; i < p.d; ++i) rows[i * p.D + pattern[i]] = 1.0;
              strata.push_back({frame_from_rows(std::move(rows), p.d), per_plane});
            }
          },
          [&](const UniformSphere& p) {
            std::vector<double> u(x.begin(), x.end());
            const double len = norm(u);
            for (double& t : u) t /= len;
            strata.push_back({frame_from_rows(orthogonal_complement(u), p.D - 1), 1.0 / unit_sphere_area(p.D)});
          },
          [&](const VonMisesFisher& p) {
            std::vector<double> u(x.begin(), x.end());
            const double len = norm(u);
            for (double& t : u) t /= len;
            const double dens = std::exp(vmf_log_normalizer(p.D, p.kappa) + p.kappa * dot(p.mu, u));
            strata.push_back({frame_from_rows(orthogonal_complement(u), p.D - 1), dens});
          },
          [&](const SubspaceCross& p) {
            const double ball = unit_ball_volume(p.d) * std::pow(p.radius, p.d);
            for (std::size_t l = 0; l < p.bases.size(); ++l) {
              if (project_cross(p, l, x).distance <= kSupportTolerance) {
                strata.push_back({frame_from_rows(p.bases[l], p.d), p.weights[l] / ball});
              }
            }
          },
      },
      params_);
  return strata;
}

double DomainModel::exact_density(std::span<const double> x) const {
  if (const auto* p = std::get_if<SparseGaussian>(&params_)) {
    check_point(x);
    int nonzero = 0;
    for (double t : x) nonzero += std::abs(t) > kSupportTolerance;
    // C(D - nnz, d - nnz) coordinate planes contain x.
    const double planes = binomial(p->D - nonzero, p->d - nonzero);
    return planes / binomial(p->D, p->d) * std::pow(2.0 * std::numbers::pi, -0.5 * p->d) *
           std::exp(-0.5 * dot(x, x));
  }
  const auto strata = tangent_strata(x);
  double total = 0.0;
  for (const auto& s : strata) total += s.density;
  return total;
}

TangentFrame DomainModel::tangent_frame(std::span<const double> x) const {
  auto strata = tangent_strata(x);
  if (strata.size() != 1) throw SingularPointError();
  return std::move(strata.front().frame);
}

DomainModel make_sparse_gaussian(int D, int d) { return DomainModel(SparseGaussian{D, d}); }

DomainModel make_uniform_sphere(int D) { return DomainModel(UniformSphere{D}); }

DomainModel make_von_mises_fisher(std::vector<double> mu, double kappa) {
  const int D = static_cast<int>(mu.size());
  return DomainModel(VonMisesFisher{D, std::move(mu), kappa});
}

DomainModel make_subspace_cross(int D, int d, std::vector<std::vector<double>> bases, std::vector<double> weights,
                                double radius) {
  return DomainModel(SubspaceCross{D, d, std::move(bases), std::move(weights), radius});
}

DomainModel make_coordinate_cross(int D, int d, int count, std::vector<double> weights, double radius) {
  if (count < 1 || d < 1 || count * d > D) throw std::invalid_argument("cross: need count * d <= D");
  std::vector<std::vector<double>> bases;
  for (int j = 0; j < count; ++j) {
    std::vector<double> B(d * D, 0.0);
    for (int i = 0; i < d; ++i) B[i * D + j * d + i] = 1.0;
    bases.push_back(std::move(B));
  }
  return make_subspace_cross(D, d, std::move(bases), std::move(weights), radius);
}

}  // namespace ikde

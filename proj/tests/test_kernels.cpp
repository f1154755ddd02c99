#include "ikde/kernels.hpp"
#include "ikde/quadrature.hpp"
#include "ikde/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace ikde;

namespace {

constexpr KernelKind kAllKinds[] = {KernelKind::TruncatedGaussian, KernelKind::Uniform, KernelKind::Epanechnikov};

// Reference radial integral through Boost's fixed-order Gauss-Kronrod, independent
// of the adaptive routine under test.
double reference_radial(const std::function<double(double)>& g, int d) {
  const double area = d * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
  auto f = [&](double r) { return std::pow(r, d - 1) * g(r); };
  return area * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-14);
}

}  // namespace

TEST_CASE("adaptive quadrature matches closed forms") {
  CHECK(integrate([](double x) { return std::exp(x); }, 0.0, 1.0).value == doctest::Approx(std::numbers::e - 1).epsilon(1e-14));
  CHECK(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0).value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0).value == 0.0);
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi).epsilon(1e-15));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-15));
  CHECK(unit_sphere_area(1) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("uniform kernel normalizes by the unit-ball volume") {
  CHECK(normalize(KernelKind::Uniform, 2).normalization() == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-13));
  CHECK(normalize(KernelKind::Uniform, 3).normalization() ==
        doctest::Approx(3.0 / (4.0 * std::numbers::pi)).epsilon(1e-13));
}

TEST_CASE("truncated Gaussian in one dimension matches the normal CDF form") {
  const double expected = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * (2.0 * normal_cdf(1.0) - 1.0));
  const auto k = normalize(KernelKind::TruncatedGaussian, 1);
  CHECK(k.normalization() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(k.normalization() == doctest::Approx(0.58436856725681664).epsilon(1e-12));
  CHECK(k.evaluate(0.0) == doctest::Approx(0.58436856725681664).epsilon(1e-12));
}

TEST_CASE("normalization constants agree with independent high-precision values") {
  // Frozen from 30-digit radial quadrature.
  struct Row {
    KernelKind kind;
    int d;
    double c, s;
  };
  const Row rows[] = {
      {KernelKind::TruncatedGaussian, 2, 0.40449134607453288, 0.32491387452858521},
      {KernelKind::TruncatedGaussian, 3, 0.31946798038498316, 0.24300229125980235},
      {KernelKind::TruncatedGaussian, 5, 0.26994883801311056, 0.19230793827590825},
      {KernelKind::Epanechnikov, 1, 0.75, 0.6},
      {KernelKind::Epanechnikov, 3, 0.59683103659460751, 0.34104630662549001},
      {KernelKind::Epanechnikov, 5, 0.66492026765284163, 0.2955201189568185},
      {KernelKind::Uniform, 5, 0.18997721932938332, 0.18997721932938332},
  };
  for (const auto& row : rows) {
    const auto k = normalize(row.kind, row.d);
    CAPTURE(to_string(row.kind));
    CAPTURE(row.d);
    CHECK(k.normalization() == doctest::Approx(row.c).epsilon(1e-12));
    CHECK(k.squared_integral() == doctest::Approx(row.s).epsilon(1e-12));
  }
}

TEST_CASE("squared integral equals reference quadrature of the squared kernel") {
  for (auto kind : kAllKinds) {
    for (int d = 1; d <= 6; ++d) {
      const auto k = normalize(kind, d);
      const double ref = reference_radial([&](double r) { return k(r) * k(r); }, d);
      CHECK(k.squared_integral() == doctest::Approx(ref).epsilon(1e-8));
      CHECK(reference_radial([&](double r) { return k(r); }, d) == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("Monte-Carlo integral over the unit ball is within 3 SE of one") {
  std::mt19937_64 gen(12345);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  constexpr int kSamples = 200'000;
  for (auto kind : kAllKinds) {
    for (int d = 1; d <= 6; ++d) {
      const auto k = normalize(kind, d);
      double sum = 0.0, sum2 = 0.0;
      std::vector<double> u(d);
      for (int i = 0; i < kSamples; ++i) {
        double r2 = 0.0;
        for (double& t : u) {
          t = unif(gen);
          r2 += t * t;
        }
        const double v = std::pow(2.0, d) * k(std::sqrt(r2));
        sum += v;
        sum2 += v * v;
      }
      const double mean = sum / kSamples;
      const double se = std::sqrt(std::max(0.0, sum2 / kSamples - mean * mean) / (kSamples - 1));
      CAPTURE(to_string(kind));
      CAPTURE(d);
      CHECK(std::abs(mean - 1.0) <= 3.0 * se + 1e-12);
    }
  }
}

TEST_CASE("kernel evaluation") {
  const auto uni = normalize(KernelKind::Uniform, 2);
  CHECK(uni.evaluate(0.5) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-13));
  CHECK(uni.evaluate(1.0) > 0.0);  // closed support
  for (auto kind : kAllKinds) {
    const auto k = normalize(kind, 3);
    CHECK(k.evaluate(1.5) == 0.0);
    CHECK(k.evaluate(1.0 + 1e-15) == 0.0);
    CHECK_THROWS_AS(k.evaluate(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
    CHECK_THROWS_AS(k.evaluate(std::numeric_limits<double>::infinity()), std::invalid_argument);
    // Monotone non-increasing in r.
    double prev = k.evaluate(0.0);
    for (int i = 1; i <= 1000; ++i) {
      const double v = k.evaluate(i * 1.2e-3);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("normalize is deterministic and validates its input") {
  const auto a = normalize(KernelKind::TruncatedGaussian, 4);
  const auto b = normalize(KernelKind::TruncatedGaussian, 4);
  CHECK(a.normalization() == b.normalization());
  CHECK(a.squared_integral() == b.squared_integral());
  CHECK_THROWS_AS(normalize(KernelKind::Uniform, 0), std::invalid_argument);
  // The unit sphere's area underflows in very high dimension.
  CHECK_THROWS_AS(normalize(KernelKind::Uniform, 5000), std::domain_error);
}

TEST_CASE("kernel names") {
  for (auto kind : kAllKinds) CHECK(parse_kernel_kind(to_string(kind)) == kind);
  CHECK(parse_kernel_kind("truncated_gaussian") == KernelKind::TruncatedGaussian);
  CHECK_THROWS_AS(parse_kernel_kind("gaussian"), std::invalid_argument);
}

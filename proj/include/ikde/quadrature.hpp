#pragma once

#include <functional>

namespace ikde {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  int intervals = 0;
};

// Adaptive Gauss-Kronrod (7/15) integration of f over [a,b] to absolute tolerance.
// Throws std::runtime_error if the tolerance cannot be met within max_intervals.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol = 1e-12, int max_intervals = 4000);

// Integral over R^d of a radial function g(||u||) supported in the unit ball:
// S_{d-1} * int_0^1 r^{d-1} g(r) dr, the 1-D integral taken to absolute tolerance abs_tol.
double radial_integral(const std::function<double(double)>& g, int d, double abs_tol = 1e-12);

// Surface area of the unit sphere S^{d-1} in R^d: d * pi^{d/2} / Gamma(d/2 + 1).
double unit_sphere_area(int d);

// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

}  // namespace ikde

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace singscat::numerics {

struct RootResult {
  double x;
  double f;
  int iterations;
};

/// Bracketed root of a continuous function: secant steps while they stay
/// inside the bracket and keep shrinking it, bisection otherwise. Requires
/// fa and fb of opposite sign (or one of them zero). Stops when |f| <= ftol
/// or the bracket is narrower than xtol_rel * |x|.
RootResult safeguarded_root(const std::function<double(double)>& f, double a, double b, double fa,
                            double fb, double ftol, double xtol_rel = 4.0 * std::numeric_limits<double>::epsilon(),
                            int max_iterations = 400);

struct QuadratureResult {
  double value;
  double error;
};

/// Adaptive 15-point Gauss-Kronrod over consecutive breakpoints; throws
/// Error(quadrature_failure) when the estimate misses
/// max(abs_tol, rel_tol * |value|).
QuadratureResult integrate(const std::function<double(double)>& f, std::span<const double> breaks,
                           double abs_tol = 1e-10, double rel_tol = 1e-8, unsigned max_depth = 20);

/// 10-point Gauss-Legendre on [a, b]; used where the integrand is smooth at
/// the panel scale.
double gauss_legendre(const std::function<double(double)>& f, double a, double b);

/// Geometric breakpoints a, a + h, a + h*q, ... clipped to b (h > 0 steps
/// away from a; b may lie on either side of a).
std::vector<double> graded_breaks(double a, double b, double first_step, double ratio = 4.0);

/// Cubic Hermite interpolation on [x0, x1].
double hermite(double x, double x0, double x1, double y0, double y1, double d0, double d1) noexcept;

/// Index i with xs[i] <= x <= xs[i+1] for ascending xs (clamped to the ends).
std::size_t locate(std::span<const double> xs, double x) noexcept;

}  // namespace singscat::numerics

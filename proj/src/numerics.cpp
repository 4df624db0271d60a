#include "singscat/numerics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "singscat/error.hpp"

namespace singscat::numerics {

RootResult safeguarded_root(const std::function<double(double)>& f, double a, double b, double fa,
                            double fb, double ftol, double xtol_rel, int max_iterations) {
  if (fa == 0.0) return {a, fa, 0};
  if (fb == 0.0) return {b, fb, 0};
  if ((fa > 0.0) == (fb > 0.0)) {
    throw Error(ErrorKind::no_solution, "safeguarded_root: interval does not bracket a root",
                {{"a", a}, {"b", b}, {"fa", fa}, {"fb", fb}});
  }
  // Most recent two iterates feed the secant step.
  double x_prev = a, f_prev = fa;
  double x_cur = b, f_cur = fb;
  double width_before = std::abs(b - a);
  for (int it = 1; it <= max_iterations; ++it) {
    double x = 0.5 * (a + b);
    const double denom = f_cur - f_prev;
    if (denom != 0.0 && std::isfinite(denom)) {
      const double xs = x_cur - f_cur * (x_cur - x_prev) / denom;
      const double lo = std::min(a, b), hi = std::max(a, b);
      if (xs > lo && xs < hi) x = xs;
    }
    // every other iteration the bracket must have halved, else bisect
    if (it % 2 == 0) {
      if (std::abs(b - a) > 0.5 * width_before) x = 0.5 * (a + b);
      width_before = std::abs(b - a);
    }
    const double fx = f(x);
    if (std::abs(fx) <= ftol) return {x, fx, it};
    if ((fx > 0.0) == (fa > 0.0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    x_prev = x_cur;
    f_prev = f_cur;
    x_cur = x;
    f_cur = fx;
    if (std::abs(b - a) <= xtol_rel * std::max(std::abs(a), std::abs(b))) {
      const bool take_a = std::abs(fa) < std::abs(fb);
      return {take_a ? a : b, take_a ? fa : fb, it};
    }
  }
  throw Error(ErrorKind::no_solution, "safeguarded_root: iteration limit reached",
              {{"a", a}, {"b", b}, {"fa", fa}, {"fb", fb}});
}

QuadratureResult integrate(const std::function<double(double)>& f, std::span<const double> breaks,
                           double abs_tol, double rel_tol, unsigned max_depth) {
  using boost::math::quadrature::gauss_kronrod;
  QuadratureResult total{0.0, 0.0};
  double l1_total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    if (a == b) continue;
    double err = 0.0, l1 = 0.0;
    // Boost 1.74 reports the recursive error estimate unscaled by the panel
    // half-width, so each panel is mapped onto [-1, 1] first.
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    auto g = [&](double x) { return half * f(mid + half * x); };
    const double v = gauss_kronrod<double, 15>::integrate(g, -1.0, 1.0, max_depth, rel_tol, &err, &l1);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::quadrature_failure, "integrate: non-finite panel value", {{"a", a}, {"b", b}});
    }
    total.value += v;
    total.error += err;
    l1_total += l1;
  }
  if (total.error > std::max(abs_tol, rel_tol * std::max(std::abs(total.value), 1e-300)) &&
      total.error > rel_tol * l1_total) {
    throw Error(ErrorKind::quadrature_failure, "integrate: tolerance not reached",
                {{"a", breaks.front()}, {"b", breaks.back()}, {"value", total.value}, {"error", total.error}});
  }
  return total;
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 10>::integrate(f, a, b);
}

std::vector<double> graded_breaks(double a, double b, double first_step, double ratio) {
  std::vector<double> out{a};
  const double dir = b > a ? 1.0 : -1.0;
  double step = first_step;
  double x = a;
  while (true) {
    x += dir * step;
    if ((b - x) * dir <= 0.0) break;
    out.push_back(x);
    step *= ratio;
  }
  out.push_back(b);
  return out;
}

double hermite(double x, double x0, double x1, double y0, double y1, double d0, double d1) noexcept {
  const double h = x1 - x0;
  if (h == 0.0) return y0;
  const double u = (x - x0) / h;
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1;
  const double h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2;
  const double h11 = u3 - u2;
  return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
}

std::size_t locate(std::span<const double> xs, double x) noexcept {
  if (xs.size() < 2) return 0;
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  return std::min(i, xs.size() - 2);
}

}  // namespace singscat::numerics

#include "singscat/phase.hpp"

#include <cmath>
#include <numbers>

#include "singscat/error.hpp"

namespace singscat {

RiccatiBessel riccati_bessel(int l, double x) {
  if (l < 0 || !(x > 0.0)) throw Error(ErrorKind::domain, "riccati_bessel: need l >= 0 and x > 0", {{"x", x}});
  const unsigned ul = static_cast<unsigned>(l);
  const double jl = std::sph_bessel(ul, x);
  const double yl = std::sph_neumann(ul, x);
  // x f_{l-1}(x) with f_{-1} continued: j_{-1} = cos x / x, y_{-1} = sin x / x
  const double xj_prev = l == 0 ? std::cos(x) : x * std::sph_bessel(ul - 1, x);
  const double xy_prev = l == 0 ? std::sin(x) : x * std::sph_neumann(ul - 1, x);
  return {x * jl, xj_prev - l * jl, x * yl, xy_prev - l * yl};
}

double fold_half_pi(double angle) {
  const double pi = std::numbers::pi;
  double d = std::fmod(angle, pi);
  if (d <= -pi / 2) d += pi;
  if (d > pi / 2) d -= pi;
  return d;
}

double PhaseShift::unwrapped() const { return delta + branch * std::numbers::pi; }

PhaseShift extract_phase(int l, double k, double r, double u, double du_dr, double unwrapped_estimate) {
  const RiccatiBessel f = riccati_bessel(l, k * r);
  // d/dr of jhat(kr) is k jhat'(kr)
  const double w = k * (f.j * f.dn - f.dj * f.n);
  const double a = (u * k * f.dn - du_dr * f.n) / w;
  const double b = (du_dr * f.j - u * k * f.dj) / w;
  PhaseShift out;
  out.delta = fold_half_pi(std::atan2(-b, a));
  if (std::isfinite(unwrapped_estimate)) {
    out.branch = static_cast<int>(std::lround((unwrapped_estimate - out.delta) / std::numbers::pi));
  }
  return out;
}

}  // namespace singscat

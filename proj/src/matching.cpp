#include "singscat/matching.hpp"

#include <cmath>
#include <limits>

#include "singscat/error.hpp"
#include "singscat/numerics.hpp"

namespace singscat {

AngularTriad lambda_triad(int l) {
  if (l < 0) throw Error(ErrorKind::domain, "lambda_triad: l must be nonnegative", {{"l", double(l)}});
  AngularTriad t;
  t.l = l;
  const double half = l + 0.5;
  t.lambda_eps_sq = half * half;
  t.lambda_tau_sq = static_cast<double>(l) * (l + 1);
  t.lambda_sq = 0.5 * (t.lambda_eps_sq + t.lambda_tau_sq);
  return t;
}

double master_residual(const PotentialClass& cls, double k, const AngularTriad& triad, double R, double s) {
  const PotentialValue v = potential_value(cls, s, R, R);
  const double kr2 = k * k * R * R;
  if (!std::isfinite(v.value)) return -std::numeric_limits<double>::infinity();
  return kr2 - R * R * v.value - triad.lambda_sq;
}

double solve_stage(const PotentialClass& cls, double k, const AngularTriad& triad, double R) {
  if (!(R > 0.0)) throw Error(ErrorKind::domain, "solve_stage: R must be positive", {{"R", R}});
  const double target = k * k - triad.lambda_sq / (R * R);
  if (!(target > 0.0)) {
    throw Error(ErrorKind::no_solution, "solve_stage: k^2 R^2 <= lambda^2, no matching stage exists",
                {{"k", k}, {"R", R}, {"lambda_sq", triad.lambda_sq}});
  }
  const double log_ratio = std::log(target) - log_coupling(cls, R) - log_tail(cls, R);
  if (log_ratio < 0.0) {
    throw Error(ErrorKind::negative_stage,
                "solve_stage: potential at s = 0 exceeds k^2 - lambda^2/R^2; stage would be negative",
                {{"R", R}, {"log_ratio", log_ratio}});
  }
  if (cls.core == Law::E) return R / cls.r1 * log_ratio;
  return log_ratio / std::log1p(cls.r1 / R);
}

double solve_matching_radius(const PotentialClass& cls, double k, const AngularTriad& triad, double s) {
  if (!(s > 0.0)) throw Error(ErrorKind::domain, "solve_matching_radius: s must be positive", {{"s", s}});
  if (!(k > 0.0)) throw Error(ErrorKind::domain, "solve_matching_radius: k must be positive", {{"k", k}});
  auto residual = [&](double R) { return master_residual(cls, k, triad, R, s); };
  constexpr int per_decade = 20;
  constexpr int decades = 9;
  double r_lo = 1e-3 / k;
  double f_lo = residual(r_lo);
  const double f_first = f_lo;
  for (int j = 1; j <= per_decade * decades; ++j) {
    const double r_hi = 1e-3 / k * std::pow(10.0, static_cast<double>(j) / per_decade);
    const double f_hi = residual(r_hi);
    if ((f_lo > 0.0) != (f_hi > 0.0) || f_hi == 0.0) {
      const double ftol = 1e-12 * std::max(1.0, k * k * r_lo * r_lo);
      const auto root = numerics::safeguarded_root(residual, r_lo, r_hi, f_lo, f_hi, ftol);
      return root.x;
    }
    r_lo = r_hi;
    f_lo = f_hi;
  }
  throw Error(ErrorKind::no_solution, "solve_matching_radius: no sign change of the matching residual",
              {{"R_min", 1e-3 / k}, {"residual_min", f_first}, {"R_max", r_lo}, {"residual_max", f_lo}});
}

double radius_from_coupling(const PotentialClass& cls, double g2) {
  if (!(g2 > 0.0)) throw Error(ErrorKind::domain, "radius_from_coupling: g2 must be positive", {{"g2", g2}});
  const double scaled = g2 * cls.r0 * cls.r0;
  if (cls.coupling == Law::E) {
    const double R = -cls.r0 * std::log(scaled);
    if (!(R > 0.0)) throw Error(ErrorKind::domain, "radius_from_coupling: g2 r0^2 must be below 1", {{"g2", g2}});
    return R;
  }
  return cls.r0 * std::pow(scaled, -1.0 / cls.sigma0);
}

MatchingSolution match_at_radius(const PotentialClass& cls, double k, int l, double R) {
  cls.validate();
  MatchingSolution sol;
  sol.k = k;
  sol.triad = lambda_triad(l);
  sol.cls = cls;
  sol.R = R;
  sol.s = solve_stage(cls, k, sol.triad, R);
  sol.g2 = coupling(cls, R);
  sol.u_R = k * k - sol.triad.lambda_sq / (R * R);
  return sol;
}

MatchingSolution match_at_stage(const PotentialClass& cls, double k, int l, double s) {
  cls.validate();
  MatchingSolution sol;
  sol.k = k;
  sol.triad = lambda_triad(l);
  sol.cls = cls;
  sol.s = s;
  sol.R = solve_matching_radius(cls, k, sol.triad, s);
  sol.g2 = coupling(cls, sol.R);
  sol.u_R = k * k - sol.triad.lambda_sq / (sol.R * sol.R);
  return sol;
}

MatchingSolution free_solution(double k, int l, double R) {
  MatchingSolution sol;
  sol.k = k;
  sol.triad = lambda_triad(l);
  sol.R = R;
  sol.potential_removed = true;
  return sol;
}

}  // namespace singscat

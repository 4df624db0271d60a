#include "checks.hpp"

#include <algorithm>
#include <cmath>

#include "singscat/localwave.hpp"
#include "singscat/phase.hpp"

namespace scatter {

using namespace singscat;

Check make_check(std::string name, std::string what, double measured, double tolerance) {
  return {std::move(name), std::move(what), measured, tolerance, measured <= tolerance};
}

Check check_matching_identity(const MatchingSolution& sol) {
  const double target = 1.0 / (8.0 * sol.R * sol.R);
  const double de = std::abs(k_squared(Region::epsilon, sol, 1.0) / target - 1.0);
  const double dt = std::abs(k_squared(Region::tau, sol, 1.0) / target - 1.0);
  return make_check("matching_point_identity", "max |K^2(1) / (1/(8R^2)) - 1| over both regions", std::max(de, dt),
                    1e-12);
}

Check check_triad(const AngularTriad& tr) {
  const double l = tr.l;
  double dev = std::abs(tr.lambda_eps_sq - tr.lambda_sq - 0.125) + std::abs(tr.lambda_sq - tr.lambda_tau_sq - 0.125);
  dev += std::abs(tr.lambda_eps_sq - (l + 0.5) * (l + 0.5)) + std::abs(tr.lambda_tau_sq - l * (l + 1));
  return make_check("triad_identities", "sum of |lambda_eps^2 - lambda^2 - 1/8|, |lambda^2 - lambda_tau^2 - 1/8| and "
                    "the definitions", dev, 1e-15);
}

Check check_master_residual(const MatchingSolution& sol) {
  const double res = master_residual(sol.cls, sol.k, sol.triad, sol.R, sol.s);
  return make_check("master_residual", "|residual| / (k^2 R^2)", std::abs(res) / (sol.k * sol.k * sol.R * sol.R),
                    1e-12);
}

Check check_round_trip(const MatchingSolution& sol) {
  const double R = solve_matching_radius(sol.cls, sol.k, sol.triad, sol.s);
  return make_check("stage_radius_round_trip", "|R(s(R)) / R - 1|", std::abs(R / sol.R - 1.0), 1e-9);
}

namespace {

constexpr double kEpsPoints[] = {0.5, 0.6, 0.7, 0.8, 0.9};

}  // namespace

Check check_wronskian_eps(const MatchingSolution& sol) {
  const double want = -2.0 * sol.k * sol.R;
  double worst = 0.0;
  for (double t : kEpsPoints) {
    worst = std::max(worst, std::abs(wronskian_check(Region::epsilon, sol, {}, t) / want - 1.0));
  }
  return make_check("wronskian_eps", "max |W(t) / (-2kR) - 1|, t = 0.5..0.9", worst, 1e-8);
}

Check check_wronskian_eps_constancy(const MatchingSolution& sol) {
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (double t : kEpsPoints) {
    const double w = wronskian_check(Region::epsilon, sol, {}, t);
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  return make_check("wronskian_eps_constancy", "(max W - min W) / 2kR, t = 0.5..0.9",
                    (hi - lo) / (2.0 * sol.k * sol.R), 1e-8);
}

Check check_wronskian_tau(const MatchingSolution& sol, const MatchCoefficients& c) {
  const double want = sol.k * sol.R * (c.c_plus * c.s_minus - c.c_minus * c.s_plus);
  double worst = 0.0;
  for (double t : {1.5, 2.0, 2.5, 3.0, 3.5}) {
    worst = std::max(worst, std::abs(wronskian_check(Region::tau, sol, c, t) / want - 1.0));
  }
  return make_check("wronskian_tau", "max |W(t) / (kR (C+ S- - C- S+)) - 1|, t = 1.5..3.5", worst, 1e-8);
}

namespace {

struct FiniteDifference {
  double first;
  double second;
};

// K^2 minus its constant part, straight from the potential: the constant
// k^2 drops out of the derivatives, and leaving it in would bury the tail
// variation below rounding.
double varying_part(Region region, const MatchingSolution& sol, double t) {
  const double v = potential_value(sol.cls, sol.s, sol.R, sol.R * t).value;
  const double lg = region == Region::epsilon ? sol.triad.lambda_eps_sq : sol.triad.lambda_tau_sq;
  const double c = v + lg / (sol.R * sol.R * t * t);
  return region == Region::epsilon ? c : -c;
}

// Central differences at h and h/2 combined to fourth order.
FiniteDifference central(Region region, const MatchingSolution& sol, double t, double h) {
  auto at = [&](double hh) {
    const double fm = varying_part(region, sol, t - hh), f0 = varying_part(region, sol, t),
                 fp = varying_part(region, sol, t + hh);
    return FiniteDifference{(fp - fm) / (2 * hh), (fp - 2 * f0 + fm) / (hh * hh)};
  };
  const auto a = at(h), b = at(h / 2);
  return {(4 * b.first - a.first) / 3, (4 * b.second - a.second) / 3};
}

}  // namespace

Check check_derivatives(const MatchingSolution& sol, int points) {
  // the epsilon window starts where K^2 is still a modest number
  double t_lo = 0.98;
  while (t_lo > 0.3 && log_k_squared(Region::epsilon, sol, t_lo - 0.02) < 300.0) t_lo -= 0.02;
  const int ne = points / 2, nt = points - ne;
  double worst = 0.0;
  auto probe = [&](Region reg, double t) {
    // h well inside the local scales: distance to the seam and the origin, |f/f'|, sqrt|f/f''|
    const auto an = k_squared_derivatives(reg, sol, t);
    const double f = varying_part(reg, sol, t);
    const double scale = std::min({t, std::abs(t - 1.0), std::abs(f / an.first), std::sqrt(std::abs(f / an.second))});
    const auto fd = central(reg, sol, t, 0.005 * scale);
    worst = std::max(worst, std::abs(an.first - fd.first) / std::abs(an.first));
    worst = std::max(worst, std::abs(an.second - fd.second) / std::abs(an.second));
  };
  for (int i = 0; i < ne; ++i) probe(Region::epsilon, t_lo + (0.98 - t_lo) * i / std::max(1, ne - 1));
  for (int i = 0; i < nt; ++i) probe(Region::tau, 1.02 + 2.98 * i / std::max(1, nt - 1));
  return make_check("k2_derivatives", "max relative deviation of dK^2/dt, d^2K^2/dt^2 from finite differences", worst,
                    1e-6);
}

Check check_seam_continuity(const ScatteringResult& res) {
  const auto& d = res.diagnostics;
  return make_check("seam_continuity", "max(value, slope) mismatch at t = 1", std::max(d.value_mismatch, d.slope_mismatch),
                    1e-10);
}

Check check_oracle_agreement(const ScatteringResult& res, const OracleConfig& cfg, double tolerance) {
  const PhaseShift o = phase_shift_oracle(res.sol, cfg);
  return make_check("oracle_agreement", "|delta_series - delta_oracle| mod pi",
                    std::abs(fold_half_pi(res.phase.delta - o.delta)), tolerance);
}

Check check_aux_invariance(const MatchingSolution& sol, const SeriesOptions& opts, double c_alt, double s_alt) {
  SeriesOptions a = opts, b = opts;
  a.c_minus = 0.0;
  a.s_minus = 1.0;
  b.c_minus = c_alt;
  b.s_minus = s_alt;
  const double da = solve_series(sol, a).phase.delta, db = solve_series(sol, b).phase.delta;
  return make_check("aux_pair_invariance", "|delta(C-,S-) - delta(0,1)| mod pi", std::abs(fold_half_pi(da - db)),
                    1e-10);
}

Check check_free_phase(double k, int l, double R, const SeriesOptions& opts) {
  const auto res = solve_series(free_solution(k, l, R), opts);
  return make_check("free_phase_zero", "|delta| of the potential-free problem", std::abs(res.phase.delta), 1e-8);
}

}  // namespace scatter

#include "singscat/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <boost/numeric/odeint.hpp>

#include "singscat/error.hpp"
#include "singscat/numerics.hpp"

namespace singscat {

namespace {

namespace odeint = boost::numeric::odeint;

constexpr double kPi = 3.14159265358979323846;
constexpr double kLogQMax = 600.0;

struct Model {
  const MatchingSolution& sol;
  bool with_potential;

  double centrifugal(double r) const {
    const double l = sol.triad.l;
    return l == 0 ? 0.0 : l * (l + 1.0) / (r * r);  // l = 0 starts at r = 0
  }
  double potential(double r) const {
    if (!with_potential) return 0.0;
    return potential_value(sol.cls, sol.s, sol.R, r).value;
  }
  double log_potential(double r) const {
    if (!with_potential) return -INFINITY;
    return potential_value(sol.cls, sol.s, sol.R, r).log_value;
  }
  // u'' = f u
  double f(double r) const { return potential(r) + centrifugal(r) - sol.k * sol.k; }
  double dQ(double r) const {
    const double l = sol.triad.l;
    double d = -2.0 * l * (l + 1.0) / (r * r * r);
    if (with_potential) {
      const double t = r / sol.R;
      d += potential(r) * log_potential_derivatives(sol.cls, sol.s, sol.R, t).first / sol.R;
    }
    return d;
  }
};

double unwrap_near(double angle, double previous) {
  return angle + 2.0 * kPi * std::round((previous - angle) / (2.0 * kPi));
}

// Effective potential crosses (1 + band) k^2 below R.
double switch_radius(const Model& m, double band) {
  const double target = (1.0 + band) * m.sol.k * m.sol.k;
  auto g = [&](double r) {
    const double lv = m.log_potential(r);
    if (lv > kLogQMax) return HUGE_VAL;
    return m.potential(r) + m.centrifugal(r) - target;
  };
  double hi = m.sol.R;
  if (!(g(hi) < 0.0)) {
    throw Error(ErrorKind::oracle_failure, "oracle: effective potential at R is not below the switch level",
                {{"R", hi}, {"Veff_minus_target", g(hi)}});
  }
  double lo = 0.5 * hi;
  while (!(g(lo) > 0.0)) {
    hi = lo;
    lo *= 0.5;
    if (lo < 1e-12 * m.sol.R) {
      throw Error(ErrorKind::oracle_failure, "oracle: no forbidden core found", {{"R", m.sol.R}});
    }
  }
  double glo = g(lo);
  if (!std::isfinite(glo)) {
    // bisect in from the overflow side until the residual is representable
    double a = lo, b = hi;
    for (int i = 0; i < 200 && !std::isfinite(glo); ++i) {
      const double mid = 0.5 * (a + b);
      const double gm = g(mid);
      if (gm > 0.0) {
        a = mid;
        glo = gm;
      } else {
        b = mid;
      }
    }
    lo = a;
    hi = b;
  }
  return numerics::safeguarded_root(g, lo, hi, glo, g(hi), 0.0, 1e-15).x;
}

double riccati_phase(const Model& m, double r_a, double r_b) {
  auto sq = [&](double r) {
    const double q = m.f(r);
    return q > 0.0 ? std::sqrt(q) : 0.0;
  };
  const auto br = numerics::graded_breaks(r_b, r_a, 0.02 * (r_b - r_a), 2.0);
  std::vector<double> asc(br.rbegin(), br.rend());
  return numerics::integrate(sq, asc, 1e-8, 1e-6).value;
}

double auto_start(const Model& m, double r_sw, const OracleConfig& cfg) {
  double r = r_sw;
  for (int j = 0; j < 60; ++j) {
    r = r_sw * std::pow(0.5, 0.25 * (j + 1));
    if (m.log_potential(r) > kLogQMax) break;
    if (riccati_phase(m, r, r_sw) >= cfg.start_phase) return r;
  }
  // the phase target is out of reach before overflow; back off to a safe depth
  double a = r, b = r_sw;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (a + b);
    if (m.log_potential(mid) > 0.5 * kLogQMax) a = mid;
    else b = mid;
  }
  return b;
}

// One 3-stage Radau IIA step (order 5, L-stable) for y' = Q(r) - y^2.
// Returns false when the simplified Newton iteration does not converge.
// `area` receives the step's quadrature of y, which advances ln u.
bool radau_step(const Model& m, double r, double y, double h, double& y_out, double& area) {
  static const double s6 = std::sqrt(6.0);
  static const double c[3] = {(4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0};
  static const double A[3][3] = {{(88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0, (-2.0 + 3.0 * s6) / 225.0},
                                 {(296.0 + 169.0 * s6) / 1800.0, (88.0 + 7.0 * s6) / 360.0, (-2.0 - 3.0 * s6) / 225.0},
                                 {(16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0}};
  double Q[3], Z[3];
  for (int i = 0; i < 3; ++i) {
    Q[i] = m.f(r + c[i] * h);
    if (!std::isfinite(Q[i])) return false;
  }
  for (double& z : Z) z = 0.0;
  for (int it = 0; it < 30; ++it) {
    double F[3], J[3][3];
    for (int i = 0; i < 3; ++i) {
      F[i] = Z[i];
      for (int j = 0; j < 3; ++j) {
        const double yj = y + Z[j];
        F[i] -= h * A[i][j] * (Q[j] - yj * yj);
        J[i][j] = (i == j ? 1.0 : 0.0) + h * A[i][j] * 2.0 * yj;
      }
    }
    // Gaussian elimination with partial pivoting on the 3x3 Newton system
    double b[3] = {-F[0], -F[1], -F[2]};
    int piv[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
      int best = col;
      for (int row = col + 1; row < 3; ++row) {
        if (std::abs(J[piv[row]][col]) > std::abs(J[piv[best]][col])) best = row;
      }
      std::swap(piv[col], piv[best]);
      const double d = J[piv[col]][col];
      if (d == 0.0 || !std::isfinite(d)) return false;
      for (int row = col + 1; row < 3; ++row) {
        const double fct = J[piv[row]][col] / d;
        for (int k = col; k < 3; ++k) J[piv[row]][k] -= fct * J[piv[col]][k];
        b[piv[row]] -= fct * b[piv[col]];
      }
    }
    double dZ[3];
    for (int col = 2; col >= 0; --col) {
      double acc = b[piv[col]];
      for (int k = col + 1; k < 3; ++k) acc -= J[piv[col]][k] * dZ[k];
      dZ[col] = acc / J[piv[col]][col];
    }
    double change = 0.0;
    for (int i = 0; i < 3; ++i) {
      Z[i] += dZ[i];
      change = std::max(change, std::abs(dZ[i]));
    }
    if (!std::isfinite(change)) return false;
    if (change <= 1e-15 * std::max(1.0, std::abs(y) + std::abs(Z[2]))) {
      y_out = y + Z[2];
      area = 0.0;
      for (int j = 0; j < 3; ++j) area += h * A[2][j] * (y + Z[j]);
      return true;
    }
  }
  return false;
}

std::vector<OracleSample> numerov(const Model& m, double r0, double u0, double du0, double r_end, double h_req) {
  const std::size_t n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((r_end - r0) / h_req)));
  const double h = (r_end - r0) / static_cast<double>(n);
  const double h2 = h * h;

  // second starting value from a tightly controlled explicit step pair
  std::array<double, 2> x{u0, du0};
  auto rhs = [&](const std::array<double, 2>& y, std::array<double, 2>& dy, double r) {
    dy[0] = y[1];
    dy[1] = m.f(r) * y[0];
  };
  odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<std::array<double, 2>>>(1e-15, 1e-14),
                             rhs, x, r0, r0 + h, 0.01 * h);

  std::vector<double> u(n + 2), fr(n + 2);
  for (std::size_t i = 0; i < n + 2; ++i) fr[i] = m.f(r0 + h * static_cast<double>(i));
  u[0] = u0;
  u[1] = x[0];
  for (std::size_t i = 1; i + 1 < n + 2; ++i) {
    u[i + 1] = (2.0 * (1.0 + 5.0 * h2 * fr[i] / 12.0) * u[i] - (1.0 - h2 * fr[i - 1] / 12.0) * u[i - 1]) /
               (1.0 - h2 * fr[i + 1] / 12.0);
  }
  std::vector<OracleSample> out(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    OracleSample& s = out[i];
    s.r = r0 + h * static_cast<double>(i);
    s.u = u[i];
    if (i == 0) {
      s.du = du0;
    } else {
      // fourth-order derivative from the recursion's own neighbours
      s.du = (u[i + 1] - u[i - 1]) / (2.0 * h) - h / 12.0 * (fr[i + 1] * u[i + 1] - fr[i - 1] * u[i - 1]);
    }
    s.log_abs_u = std::log(std::abs(s.u));
  }
  out.back().r = r_end;
  return out;
}

double default_r_max(const MatchingSolution& sol, bool with_potential) {
  double r = std::max(20.0 / sol.k, 3.2 * sol.R);
  if (with_potential) {
    const Model m{sol, true};
    const double bound = 1e-10 * sol.k * sol.k;
    double rr = std::max(sol.R, 1e-300);
    while (m.potential(rr) >= bound) {
      rr *= 1.1;
      if (rr > 1e9 * sol.R) throw Error(ErrorKind::oracle_failure, "oracle: potential does not decay", {{"r", rr}});
    }
    r = std::max(r, rr);
  }
  return r;
}

}  // namespace

const char* to_string(OracleMode mode) noexcept {
  switch (mode) {
    case OracleMode::potential: return "potential";
    case OracleMode::free: return "free";
    case OracleMode::hard_wall: return "hard_wall";
  }
  return "unknown";
}

void OracleConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) {
    throw Error(ErrorKind::config, "oracle: tolerances must be positive", {{"rtol", rtol}, {"atol", atol}});
  }
  if (start_depth < 0.0 || start_depth >= 1.0) {
    throw Error(ErrorKind::config, "oracle: start depth must lie in (0, 1) (0 = automatic)",
                {{"start_depth", start_depth}});
  }
  if (!(start_phase > 0.0)) throw Error(ErrorKind::config, "oracle: start phase must be positive");
  if (r_max < 0.0 || step < 0.0) throw Error(ErrorKind::config, "oracle: r_max and step must be non-negative");
  if (!(switch_band >= 0.0)) throw Error(ErrorKind::config, "oracle: switch band must be non-negative");
  if (mode == OracleMode::hard_wall && !(wall_radius > 0.0)) {
    throw Error(ErrorKind::config, "oracle: wall radius must be positive", {{"wall_radius", wall_radius}});
  }
}

double OracleSolution::value_at(double r) const {
  if (samples.empty()) throw Error(ErrorKind::domain, "oracle: empty solution");
  std::vector<double> rs(samples.size());
  for (std::size_t i = 0; i < rs.size(); ++i) rs[i] = samples[i].r;
  if (r < rs.front() || r > rs.back()) {
    throw Error(ErrorKind::domain, "oracle: radius outside the integrated range",
                {{"r", r}, {"r_lo", rs.front()}, {"r_hi", rs.back()}});
  }
  const std::size_t i = numerics::locate(rs, r);
  const OracleSample& a = samples[i];
  const OracleSample& b = samples[std::min(i + 1, samples.size() - 1)];
  if (b.r == a.r) return a.u;
  if (i + 1 < switch_index || (i + 1 == switch_index && a.u != 0.0)) {
    // core: interpolate ln|u| with slope u'/u, the sign is fixed there
    const double lu = numerics::hermite(r, a.r, b.r, a.log_abs_u, b.log_abs_u, a.du / a.u, b.du / b.u);
    return std::copysign(std::exp(lu), a.u);
  }
  return numerics::hermite(r, a.r, b.r, a.u, b.u, a.du, b.du);
}

double OracleSolution::derivative_at(double r) const {
  const double h = 1e-6 * std::max(1.0, std::abs(r));
  const double lo = std::max(samples.front().r, r - h), hi = std::min(samples.back().r, r + h);
  return (value_at(hi) - value_at(lo)) / (hi - lo);
}

std::vector<OracleSample> integrate_allowed(const MatchingSolution& sol, bool with_potential, double r0, double u0,
                                            double du0, double r_end, double h) {
  if (!(r_end > r0) || !(h > 0.0)) {
    throw Error(ErrorKind::domain, "integrate_allowed: need r_end > r0 and h > 0", {{"r0", r0}, {"r_end", r_end}});
  }
  return numerov(Model{sol, with_potential}, r0, u0, du0, r_end, h);
}

OracleSolution integrate_regular(const MatchingSolution& sol, const OracleConfig& cfg) {
  cfg.validate();
  const bool with_potential = cfg.mode == OracleMode::potential && !sol.potential_removed;
  const Model m{sol, with_potential};
  const double k = sol.k;
  const int l = sol.triad.l;
  OracleSolution out;
  out.with_potential = with_potential;
  out.r_max = cfg.r_max > 0.0 ? cfg.r_max : default_r_max(sol, with_potential);
  // Numerov's phase error accumulates as (k r)(k h)^4 / 480 and rounding as
  // eps (k r) / (k h)^2; this step puts the first near rtol / 10
  const double h = cfg.step > 0.0 ? cfg.step : std::pow(48.0 * cfg.rtol / (k * out.r_max), 0.25) / k;

  double r0 = 0.0, u0 = 0.0, du0 = 1.0;
  if (with_potential) {
    const double r_sw = switch_radius(m, cfg.switch_band);
    const double r_start = cfg.start_depth > 0.0 ? cfg.start_depth * sol.R : auto_start(m, r_sw, cfg);
    if (!(r_start < r_sw)) {
      throw Error(ErrorKind::config, "oracle: start radius is not inside the forbidden core",
                  {{"r_start", r_start}, {"r_switch", r_sw}});
    }
    if (m.log_potential(r_start) > kLogQMax) {
      throw Error(ErrorKind::oracle_failure, "oracle: potential overflows at the start radius",
                  {{"r_start", r_start}, {"log_potential", m.log_potential(r_start)}});
    }
    out.r_start = r_start;
    out.r_switch = r_sw;

    double y = std::sqrt(m.f(r_start));
    double log_u = 0.0;
    double r = r_start;
    const double max_dt = 0.005 * sol.R;
    double dt = std::min(max_dt, 1.0 / y);
    std::vector<OracleSample> core;
    core.push_back({r, 0.0, y, 0.0});
    while (r < r_sw) {
      const double step = std::min(dt, r_sw - r);
      // step doubling: one full step against two half steps
      double y_full = 0.0, a_full = 0.0, y_half = 0.0, a1 = 0.0, y_two = 0.0, a2 = 0.0;
      const bool ok = radau_step(m, r, y, step, y_full, a_full) && radau_step(m, r, y, 0.5 * step, y_half, a1) &&
                      radau_step(m, r + 0.5 * step, y_half, 0.5 * step, y_two, a2);
      double ratio = 10.0;
      if (ok) {
        const double err_y = std::abs(y_two - y_full) / 31.0 / (cfg.atol + cfg.rtol * std::abs(y_two));
        const double err_a = std::abs(a1 + a2 - a_full) / 31.0 / (cfg.atol + cfg.rtol * std::max(1.0, std::abs(log_u)));
        ratio = std::max(err_y, err_a);
      }
      if (ok && ratio <= 1.0) {
        r = step == r_sw - r ? r_sw : r + step;
        y = y_two;
        log_u += a1 + a2;
        core.push_back({r, 0.0, y, log_u});
        ++out.riccati_steps;
        const double grow = ratio > 0.0 ? 0.9 * std::pow(ratio, -1.0 / 6.0) : 4.0;
        dt = std::min(max_dt, step * std::clamp(grow, 0.2, 4.0));
      } else {
        dt = step * (ok ? std::clamp(0.9 * std::pow(ratio, -1.0 / 6.0), 0.1, 0.5) : 0.25);
        if (dt < 1e-14 * r) {
          throw Error(ErrorKind::oracle_failure, "oracle: Riccati step underflow", {{"r", r}, {"dt", dt}, {"y", y}});
        }
      }
    }
    // normalize to u(r_switch) = 1
    const double log_sw = core.back().log_abs_u;
    for (auto& s : core) {
      const double y = s.du;
      s.log_abs_u -= log_sw;
      s.u = std::exp(s.log_abs_u);
      s.du = y * s.u;
    }
    r0 = r_sw;
    u0 = 1.0;
    du0 = core.back().du;
    core.pop_back();
    out.samples = std::move(core);
  } else if (cfg.mode == OracleMode::hard_wall) {
    r0 = cfg.wall_radius;
    out.r_start = out.r_switch = r0;
  } else {
    // free: exact start at the origin for l = 0, else well clear of the centrifugal pole
    r0 = l == 0 ? 0.0 : 100.0 * h;
    if (l == 0) {
      u0 = 0.0;
      du0 = k;
    } else {
      const RiccatiBessel rb = riccati_bessel(l, k * r0);
      u0 = rb.j;
      du0 = k * rb.dj;
    }
    out.r_start = out.r_switch = r0;
  }
  if (!(out.r_max > r0)) {
    throw Error(ErrorKind::config, "oracle: r_max must exceed the start of the oscillatory phase",
                {{"r_max", out.r_max}, {"r0", r0}});
  }
  out.switch_index = out.samples.size();
  auto tail = numerov(m, r0, u0, du0, out.r_max, h);
  out.recursion_steps = tail.size() - 1;
  out.samples.insert(out.samples.end(), tail.begin(), tail.end());

  double theta = std::atan2(k * u0, du0);
  for (std::size_t i = out.switch_index + 1; i < out.samples.size(); ++i) {
    theta = unwrap_near(std::atan2(k * out.samples[i].u, out.samples[i].du), theta);
  }
  out.prufer = theta;
  return out;
}

PhaseShift phase_shift_oracle(const MatchingSolution& sol, const OracleSolution& run) {
  const OracleSample& s = run.samples.back();
  if (run.with_potential) {
    const double V = potential_value(sol.cls, sol.s, sol.R, s.r).value;
    if (!(V < 1e-10 * sol.k * sol.k)) {
      throw Error(ErrorKind::not_asymptotic, "phase_shift_oracle: potential at r_max is not negligible",
                  {{"r_max", s.r}, {"potential", V}});
    }
  }
  const double estimate = run.prufer - (sol.k * s.r - 0.5 * sol.triad.l * kPi);
  return extract_phase(sol.triad.l, sol.k, s.r, s.u, s.du, estimate);
}

PhaseShift phase_shift_oracle(const MatchingSolution& sol, const OracleConfig& cfg) {
  return phase_shift_oracle(sol, integrate_regular(sol, cfg));
}

void write_oracle_csv(std::ostream& out, const OracleSolution& run) {
  out << "r[length],u[1],du_dr[1/length],log_abs_u[1]\n";
  char buf[256];
  for (const auto& s : run.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s.r, s.u, s.du, s.log_abs_u);
    out << buf;
  }
}

}  // namespace singscat

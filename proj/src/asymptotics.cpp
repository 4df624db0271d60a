#include "singscat/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "singscat/error.hpp"
#include "singscat/numerics.hpp"

namespace singscat {

namespace {

const double kLn16 = std::log(16.0);

LogValue from_log(double log_abs, int sign) {
  LogValue v;
  v.log_abs = log_abs;
  v.sign = sign;
  v.value = sign * std::exp(log_abs);
  return v;
}

LogValue from_value(double x) {
  LogValue v;
  v.value = x;
  v.sign = x > 0.0 ? 1 : (x < 0.0 ? -1 : 0);
  v.log_abs = x == 0.0 ? -INFINITY : std::log(std::abs(x));
  return v;
}

// sign * e^{a} + b without overflow
LogValue exp_plus(int sign, double a, double b) {
  if (a < 700.0) return from_value(sign * std::exp(a) + b);
  const double ratio = 1.0 + sign * b * std::exp(-a);
  return from_log(a + std::log(std::abs(ratio)), ratio > 0.0 ? sign : -sign);
}

std::string tag_of(const PotentialClass& c) { return c.tag(); }

// ln of R^{sigma0 + sigma2} / (r0^sigma0 r2^sigma2)
double log_lambda(const PotentialClass& c, double R) {
  return (c.sigma0 + c.sigma2) * std::log(R) - c.sigma0 * std::log(c.r0) - c.sigma2 * std::log(c.r2);
}

void require_eps_t(double t, const char* where) {
  if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorKind::domain, std::string(where) + ": epsilon needs 0 < t <= 1", {{"t", t}});
}

}  // namespace

double asymptotic_stage_log_rhs(const PotentialClass& cls, double k, const AngularTriad& triad, double R) {
  if (!(R > 0.0)) throw Error(ErrorKind::domain, "asymptotic_stage: R must be positive", {{"R", R}});
  const double ek = 2.0 * std::log(k) + 2.0 * std::log(cls.r0);  // ln k^2 r0^2
  auto reduced = [&] {
    const double u = k * k - triad.lambda_sq / (R * R);
    if (!(u > 0.0)) {
      throw Error(ErrorKind::pre_asymptotic, "asymptotic_stage: k^2 - lambda^2/R^2 is not positive", {{"R", R}});
    }
    return std::log(u) + 2.0 * std::log(cls.r0);
  };
  const std::string tag = cls.tag();
  if (tag == "EEE") return reduced() + R * (1.0 / cls.r0 + 1.0 / cls.r2);
  if (tag == "EEP") return reduced() + R / cls.r0 + cls.sigma2 * std::log(R / cls.r2);
  if (tag == "PEE" || tag == "PPE") return ek + cls.sigma0 * std::log(R / cls.r0) + R / cls.r2;
  if (tag == "PEP" || tag == "PPP") return ek + cls.sigma0 * std::log(R / cls.r0) + cls.sigma2 * std::log(R / cls.r2);
  if (tag == "EPE") return ek + R * (1.0 / cls.r0 + 1.0 / cls.r2);
  return ek + cls.sigma2 * std::log(R / cls.r2);  // EPP: no e^{R/r0} in the printed form
}

double asymptotic_stage(const PotentialClass& cls, double k, const AngularTriad& triad, double R) {
  const double lr = asymptotic_stage_log_rhs(cls, k, triad, R);
  if (!(lr > 0.0)) {
    throw Error(ErrorKind::pre_asymptotic, "asymptotic_stage: right-hand side does not exceed 1",
                {{"R", R}, {"log_rhs", lr}});
  }
  return R / cls.r1 * lr;
}

LogValue asymptotic_k_squared(Region region, const MatchingSolution& sol, double t) {
  const PotentialClass& c = sol.cls;
  const double R = sol.R, k = sol.k;
  const double lk2 = 2.0 * std::log(k);
  const double ek = lk2 + 2.0 * std::log(c.r0);
  const std::string tag = c.tag();
  if (region == Region::tau) {
    if (!(t >= 1.0)) throw Error(ErrorKind::domain, "asymptotic_k_squared: tau needs t >= 1", {{"t", t}});
  } else {
    require_eps_t(t, "asymptotic_k_squared");
  }
  const double u = 1.0 / t - 1.0;
  const double cent = (region == Region::epsilon ? sol.triad.lambda_eps_sq : sol.triad.lambda_tau_sq) / (R * R * t * t);
  if (tag == "EEE" || tag == "EEP") {
    // -+ k^2 {1 - e^X - lambda_gamma^2 / (k R t)^2}
    const double X = tag == "EEE" ? u * ek + R * ((1.0 / c.r0 + 1.0 / c.r2) / t - (1.0 / c.r0 + t / c.r2))
                                  : u * (ek + R / c.r0 + c.sigma2 * std::log(R / c.r2));
    if (region == Region::epsilon) return exp_plus(1, lk2 + X, cent - k * k);
    return exp_plus(-1, lk2 + X, k * k - cent);
  }
  if (region == Region::tau) return from_value(k * k - cent);
  double lg = 0.0;
  if (tag == "PEE") {
    lg = lk2 + u * ek + c.sigma0 * u * std::log(R / c.r0) + R / c.r2 * (1.0 / t - t);
  } else if (tag == "PEP") {
    lg = lk2 + u * (ek + log_lambda(c, R)) - c.sigma2 * std::log(t);
  } else if (tag == "EPE") {
    lg = -2.0 * std::log(c.r0) + (ek + R * (1.0 / c.r0 + 1.0 / c.r2)) / t - R * (1.0 / c.r0 + t / c.r2);
  } else if (tag == "EPP") {
    lg = lk2 - c.sigma2 * std::log(t) + u * (ek + R / c.r0 + c.sigma2 * std::log(R / c.r2));
  } else if (tag == "PPP") {
    lg = lk2 - c.sigma2 * std::log(t) + u * (ek + c.sigma0 * std::log(R / c.r0) + c.sigma2 * std::log(R / c.r2));
  } else {  // PPE
    lg = lk2 + u * (ek + c.sigma0 * std::log(R / c.r0)) + R / c.r2 * (1.0 / t - t);
  }
  return from_log(lg, 1);
}

LogValue asymptotic_discriminant_eps(const MatchingSolution& sol, double t) {
  require_eps_t(t, "asymptotic_discriminant_eps");
  const PotentialClass& c = sol.cls;
  const double R = sol.R, k = sol.k;
  const double u = 1.0 / t - 1.0;
  const double lt = std::log(t);
  const double lkR = std::log(k * R);
  const std::string tag = c.tag();
  int sign = -1;
  double lg = 0.0;
  if (tag == "EEE") {
    lg = std::log(R / (16.0 * k)) + 2.0 * std::log((1.0 / c.r0 + 1.0 / c.r2) / (t * t) + 1.0 / c.r2) -
         0.5 * R * (u / c.r0 + (1.0 / t - t) / c.r2);
  } else if (tag == "EEP") {
    const double sg = c.sigma2;
    lg = -kLn16 - u * std::log(k * c.r0) + (0.5 * sg - 4.0) * lt - lkR + (0.5 * sg - 3.0) * std::log(c.r2 / R) -
         R / (2.0 * c.r0) * u;
  } else if (tag == "PEE") {
    lg = -kLn16 + 2.0 * std::log(1.0 / (t * t) + 1.0) - lkR + 2.0 * std::log(R / c.r0) + (1.0 - 1.0 / t) * std::log(k * c.r0) +
         0.5 * c.sigma0 * u * std::log(c.r0 / R) - R / (2.0 * c.r2) * (1.0 / t - t);
  } else if (tag == "PEP") {
    const double LL = log_lambda(c, R);
    if (LL < 0.0) sign = 1;
    lg = -kLn16 + (0.5 * c.sigma2 - 4.0) * lt - lkR + std::log(std::abs(LL)) - 0.5 * u * LL;
  } else if (tag == "EPE") {
    const double a = 1.0 / c.r0 + 1.0 / c.r2;
    lg = -kLn16 + 2.0 * std::log(a) + std::log(c.r0 * R) - 4.0 * lt - 0.5 * R * a / t;
  } else if (tag == "EPP") {
    lg = -kLn16 + std::log(R) - 2.0 * std::log(c.r0 * k) - 4.0 * lt - R / c.r0 * u;
  } else if (tag == "PPP") {
    const double LL = log_lambda(c, R);
    if (LL < 0.0) sign = 1;
    lg = -kLn16 + std::log(std::abs(LL)) - lkR + 0.5 * (c.sigma2 - 4.0) * lt -
         0.5 * u * (2.0 * std::log(k * c.r0) + LL);
  } else {  // PPE
    lg = -kLn16 - lkR + 2.0 * std::log(R / c.r2) + 2.0 * std::log(1.0 / (t * t) + 1.0) - R / c.r2 * (1.0 / t - t);
  }
  return from_log(lg, sign);
}

double asymptotic_discriminant_tau(const MatchingSolution& sol, double t) {
  if (!(t >= 1.0)) throw Error(ErrorKind::domain, "asymptotic_discriminant_tau: needs t >= 1", {{"t", t}});
  const double kR = sol.k * sol.R;
  return -1.5 * sol.triad.lambda_tau_sq / (kR * kR * t * t * t * t);
}

MatchCoefficients leading_coefficients(const MatchingSolution& sol) {
  // eps side at t = 1: w = a, w' = a (RK - r1/4); tau side: amp (C cos + S sin)
  const LocalSample e = local_sample(Region::epsilon, sol, 1.0);
  const LocalSample tt = local_sample(Region::tau, sol, 1.0);
  const double amp = std::pow(sol.k * sol.k / e.k2, 0.25);
  const double amp_t = std::pow(sol.k * sol.k / tt.k2, 0.25);
  const double RKe = sol.R * std::sqrt(e.k2), RKt = sol.R * std::sqrt(tt.k2);
  MatchCoefficients m;
  m.N = 0;
  m.M = 0;
  m.c_plus = amp / amp_t;
  m.s_plus = (amp * (RKe - 0.25 * e.r1) + 0.25 * tt.r1 * amp_t * m.c_plus) / (amp_t * RKt);
  m.determinant = amp_t * amp_t * RKt;
  return m;
}

WaveValue asymptotic_wavefunction(const MatchingSolution& sol, const MatchCoefficients& coeffs0, double t) {
  WaveValue w;
  w.t = t;
  if (t <= 1.0) {
    const WaveTermSample s = leading_term(Region::epsilon, +1, sol, t);
    const LocalSample ls = local_sample(Region::epsilon, sol, t);
    w.log_abs = s.log_abs;
    w.sign = s.sign;
    w.value = s.value;
    w.derivative = s.value * (sol.R * std::sqrt(ls.k2) - 0.25 * ls.r1);
    return w;
  }
  const WaveTermSample s = leading_term(Region::tau, +1, sol, t, coeffs0.c_plus, coeffs0.s_plus);
  const LocalSample ls = local_sample(Region::tau, sol, t);
  const double RK = sol.R * std::sqrt(ls.k2);
  // the phase at t is recovered from the value and the quadrature pair
  const double theta = sol.R * numerics::integrate([&](double x) { return std::sqrt(k_squared(Region::tau, sol, x)); },
                                                   std::vector<double>{1.0, t}, 0.0, 1e-11)
                                   .value;
  const double amp = std::pow(sol.k * sol.k / ls.k2, 0.25);
  const double C = coeffs0.c_plus, S = coeffs0.s_plus;
  w.value = s.value;
  w.sign = s.sign;
  w.log_abs = s.log_abs;
  w.derivative = -0.25 * ls.r1 * w.value + amp * RK * (-C * std::sin(theta) + S * std::cos(theta));
  return w;
}

ReductionDeviation leading_deviation(const ScatteringResult& full, const SeriesOptions& opts, double t_lo, double t_hi,
                                     int samples) {
  if (!(t_hi > t_lo) || samples < 2) {
    throw Error(ErrorKind::domain, "leading_deviation: need t_hi > t_lo and at least two samples");
  }
  SeriesOptions lead = opts;
  lead.N = 0;
  lead.M = 0;
  const ScatteringResult& a = full;
  const ScatteringResult b = solve_series(full.sol, lead);
  ReductionDeviation out;
  out.delta_full = a.phase;
  out.delta_leading = b.phase;
  // below the epsilon grid start both sums are under e^-700 of their seam
  // values and cannot move a sup-norm
  const double lo = std::max({t_lo, a.t_start, b.t_start});
  const double hi = std::min({t_hi, a.t_far, b.t_far});
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = lo + (hi - lo) * i / (samples - 1);
    const double ua = wavefunction(a, t).value, ub = wavefunction(b, t).value;
    out.sup_full = std::max(out.sup_full, std::abs(ua));
    if (std::abs(ua - ub) > worst) {
      worst = std::abs(ua - ub);
      out.t_at_max = t;
    }
  }
  out.deviation = worst / out.sup_full;
  return out;
}

ReductionDeviation leading_deviation(const MatchingSolution& sol, const SeriesOptions& full, double t_lo, double t_hi,
                                     int samples) {
  return leading_deviation(solve_series(sol, full), full, t_lo, t_hi, samples);
}

double order_ratio(const PotentialClass& cls, double k, const AngularTriad& triad, double R) {
  const double s = solve_stage(cls, k, triad, R);
  const std::string tag = cls.tag();
  double order = 0.0;
  if (tag == "EEE") order = R * R / (cls.r0 * cls.r2);
  else if (tag == "EEP") order = R * R / (cls.r0 * cls.r1);
  else if (tag == "PEE" || tag == "PPE") order = R * R / (cls.r1 * cls.r2);
  else if (tag == "EPE") order = R * R;
  else order = R / cls.r1;  // PEP, EPP, PPP
  return s / order;
}

AsymptoticRow compare_discriminant(const MatchingSolution& sol, double t) {
  AsymptoticRow row;
  row.cls = tag_of(sol.cls);
  row.quantity = "p_eps";
  row.R = sol.R;
  row.t = t;
  const LocalSample s = local_sample(Region::epsilon, sol, t);
  row.exact = from_log(s.log_abs_p, s.p_sign);
  row.asymptotic = asymptotic_discriminant_eps(sol, t);
  row.log_deviation = std::abs(row.exact.log_abs - row.asymptotic.log_abs);
  return row;
}

AsymptoticRow compare_k_squared(Region region, const MatchingSolution& sol, double t) {
  AsymptoticRow row;
  row.cls = tag_of(sol.cls);
  row.quantity = region == Region::epsilon ? "K2_eps" : "K2_tau";
  row.R = sol.R;
  row.t = t;
  const double k2 = k_squared(region, sol, t);
  if (std::isfinite(k2)) {
    row.exact = from_value(k2);
  } else {
    row.exact = from_log(log_k_squared(region, sol, t), 1);
  }
  row.asymptotic = asymptotic_k_squared(region, sol, t);
  row.log_deviation = std::abs(row.exact.log_abs - row.asymptotic.log_abs);
  return row;
}

AsymptoticRow compare_stage(const PotentialClass& cls, double k, const AngularTriad& triad, double R) {
  AsymptoticRow row;
  row.cls = tag_of(cls);
  row.quantity = "stage";
  row.R = R;
  row.t = 1.0;
  row.exact = from_value(solve_stage(cls, k, triad, R));
  row.asymptotic = from_value(asymptotic_stage(cls, k, triad, R));
  row.log_deviation = std::abs(row.exact.log_abs - row.asymptotic.log_abs);
  return row;
}

void write_asymptotic_csv(std::ostream& out, const std::vector<AsymptoticRow>& rows) {
  out << "class,quantity,R[length],t[1],exact[varies],asymptotic[varies],log_abs_exact[1],log_abs_asymptotic[1],"
         "log_deviation[1]\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.cls.c_str(), r.quantity.c_str(),
                  r.R, r.t, r.exact.value, r.asymptotic.value, r.exact.log_abs, r.asymptotic.log_abs,
                  r.log_deviation);
    out << buf;
  }
}

}  // namespace singscat

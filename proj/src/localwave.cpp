#include "singscat/localwave.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "singscat/error.hpp"
#include "singscat/numerics.hpp"

namespace singscat {

namespace {

constexpr double kLogUnderflow = -745.0;

double lambda_gamma_sq(Region region, const AngularTriad& tr) {
  return region == Region::epsilon ? tr.lambda_eps_sq : tr.lambda_tau_sq;
}

double region_sign(Region region) { return region == Region::epsilon ? 1.0 : -1.0; }

void require_positive_t(double t, const char* where) {
  if (!(t > 0.0)) throw Error(ErrorKind::domain, std::string(where) + ": t must be positive", {{"t", t}});
}

// The potential enters as V(R t) = u_R * exp(L(t)), with L(1) = 0 exactly.
// Writing K^2 as
//   eps: u_R expm1(L) + (lambda_eps^2 / t^2 - lambda^2) / R^2
//   tau: -u_R expm1(L) + (lambda^2 - lambda_tau^2 / t^2) / R^2
// keeps both terms of one sign on their own side of the seam.
struct Pieces {
  double log_k2;
  double k2;
  double log_v;  // -inf when the potential is removed
  double v;
  double L1;
  double L2;
};

Pieces pieces(Region region, const MatchingSolution& sol, double t) {
  const double R = sol.R;
  const double lg = lambda_gamma_sq(region, sol.triad);
  const double sg = region_sign(region);
  Pieces out{};
  if (sol.potential_removed) {
    out.log_v = -INFINITY;
    out.v = 0.0;
    out.k2 = sg * (lg / (R * R * t * t) - sol.k * sol.k);
    out.log_k2 = out.k2 > 0.0 ? std::log(out.k2) : NAN;
    return out;
  }
  const double L = log_potential_ratio(sol.cls, sol.s, R, t);
  const auto d = log_potential_derivatives(sol.cls, sol.s, R, t);
  out.L1 = d.first;
  out.L2 = d.second;
  out.log_v = std::log(sol.u_R) + L;
  out.v = std::exp(out.log_v);
  const double centrifugal = region == Region::epsilon ? (lg / (t * t) - sol.triad.lambda_sq) / (R * R)
                                                       : (sol.triad.lambda_sq - lg / (t * t)) / (R * R);
  if (L <= 700.0) {
    out.k2 = sg * sol.u_R * std::expm1(L) + centrifugal;
    out.log_k2 = out.k2 > 0.0 ? std::log(out.k2) : NAN;
  } else {
    // deep in the core: K^2 / V = sg (1 - e^{-L}) + centrifugal / V
    const double ratio = -sg * std::expm1(-L) + centrifugal * std::exp(-out.log_v);
    const double log_abs = out.log_v + std::log(std::abs(ratio));
    out.k2 = ratio > 0.0 ? std::exp(log_abs) : -std::exp(log_abs);
    out.log_k2 = ratio > 0.0 ? log_abs : NAN;
  }
  return out;
}

// |p| has kinks where Delta changes sign; adaptive quadrature handles them
// badly, so each panel is scanned and the crossings become breakpoints.
std::vector<double> with_sign_changes(Region region, const MatchingSolution& sol, const std::vector<double>& br) {
  auto delta = [&](double t) { return local_sample(region, sol, t).delta; };
  std::vector<double> out{br.front()};
  constexpr int kScan = 32;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    const double a = br[i], b = br[i + 1];
    double x0 = a, f0 = delta(a);
    for (int j = 1; j <= kScan; ++j) {
      const double x1 = a + (b - a) * j / kScan;
      const double f1 = delta(x1);
      if (std::isfinite(f0) && std::isfinite(f1) && f0 * f1 < 0.0) {
        const double lo = std::min(x0, x1), hi = std::max(x0, x1);
        const double flo = x0 < x1 ? f0 : f1, fhi = x0 < x1 ? f1 : f0;
        const double root = numerics::safeguarded_root(delta, lo, hi, flo, fhi, 0.0, 1e-14).x;
        if (std::abs(root - out.back()) > 1e-12 * std::abs(root)) out.push_back(root);
      }
      x0 = x1;
      f0 = f1;
    }
    out.push_back(b);
  }
  return out;
}

}  // namespace

const char* to_string(Region region) noexcept { return region == Region::epsilon ? "epsilon" : "tau"; }

double k_squared(Region region, const MatchingSolution& sol, double t) {
  require_positive_t(t, "k_squared");
  return pieces(region, sol, t).k2;
}

double log_k_squared(Region region, const MatchingSolution& sol, double t) {
  require_positive_t(t, "log_k_squared");
  const Pieces pc = pieces(region, sol, t);
  if (!(pc.k2 > 0.0)) {
    throw Error(ErrorKind::domain, "log_k_squared: K^2 is not positive", {{"t", t}, {"K2", pc.k2}});
  }
  return pc.log_k2;
}

KSquaredDerivatives k_squared_derivatives(Region region, const MatchingSolution& sol, double t) {
  require_positive_t(t, "k_squared_derivatives");
  const Pieces pc = pieces(region, sol, t);
  const double R = sol.R;
  const double lg = lambda_gamma_sq(region, sol.triad);
  const double sg = region_sign(region);
  const double c1 = -2.0 * lg / (R * R * t * t * t);
  const double c2 = 6.0 * lg / (R * R * t * t * t * t);
  if (sol.potential_removed) return {sg * c1, sg * c2};
  return {sg * (pc.v * pc.L1 + c1), sg * (pc.v * (pc.L2 + pc.L1 * pc.L1) + c2)};
}

LocalSample local_sample(Region region, const MatchingSolution& sol, double t) {
  require_positive_t(t, "local_sample");
  const Pieces pc = pieces(region, sol, t);
  if (!(pc.k2 > 0.0)) {
    throw Error(ErrorKind::domain, "local_sample: K^2 is not positive", {{"t", t}, {"K2", pc.k2}});
  }
  const double R = sol.R;
  const double lg = lambda_gamma_sq(region, sol.triad);
  const double sg = region_sign(region);
  const double ct = std::exp(-2.0 * std::log(R) - pc.log_k2);  // 1 / (R^2 K^2)
  const double rho = std::exp(pc.log_v - pc.log_k2);           // V / K^2
  LocalSample s;
  s.t = t;
  s.log_k2 = pc.log_k2;
  s.k2 = pc.k2;
  const auto dd = k_squared_derivatives(region, sol, t);
  s.dk2 = dd.first;
  s.d2k2 = dd.second;
  s.r1 = sg * (rho * pc.L1 - 2.0 * lg * ct / (t * t * t));
  s.r2 = sg * (rho * (pc.L2 + pc.L1 * pc.L1) + 6.0 * lg * ct / (t * t * t * t));
  if (sol.potential_removed) {
    s.r1 = sg * (-2.0 * lg * ct / (t * t * t));
    s.r2 = sg * (6.0 * lg * ct / (t * t * t * t));
  }
  const double l = sol.triad.l;
  s.delta = -(5.0 / 16.0) * s.r1 * s.r1 + 0.25 * s.r2 - (lg - l * (l + 1.0)) / (t * t);
  if (s.delta == 0.0) {
    s.p = 0.0;
    s.log_abs_p = -INFINITY;
    s.p_sign = 0;
  } else {
    s.log_abs_p = std::log(std::abs(s.delta)) - std::log(R) - 0.5 * pc.log_k2;
    s.p_sign = s.delta > 0.0 ? 1 : -1;
    s.p = s.p_sign * std::exp(s.log_abs_p);
  }
  return s;
}

double residual_delta(Region region, const MatchingSolution& sol, double t) {
  return local_sample(region, sol, t).delta;
}

double discriminant(Region region, const MatchingSolution& sol, double t) {
  return local_sample(region, sol, t).p;
}

LocalWaveProfile sample_profile(Region region, const MatchingSolution& sol, const std::vector<double>& ts) {
  LocalWaveProfile prof;
  prof.region = region;
  prof.samples.reserve(ts.size());
  for (double t : ts) prof.samples.push_back(local_sample(region, sol, t));
  if (!ts.empty()) {
    const double t_end = region == Region::epsilon ? std::min(1.0, *std::max_element(ts.begin(), ts.end()))
                                                   : std::max(1.0, *std::max_element(ts.begin(), ts.end()));
    prof.P_value = convergence_integral(region, sol, t_end).value;
  }
  return prof;
}

double seam_width(Region region, const MatchingSolution& sol) {
  const double r1 = local_sample(region, sol, 1.0).r1;
  if (!(std::abs(r1) > 1.0)) return 1.0;
  return 1.0 / std::abs(r1);
}

double epsilon_cutoff(const MatchingSolution& sol) {
  auto log_p = [&](double t) {
    const LocalSample s = local_sample(Region::epsilon, sol, t);
    return s.log_abs_p;
  };
  const double w = seam_width(Region::epsilon, sol);
  std::vector<double> scan;
  for (double x = w; x < 0.5; x *= 2.0) scan.push_back(1.0 - x);
  for (double t = 0.5; t > 1e-30; t *= 0.5) scan.push_back(t);
  double prev_t = 1.0;
  bool below_once = false;
  double first_below = 0.0, before_first = 1.0;
  for (double t : scan) {
    const double lp = log_p(t);
    if (lp < kLogUnderflow) {
      if (below_once) {
        auto f = [&](double x) { return log_p(x) - kLogUnderflow; };
        const double fa = f(first_below), fb = f(before_first);
        if (fb <= 0.0) return before_first;
        const auto root = numerics::safeguarded_root(f, first_below, before_first, fa, fb, 1e-6, 1e-10);
        return root.x;
      }
      below_once = true;
      first_below = t;
      before_first = prev_t;
    } else {
      below_once = false;
    }
    prev_t = t;
  }
  return scan.back();
}

ConvergenceIntegral convergence_integral(Region region, const MatchingSolution& sol, double t_end) {
  const double R = sol.R;
  auto abs_p = [&](double t) {
    const LocalSample s = local_sample(region, sol, t);
    return s.log_abs_p < kLogUnderflow ? 0.0 : std::exp(s.log_abs_p);
  };
  ConvergenceIntegral out;
  if (region == Region::epsilon) {
    if (!(t_end > 0.0 && t_end <= 1.0)) {
      throw Error(ErrorKind::domain, "convergence_integral: epsilon needs 0 < t_end <= 1", {{"t_end", t_end}});
    }
    const double tc = epsilon_cutoff(sol);
    out.t_cutoff = tc;
    // one-term exponential bound on int_0^tc |p|
    const double h = 1e-6 * tc;
    const LocalSample s0 = local_sample(region, sol, tc);
    const double beta = (s0.log_abs_p - local_sample(region, sol, tc - h).log_abs_p) / h;
    const double p0 = std::exp(s0.log_abs_p);
    out.tail_bound = R * (beta > 0.0 ? p0 / beta : p0 * tc);
    if (t_end <= tc) {
      out.value = 0.0;
      return out;
    }
    const double w = seam_width(region, sol);
    std::vector<double> br = numerics::graded_breaks(1.0, tc, w / 4.0, 2.0);
    std::reverse(br.begin(), br.end());
    std::vector<double> kept;
    for (double b : br) {
      if (b < t_end) kept.push_back(b);
    }
    kept.push_back(t_end);
    const auto q = numerics::integrate(abs_p, with_sign_changes(region, sol, kept));
    out.value = R * q.value;
    out.abs_error = R * q.error;
    return out;
  }
  if (!(t_end >= 1.0)) {
    throw Error(ErrorKind::domain, "convergence_integral: tau needs t_end >= 1", {{"t_end", t_end}});
  }
  if (t_end == 1.0) return out;
  const double w = seam_width(region, sol);
  const auto br = numerics::graded_breaks(1.0, t_end, std::min(w / 4.0, (t_end - 1.0) / 4.0), 2.0);
  const auto q = numerics::integrate(abs_p, with_sign_changes(region, sol, br));
  out.value = R * q.value;
  out.abs_error = R * q.error;
  return out;
}

void write_profile_csv(std::ostream& out, const LocalWaveProfile& profile) {
  out << "region,t[1],K2[1/length^2],dK2_dt[1/length^2],d2K2_dt2[1/length^2],Delta[1],p[1],log_abs_p[1]\n";
  char buf[512];
  for (const auto& s : profile.samples) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", to_string(profile.region), s.t,
                  s.k2, s.dk2, s.d2k2, s.delta, s.p, s.log_abs_p);
    out << buf;
  }
}

}  // namespace singscat

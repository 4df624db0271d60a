#include "singscat/series.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "singscat/error.hpp"
#include "singscat/numerics.hpp"

namespace singscat {

namespace {

constexpr double kLogKMax = 700.0;
constexpr double kJoin = 0.1;  // epsilon grid switches to ln t spacing below this

// ln(1 + q (e^z - 1)) for 0 < q <= 1 without overflow.
double log1p_q_expm1(double q, double z) {
  if (z < 30.0) return std::log1p(q * std::expm1(z));
  return z + std::log(q) + std::log1p((1.0 - q) * std::exp(-z) / q);
}

// Offsets 0 = x_0 < ... < x_n = x_end of the stretched seam map.
std::vector<double> seam_offsets(double x_end, double a, double c, double D, int level) {
  const double A = a * c;
  const double y = c * x_end / D;
  // c xi_end = ln(1 + (A + D)/A * expm1(y))
  const double ratio = (A + D) / A;
  const double cxi_end = y < 700.0 ? std::log1p(ratio * std::expm1(y)) : std::log(ratio) + y;
  const double xi_end = cxi_end / c;
  const long n0 = std::max(1L, static_cast<long>(std::ceil(xi_end)));
  const long n = n0 << level;
  const double q = A / (A + D);
  std::vector<double> x(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i) {
    const double xi = xi_end * static_cast<double>(i) / static_cast<double>(n);
    x[static_cast<std::size_t>(i)] = D / c * log1p_q_expm1(q, c * xi);
  }
  x.front() = 0.0;
  x.back() = x_end;
  return x;
}

double local_K(Region region, const MatchingSolution& sol, double t) {
  return std::exp(0.5 * log_k_squared(region, sol, t));
}

double phase_increment(Region region, const MatchingSolution& sol, double a, double b) {
  return sol.R * numerics::gauss_legendre([&](double t) { return local_K(region, sol, t); }, a, b);
}

// E0 = int_0^d e^{-2f} df, E1d = (1/d) int_0^d f e^{-2f} df,
// F0 = int_0^d (1 - e^{-2f}) df, F1d = (1/d) int_0^d f (1 - e^{-2f}) df.
struct Moments {
  double E0, E1d, F0, F1d;
};

Moments moments(double d) {
  if (d < 1e-3) {
    const double d2 = d * d, d3 = d2 * d, d4 = d3 * d;
    return {d - d2 + 2.0 * d3 / 3.0 - d4 / 3.0, d / 2.0 - 2.0 * d2 / 3.0 + d3 / 2.0 - 4.0 * d4 / 15.0,
            d2 - 2.0 * d3 / 3.0 + d4 / 3.0, 2.0 * d2 / 3.0 - d3 / 2.0 + 4.0 * d4 / 15.0};
  }
  const double E0 = -std::expm1(-2.0 * d) / 2.0;
  const double E1 = (-std::expm1(-2.0 * d) - 2.0 * d * std::exp(-2.0 * d)) / 4.0;
  return {E0, E1 / d, d - E0, d / 2.0 - E1 / d};
}

// I0 = int_0^d e^{2i f} df, I1 = (1/d) int_0^d f e^{2i f} df.
std::pair<std::complex<double>, std::complex<double>> trig_moments(double d) {
  using C = std::complex<double>;
  const C two_i(0.0, 2.0);
  if (d < 0.5) {
    C I0(0.0), I1(0.0), term(d);  // term = (2i)^n d^{n+1} / n!
    for (int n = 0; n < 30; ++n) {
      I0 += term / double(n + 1);
      I1 += term / double(n + 2);
      term *= two_i * d / double(n + 1);
    }
    return {I0, I1};
  }
  const C e = std::exp(two_i * d);
  const C I0 = (e - 1.0) / two_i;
  const C I1 = (d * e / two_i - (e - 1.0) / (two_i * two_i)) / d;
  return {I0, I1};
}

// Hermite cubic value and slope on [x0, x1].
std::pair<double, double> hermite2(double x, double x0, double x1, double y0, double y1, double d0, double d1) {
  const double h = x1 - x0;
  if (h == 0.0) return {y0, d0};
  const double s = (x - x0) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double v = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
  const double dv = ((6 * s2 - 6 * s) * y0 + (-6 * s2 + 6 * s) * y1) / h + (3 * s2 - 4 * s + 1) * d0 + (3 * s2 - 2 * s) * d1;
  return {v, dv};
}

double default_far_step(Region region, double R) {
  return std::min(region == Region::epsilon ? 0.01 : 0.02, 1.0 / (40.0 * R));
}

double default_seam_step(Region region, const MatchingSolution& sol) {
  return seam_width(region, sol) / 20.0;
}

}  // namespace

double asymptotic_radius(const MatchingSolution& sol, double t_min, double tol) {
  const double bound = tol * sol.k * sol.k;
  if (sol.potential_removed) return t_min;
  auto V = [&](double t) { return sol.u_R * std::exp(log_potential_ratio(sol.cls, sol.s, sol.R, t)); };
  double t = std::max(t_min, 1.0);
  while (V(t) >= bound) {
    t *= 1.25;
    if (t > 1e7) {
      throw Error(ErrorKind::not_asymptotic, "asymptotic_radius: potential does not decay below tolerance",
                  {{"t", t}, {"tolerance", bound}});
    }
  }
  return t;
}

double epsilon_series_start(const MatchingSolution& sol) {
  const double tc = epsilon_cutoff(sol);
  auto f = [&](double t) { return 0.5 * log_k_squared(Region::epsilon, sol, t) - kLogKMax; };
  const double w = seam_width(Region::epsilon, sol);
  std::vector<double> scan;
  for (double x = w; x < 0.5; x *= 2.0) scan.push_back(1.0 - x);
  for (double t = 0.5; t > tc; t *= 0.5) scan.push_back(t);
  double prev = 1.0;
  for (double t : scan) {
    if (f(t) >= 0.0) {
      const auto root = numerics::safeguarded_root(f, t, prev, f(t), f(prev), 1e-9, 1e-12);
      return std::max(tc, root.x);
    }
    prev = t;
  }
  if (f(tc) > 0.0) return numerics::safeguarded_root(f, tc, prev, f(tc), f(prev), 1e-9, 1e-12).x;
  return tc;
}

EpsilonTable epsilon_table(const MatchingSolution& sol, double t_start, const GridSpec& spec) {
  if (!(t_start > 0.0 && t_start < 1.0)) {
    throw Error(ErrorKind::domain, "epsilon_table: need 0 < t_start < 1", {{"t_start", t_start}});
  }
  const double a = spec.seam_step > 0 ? spec.seam_step : default_seam_step(Region::epsilon, sol);
  const double D = spec.far_step > 0 ? spec.far_step : default_far_step(Region::epsilon, sol.R);
  EpsilonTable tab;
  const double t_join = std::max(t_start, kJoin);
  if (t_start < t_join) {
    const double step0 = std::min(0.02, D / t_join);
    const double span = std::log(t_join / t_start);
    const long n = std::max(1L, static_cast<long>(std::ceil(span / step0))) << spec.level;
    for (long i = 0; i < n; ++i) tab.t.push_back(t_start * std::exp(span * double(i) / double(n)));
  }
  const auto x = seam_offsets(1.0 - t_join, a, spec.ratio_log, D, spec.level);
  for (auto it = x.rbegin(); it != x.rend(); ++it) tab.t.push_back(1.0 - *it);
  tab.t.front() = t_start;  // 1 - (1 - t_start) need not round back
  tab.t.back() = 1.0;

  const std::size_t n = tab.t.size();
  tab.K.resize(n);
  tab.log_amp.resize(n);
  tab.r1.resize(n);
  tab.p.resize(n);
  tab.g.resize(n);
  tab.Phi.assign(n, 0.0);
  const double logk = std::log(sol.k), logR = std::log(sol.R);
  for (std::size_t i = 0; i < n; ++i) {
    const LocalSample s = local_sample(Region::epsilon, sol, tab.t[i]);
    tab.K[i] = std::exp(0.5 * s.log_k2);
    tab.log_amp[i] = 0.5 * logk - 0.25 * s.log_k2;
    tab.r1[i] = s.r1;
    tab.p[i] = s.p;
    tab.g[i] = s.p_sign == 0 ? 0.0 : s.p_sign * std::exp(s.log_abs_p - logR - 0.5 * s.log_k2);
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    tab.Phi[i] = tab.Phi[i + 1] - phase_increment(Region::epsilon, sol, tab.t[i], tab.t[i + 1]);
  }
  return tab;
}

TauTable tau_table(const MatchingSolution& sol, double t_end, const GridSpec& spec) {
  if (!(t_end > 1.0)) throw Error(ErrorKind::domain, "tau_table: need t_end > 1", {{"t_end", t_end}});
  const double a = spec.seam_step > 0 ? spec.seam_step : default_seam_step(Region::tau, sol);
  const double D = spec.far_step > 0 ? spec.far_step : default_far_step(Region::tau, sol.R);
  TauTable tab;
  for (double x : seam_offsets(t_end - 1.0, a, spec.ratio_log, D, spec.level)) tab.t.push_back(1.0 + x);
  tab.t.back() = t_end;
  const std::size_t n = tab.t.size();
  tab.K.resize(n);
  tab.amp.resize(n);
  tab.r1.resize(n);
  tab.p.resize(n);
  tab.g.resize(n);
  tab.theta.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const LocalSample s = local_sample(Region::tau, sol, tab.t[i]);
    tab.K[i] = std::exp(0.5 * s.log_k2);
    tab.amp[i] = std::exp(0.5 * std::log(sol.k) - 0.25 * s.log_k2);
    tab.r1[i] = s.r1;
    tab.p[i] = s.p;
    tab.g[i] = s.p / (sol.R * tab.K[i]);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    tab.theta[i + 1] = tab.theta[i] + phase_increment(Region::tau, sol, tab.t[i], tab.t[i + 1]);
  }
  return tab;
}

EpsilonTerm epsilon_leading(const EpsilonTable& tab) {
  EpsilonTerm e;
  e.h.assign(tab.t.size(), 1.0);
  e.J.assign(tab.t.size(), 0.0);
  return e;
}

TauTerm tau_leading(const TauTable& tab, double c0, double s0) {
  TauTerm e;
  e.c.assign(tab.t.size(), c0);
  e.s.assign(tab.t.size(), s0);
  e.dc.assign(tab.t.size(), 0.0);
  e.ds.assign(tab.t.size(), 0.0);
  return e;
}

EpsilonTerm iterate_term(const EpsilonTable& tab, const EpsilonTerm& prev) {
  // h_n(t) = (1/2) int (1 - e^{-2(Phi(t) - psi)}) g h_{n-1} dpsi,
  // J_n(t) = int e^{-2(Phi(t) - psi)} g h_{n-1} dpsi, psi = Phi(t').
  const std::size_t n = tab.t.size();
  EpsilonTerm out;
  out.order = prev.order + 1;
  out.h.assign(n, 0.0);
  out.J.assign(n, 0.0);
  double D = 0.0, J = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = tab.Phi[i + 1] - tab.Phi[i];
    const double ga = tab.g[i] * prev.h[i];
    const double gb = tab.g[i + 1] * prev.h[i + 1];
    const double decay = std::exp(-2.0 * d);
    double locJ = 0.0, locD = 0.0;
    if (ga != 0.0 || gb != 0.0) {
      const Moments m = moments(d);
      locJ = gb * m.E0 + (ga - gb) * m.E1d;
      locD = gb * m.F0 + (ga - gb) * m.F1d;
    }
    D = D - std::expm1(-2.0 * d) * J + locD;
    J = decay * J + locJ;
    if (!std::isfinite(D) || !std::isfinite(J)) {
      throw Error(ErrorKind::quadrature_failure, "iterate_term: epsilon recursion left the finite range",
                  {{"t", tab.t[i + 1]}, {"order", double(out.order)}});
    }
    out.h[i + 1] = 0.5 * D;
    out.J[i + 1] = J;
  }
  return out;
}

TauTerm iterate_term(const TauTable& tab, const TauTerm& prev, double c_minus, double s_minus) {
  double a_plus = 1.0, b_plus = 0.0;
  if (c_minus == 1.0 && s_minus == 0.0) {
    a_plus = 0.0;
    b_plus = 1.0;
  }
  const double det = a_plus * s_minus - c_minus * b_plus;
  if (det == 0.0) {
    throw Error(ErrorKind::matching_failure, "iterate_term: auxiliary pair is parallel to the reference solution",
                {{"c_minus", c_minus}, {"s_minus", s_minus}});
  }
  const std::size_t n = tab.t.size();
  TauTerm out;
  out.order = prev.order + 1;
  out.c.assign(n, 0.0);
  out.s.assign(n, 0.0);
  out.dc.assign(n, 0.0);
  out.ds.assign(n, 0.0);
  // Ic = int p cos(th) (c cos th + s sin th) dt, Is = int p sin(th) (...) dt,
  // evaluated in theta with g = p / (R K) linear between nodes.
  double Ic = 0.0, Is = 0.0;
  auto assemble = [&](std::size_t i, double ic, double is, double dic, double dis) {
    const double Ip = a_plus * ic + b_plus * is, Im = c_minus * ic + s_minus * is;
    const double dIp = a_plus * dic + b_plus * dis, dIm = c_minus * dic + s_minus * dis;
    out.c[i] = (c_minus * Ip - a_plus * Im) / det;
    out.s[i] = (s_minus * Ip - b_plus * Im) / det;
    out.dc[i] = (c_minus * dIp - a_plus * dIm) / det;
    out.ds[i] = (s_minus * dIp - b_plus * dIm) / det;
  };
  auto densities = [&](std::size_t i, double& dic, double& dis) {
    const double cs = std::cos(tab.theta[i]), sn = std::sin(tab.theta[i]);
    const double w = prev.c[i] * cs + prev.s[i] * sn;
    dic = tab.p[i] * cs * w;
    dis = tab.p[i] * sn * w;
  };
  double dic = 0.0, dis = 0.0;
  densities(0, dic, dis);
  assemble(0, 0.0, 0.0, dic, dis);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = tab.theta[i + 1] - tab.theta[i];
    const double fca = tab.g[i] * prev.c[i], fcb = tab.g[i + 1] * prev.c[i + 1];
    const double fsa = tab.g[i] * prev.s[i], fsb = tab.g[i + 1] * prev.s[i + 1];
    const auto [I0, I1] = trig_moments(d);
    const std::complex<double> rot = std::polar(1.0, 2.0 * tab.theta[i]);
    const std::complex<double> Zc = rot * (fca * I0 + (fcb - fca) * I1);
    const std::complex<double> Zs = rot * (fsa * I0 + (fsb - fsa) * I1);
    const double Ac = 0.5 * d * (fca + fcb), As = 0.5 * d * (fsa + fsb);
    Ic += 0.5 * (Ac + Zc.real() + Zs.imag());
    Is += 0.5 * (Zc.imag() + As - Zs.real());
    densities(i + 1, dic, dis);
    assemble(i + 1, Ic, Is, dic, dis);
  }
  return out;
}

WaveTermSample leading_term(Region region, int sign, const MatchingSolution& sol, double t, std::optional<double> C,
                            std::optional<double> S) {
  WaveTermSample out;
  const double lk2 = log_k_squared(region, sol, t);
  const double log_amp = 0.5 * std::log(sol.k) - 0.25 * lk2;
  if (region == Region::epsilon) {
    if (t > 1.0) throw Error(ErrorKind::domain, "leading_term: epsilon needs t <= 1", {{"t", t}});
    const double Phi = t == 1.0 ? 0.0
                                : -sol.R * numerics::integrate([&](double x) { return local_K(region, sol, x); },
                                                               numerics::graded_breaks(t, 1.0, (1.0 - t) / 64.0, 2.0),
                                                               0.0, 1e-11)
                                               .value;
    out.log_abs = log_amp + (sign >= 0 ? Phi : -Phi);
    out.sign = 1;
    out.value = std::exp(out.log_abs);
    return out;
  }
  if (!C || !S) throw Error(ErrorKind::precondition, "leading_term: tau region needs (C, S)");
  if (t < 1.0) throw Error(ErrorKind::domain, "leading_term: tau needs t >= 1", {{"t", t}});
  const double theta = t == 1.0 ? 0.0
                                : sol.R * numerics::integrate([&](double x) { return local_K(region, sol, x); },
                                                              std::vector<double>{1.0, t}, 0.0, 1e-11)
                                              .value;
  out.value = std::exp(log_amp) * (*C * std::cos(theta) + *S * std::sin(theta));
  out.sign = out.value < 0 ? -1 : 1;
  out.log_abs = std::log(std::abs(out.value));
  return out;
}

double wronskian_check(Region region, const MatchingSolution& sol, const MatchCoefficients& coeffs, double t) {
  // d/dt ln of each order-0 solution by central differences, combined as
  // (4 D(h/2) - D(h)) / 3; the phase parts come from Gauss-Legendre on
  // [t - h, t + h] so no cancellation enters.
  const double x = region == Region::epsilon ? 1.0 - t : t - 1.0;
  const double h0 = 1e-3 * std::min(std::abs(x), t);
  auto log_amp = [&](double y) { return 0.5 * std::log(sol.k) - 0.25 * log_k_squared(region, sol, y); };
  if (region == Region::epsilon) {
    auto dlog = [&](double h, int sgn) {
      const double dphi = phase_increment(region, sol, t - h, t + h);
      return (log_amp(t + h) - log_amp(t - h)) / (2 * h) + sgn * dphi / (2 * h);
    };
    auto rich = [&](int sgn) { return (4.0 * dlog(h0 / 2, sgn) - dlog(h0, sgn)) / 3.0; };
    const double amp2 = std::exp(2.0 * log_amp(t));  // w_+ w_- = amp^2
    return amp2 * (rich(-1) - rich(+1));
  }
  // phases relative to theta(t), so quadrature error in theta(t) itself
  // rotates both solutions alike and drops out of W
  const double th_t = t == 1.0 ? 0.0 : phase_increment(region, sol, 1.0, t);
  auto values = [&](double y, double cc, double ss) {
    const double th = th_t + (y == t ? 0.0 : phase_increment(region, sol, t, y));
    return std::exp(log_amp(y)) * (cc * std::cos(th) + ss * std::sin(th));
  };
  auto deriv = [&](double h, double cc, double ss) {
    return (values(t + h, cc, ss) - values(t - h, cc, ss)) / (2 * h);
  };
  auto rich = [&](double cc, double ss) { return (4.0 * deriv(h0 / 2, cc, ss) - deriv(h0, cc, ss)) / 3.0; };
  const double wp = values(t, coeffs.c_plus, coeffs.s_plus), wm = values(t, coeffs.c_minus, coeffs.s_minus);
  return wp * rich(coeffs.c_minus, coeffs.s_minus) - wm * rich(coeffs.c_plus, coeffs.s_plus);
}

// ---------------------------------------------------------------------------

struct SeriesLevel {
  MatchingSolution sol;
  bool has_eps = false;
  EpsilonTable eps;
  std::vector<EpsilonTerm> eps_terms;
  std::vector<double> H, SJ;  // partial sums of h_n and J_n through N
  TauTable tau;
  std::vector<TauTerm> basis_a, basis_b;  // starts (1, 0) and (0, 1)
  double C = 0.0, S = 0.0, det = 0.0;
  std::vector<double> c_tot, s_tot, dc_tot, ds_tot;  // C * a + S * b through M

  WaveValue eps_at(double t) const {
    const std::size_t i = std::min(numerics::locate(eps.t, t), eps.t.size() - 2);
    const double R = sol.R;
    const double t0 = eps.t[i], t1 = eps.t[i + 1];
    const double dH0 = R * eps.K[i] * SJ[i], dH1 = R * eps.K[i + 1] * SJ[i + 1];
    double Hv, dH, Phi, log_amp, r1, K;
    if (t == t1 || t == t0) {
      const std::size_t j = t == t1 ? i + 1 : i;
      Hv = H[j];
      dH = R * eps.K[j] * SJ[j];
      Phi = eps.Phi[j];
      log_amp = eps.log_amp[j];
      r1 = eps.r1[j];
      K = eps.K[j];
    } else {
      std::tie(Hv, dH) = hermite2(t, t0, t1, H[i], H[i + 1], dH0, dH1);
      Phi = eps.Phi[i + 1] - phase_increment(Region::epsilon, sol, t, t1);
      const LocalSample s = local_sample(Region::epsilon, sol, t);
      log_amp = 0.5 * std::log(sol.k) - 0.25 * s.log_k2;
      r1 = s.r1;
      K = std::exp(0.5 * s.log_k2);
    }
    WaveValue w;
    w.t = t;
    w.sign = Hv < 0 ? -1 : 1;
    const double base = log_amp + Phi;
    w.log_abs = base + std::log(std::abs(Hv));
    w.value = w.sign * std::exp(w.log_abs);
    w.derivative = w.value * (-0.25 * r1 + R * K) + std::exp(base) * dH;
    return w;
  }

  WaveValue tau_at(double t) const {
    const std::size_t i = std::min(numerics::locate(tau.t, t), tau.t.size() - 2);
    const double R = sol.R;
    const double t0 = tau.t[i], t1 = tau.t[i + 1];
    double c, dc, s, ds, th, amp, r1, K;
    if (t == t0 || t == t1) {
      const std::size_t j = t == t1 ? i + 1 : i;
      c = c_tot[j];
      s = s_tot[j];
      dc = dc_tot[j];
      ds = ds_tot[j];
      th = tau.theta[j];
      amp = tau.amp[j];
      r1 = tau.r1[j];
      K = tau.K[j];
    } else {
      std::tie(c, dc) = hermite2(t, t0, t1, c_tot[i], c_tot[i + 1], dc_tot[i], dc_tot[i + 1]);
      std::tie(s, ds) = hermite2(t, t0, t1, s_tot[i], s_tot[i + 1], ds_tot[i], ds_tot[i + 1]);
      th = tau.theta[i] + phase_increment(Region::tau, sol, t0, t);
      const LocalSample ls = local_sample(Region::tau, sol, t);
      amp = std::exp(0.5 * std::log(sol.k) - 0.25 * ls.log_k2);
      r1 = ls.r1;
      K = std::exp(0.5 * ls.log_k2);
    }
    const double cs = std::cos(th), sn = std::sin(th);
    WaveValue w;
    w.t = t;
    w.value = amp * (c * cs + s * sn);
    w.derivative = -0.25 * r1 * w.value + amp * (dc * cs + ds * sn) + amp * R * K * (-c * sn + s * cs);
    w.sign = w.value < 0 ? -1 : 1;
    w.log_abs = std::log(std::abs(w.value));
    return w;
  }

  WaveValue at(double t) const {
    if (t < 1.0 && has_eps) return eps_at(t);
    if (t == 1.0 && has_eps) return eps_at(t);
    return tau_at(t);
  }

  // continuous phase of u (zeros at multiples of pi), counted from t = 1
  double wkb_phase(std::size_t j) const {
    double sg = (C * tau.amp[0] < 0.0) ? -1.0 : 1.0;
    const double phi1 = std::atan2(sg * s_tot[0], sg * c_tot[0]);
    double phi = phi1, acc = 0.0;
    for (std::size_t i = 1; i <= j; ++i) {
      const double next = std::atan2(sg * s_tot[i], sg * c_tot[i]);
      acc += std::remainder(next - phi, 2.0 * std::numbers::pi);
      phi = next;
    }
    return std::numbers::pi / 2 - phi1 + tau.theta[j] - acc;
  }
};

namespace {

SeriesLevel build_level(const MatchingSolution& sol, const SeriesOptions& opts, int level, double t_start,
                        double t_far) {
  SeriesLevel L;
  L.sol = sol;
  GridSpec spec = opts.grid;
  spec.level = level;
  const double R = sol.R;

  // tau basis series
  L.tau = tau_table(sol, t_far, spec);
  L.basis_a.push_back(tau_leading(L.tau, 1.0, 0.0));
  L.basis_b.push_back(tau_leading(L.tau, 0.0, 1.0));
  for (int m = 1; m <= opts.M; ++m) {
    L.basis_a.push_back(iterate_term(L.tau, L.basis_a.back(), opts.c_minus, opts.s_minus));
    L.basis_b.push_back(iterate_term(L.tau, L.basis_b.back(), opts.c_minus, opts.s_minus));
  }
  const std::size_t nt = L.tau.t.size();
  auto sum_basis = [&](const std::vector<TauTerm>& b, std::vector<double> TauTerm::*f) {
    std::vector<double> out(nt, 0.0);
    for (const auto& term : b)
      for (std::size_t i = 0; i < nt; ++i) out[i] += (term.*f)[i];
    return out;
  };
  const auto ca = sum_basis(L.basis_a, &TauTerm::c), sa = sum_basis(L.basis_a, &TauTerm::s);
  const auto dca = sum_basis(L.basis_a, &TauTerm::dc), dsa = sum_basis(L.basis_a, &TauTerm::ds);
  const auto cb = sum_basis(L.basis_b, &TauTerm::c), sb = sum_basis(L.basis_b, &TauTerm::s);
  const auto dcb = sum_basis(L.basis_b, &TauTerm::dc), dsb = sum_basis(L.basis_b, &TauTerm::ds);

  // interior data at t = 1
  double u1 = 0.0, du1 = 0.0;
  if (sol.potential_removed) {
    const RiccatiBessel f = riccati_bessel(sol.triad.l, sol.k * R);
    u1 = f.j;
    du1 = sol.k * R * f.dj;
  } else {
    L.has_eps = true;
    L.eps = epsilon_table(sol, t_start, spec);
    L.eps_terms.push_back(epsilon_leading(L.eps));
    for (int n = 1; n <= opts.N; ++n) L.eps_terms.push_back(iterate_term(L.eps, L.eps_terms.back()));
    const std::size_t ne = L.eps.t.size();
    L.H.assign(ne, 0.0);
    L.SJ.assign(ne, 0.0);
    for (const auto& term : L.eps_terms)
      for (std::size_t i = 0; i < ne; ++i) {
        L.H[i] += term.h[i];
        L.SJ[i] += term.J[i];
      }
    const std::size_t j = ne - 1;
    const double w0 = std::exp(L.eps.log_amp[j]);
    u1 = w0 * L.H[j];
    du1 = w0 * ((-0.25 * L.eps.r1[j] + R * L.eps.K[j]) * L.H[j] + R * L.eps.K[j] * L.SJ[j]);
  }

  // value/slope system at the first tau node (t = 1)
  const double amp = L.tau.amp[0], damp = -0.25 * L.tau.r1[0] * amp, RK = R * L.tau.K[0];
  const double Ua = amp * ca[0], Ub = amp * cb[0];
  const double dUa = damp * ca[0] + amp * dca[0] + amp * RK * sa[0];
  const double dUb = damp * cb[0] + amp * dcb[0] + amp * RK * sb[0];
  L.det = Ua * dUb - Ub * dUa;
  const double scale = std::max(std::abs(Ua), std::abs(Ub)) * std::max(std::abs(dUa), std::abs(dUb));
  if (!(std::abs(L.det) > 1e-13 * scale)) {
    throw Error(ErrorKind::matching_failure, "match_at_one: singular value/slope system",
                {{"determinant", L.det}, {"scale", scale}});
  }
  L.C = (u1 * dUb - Ub * du1) / L.det;
  L.S = (Ua * du1 - u1 * dUa) / L.det;
  L.c_tot.resize(nt);
  L.s_tot.resize(nt);
  L.dc_tot.resize(nt);
  L.ds_tot.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    L.c_tot[i] = L.C * ca[i] + L.S * cb[i];
    L.s_tot[i] = L.C * sa[i] + L.S * sb[i];
    L.dc_tot[i] = L.C * dca[i] + L.S * dcb[i];
    L.ds_tot[i] = L.C * dsa[i] + L.S * dsb[i];
  }
  return L;
}

PhaseShift level_phase(const SeriesLevel& L, double t_far) {
  const double R = L.sol.R;
  const WaveValue w = L.tau_at(t_far);
  double estimate = NAN;
  if (!L.sol.potential_removed) {
    const std::size_t j = std::min(numerics::locate(L.tau.t, t_far) + 1, L.tau.t.size() - 1);
    estimate = L.wkb_phase(j) + phase_increment(Region::tau, L.sol, L.tau.t[j], t_far) -
               (L.sol.k * R * t_far - L.sol.triad.l * std::numbers::pi / 2);
  }
  return extract_phase(L.sol.triad.l, L.sol.k, R * t_far, w.value, w.derivative / R, estimate);
}

std::vector<double> eps_norms(const SeriesLevel& L) {
  std::vector<double> out;
  for (const auto& term : L.eps_terms) {
    double m = 0.0;
    for (std::size_t i = 0; i < L.eps.t.size(); ++i) {
      if (term.h[i] == 0.0) continue;
      m = std::max(m, std::exp(L.eps.log_amp[i] + L.eps.Phi[i] + std::log(std::abs(term.h[i]))));
    }
    out.push_back(m);
  }
  return out;
}

std::vector<double> tau_norms(const SeriesLevel& L) {
  std::vector<double> out;
  for (std::size_t m = 0; m < L.basis_a.size(); ++m) {
    double mx = 0.0;
    for (std::size_t i = 0; i < L.tau.t.size(); ++i) {
      const double c = L.C * L.basis_a[m].c[i] + L.S * L.basis_b[m].c[i];
      const double s = L.C * L.basis_a[m].s[i] + L.S * L.basis_b[m].s[i];
      mx = std::max(mx, std::abs(L.tau.amp[i] * (c * std::cos(L.tau.theta[i]) + s * std::sin(L.tau.theta[i]))));
    }
    out.push_back(mx);
  }
  return out;
}

WaveValue combine(const WaveValue& f, const WaveValue& c) {
  WaveValue w = f;
  w.value = (4.0 * f.value - c.value) / 3.0;
  w.derivative = (4.0 * f.derivative - c.derivative) / 3.0;
  // log form from the ratio, valid where both values underflow
  const double ratio = c.sign * f.sign * std::exp(c.log_abs - f.log_abs);
  const double factor = (4.0 - ratio) / 3.0;
  if (factor > 0.0) {
    w.log_abs = f.log_abs + std::log(factor);
    w.sign = f.sign;
  } else if (factor < 0.0) {
    w.log_abs = f.log_abs + std::log(-factor);
    w.sign = -f.sign;
  }
  return w;
}

}  // namespace

ScatteringResult solve_series(const MatchingSolution& sol, const SeriesOptions& opts) {
  if (opts.N < 0 || opts.M < 0) {
    throw Error(ErrorKind::precondition, "solve_series: cutoff orders must be nonnegative",
                {{"N", double(opts.N)}, {"M", double(opts.M)}});
  }
  ScatteringResult res;
  res.sol = sol;
  res.t_far = opts.t_far > 0 ? opts.t_far : asymptotic_radius(sol, opts.t_min_far, 1e-8);
  res.t_start = sol.potential_removed ? 1.0 : epsilon_series_start(sol);

  auto coarse = std::make_shared<SeriesLevel>(build_level(sol, opts, opts.level, res.t_start, res.t_far));
  std::shared_ptr<SeriesLevel> fine;
  if (opts.richardson) fine = std::make_shared<SeriesLevel>(build_level(sol, opts, opts.level + 1, res.t_start, res.t_far));
  res.coarse = coarse;
  res.fine = fine;

  res.coeffs.c_minus = opts.c_minus;
  res.coeffs.s_minus = opts.s_minus;
  res.coeffs.N = opts.N;
  res.coeffs.M = opts.M;
  if (fine) {
    res.coeffs.c_plus = (4.0 * fine->C - coarse->C) / 3.0;
    res.coeffs.s_plus = (4.0 * fine->S - coarse->S) / 3.0;
    res.coeffs.determinant = fine->det;
  } else {
    res.coeffs.c_plus = coarse->C;
    res.coeffs.s_plus = coarse->S;
    res.coeffs.determinant = coarse->det;
  }

  res.phase = phase_shift(res, res.t_far);

  const SeriesLevel& best = fine ? *fine : *coarse;
  auto& dg = res.diagnostics;
  if (best.has_eps) dg.eps_term_norms = eps_norms(best);
  dg.tau_term_norms = tau_norms(best);
  dg.eps_nodes = best.eps.t.size();
  dg.tau_nodes = best.tau.t.size();
  if (fine) {
    dg.richardson_phase_change = std::abs(fold_half_pi(level_phase(*fine, res.t_far).delta -
                                                       level_phase(*coarse, res.t_far).delta));
  }
  if (best.has_eps) {
    const WaveValue in = best.eps_at(1.0), out = best.tau_at(1.0);
    dg.value_mismatch = std::abs(in.value - out.value) / std::abs(in.value);
    dg.slope_mismatch = std::abs(in.derivative - out.derivative) / std::max(std::abs(in.derivative), 1e-300);
    dg.P_eps = convergence_integral(Region::epsilon, sol, 1.0).value;
  }
  dg.P_tau = convergence_integral(Region::tau, sol, res.t_far).value;

  const auto& nodes_eps = coarse->eps.t;
  for (double t : nodes_eps) {
    if (t < 1.0) res.wave.push_back(wavefunction(res, t));
  }
  for (double t : coarse->tau.t) res.wave.push_back(wavefunction(res, t));
  return res;
}

WaveValue wavefunction(const ScatteringResult& res, double t) {
  const double lo = res.sol.potential_removed ? 1.0 : res.t_start;
  if (!(t >= lo && t <= res.t_far)) {
    throw Error(ErrorKind::domain, "wavefunction: t outside the series grid", {{"t", t}, {"t_start", lo}, {"t_far", res.t_far}});
  }
  const WaveValue c = res.coarse->at(t);
  if (!res.fine) return c;
  return combine(res.fine->at(t), c);
}

PhaseShift phase_shift(const ScatteringResult& res, double t_far) {
  if (!(t_far > 1.0 && t_far <= res.t_far)) {
    throw Error(ErrorKind::domain, "phase_shift: t_far must lie in (1, grid end]", {{"t_far", t_far}, {"grid_end", res.t_far}});
  }
  const MatchingSolution& sol = res.sol;
  if (!sol.potential_removed) {
    const double V = sol.u_R * std::exp(log_potential_ratio(sol.cls, sol.s, sol.R, t_far));
    if (!(V < 1e-8 * sol.k * sol.k)) {
      throw Error(ErrorKind::not_asymptotic, "phase_shift: potential at t_far is not negligible",
                  {{"t_far", t_far}, {"potential", V}, {"bound", 1e-8 * sol.k * sol.k}});
    }
  }
  const PhaseShift pc = level_phase(*res.coarse, t_far);
  if (!res.fine) return pc;
  const PhaseShift pf = level_phase(*res.fine, t_far);
  PhaseShift out;
  const double raw = pf.delta + fold_half_pi(pf.delta - pc.delta) / 3.0;
  out.delta = fold_half_pi(raw);
  out.branch = pf.branch + static_cast<int>(std::lround((raw - out.delta) / std::numbers::pi));
  return out;
}

}  // namespace singscat

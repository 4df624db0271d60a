#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "singscat/localwave.hpp"
#include "singscat/phase.hpp"

namespace singscat {

/// Node tables of one region on a seam-graded grid.
///
/// Grids are built in a stretched coordinate xi with x = |t - 1|,
///   x(xi) = (D / c) ln(1 + A (e^{c xi} - 1) / (A + D)),  A = a c,
/// which is geometric (first step ~ a, ratio e^c) next to the seam and
/// uniform with spacing D away from it. `level` halves the xi-step, so every
/// coarse node is also a node of the next level. Below t = 0.1 the epsilon
/// grid continues uniformly in ln t.
struct EpsilonTable {
  std::vector<double> t;        // ascending, t.back() == 1
  std::vector<double> K;        // may be as large as e^700
  std::vector<double> log_amp;  // ln (k^2 / K^2)^{1/4}
  std::vector<double> r1;       // (dK^2/dt) / K^2
  std::vector<double> p;
  std::vector<double> g;        // p / (R K), the kernel per unit phase
  std::vector<double> Phi;      // R int_1^t K <= 0
};

struct TauTable {
  std::vector<double> t;  // ascending, t.front() == 1
  std::vector<double> K;
  std::vector<double> amp;
  std::vector<double> r1;
  std::vector<double> p;
  std::vector<double> g;
  std::vector<double> theta;  // R int_1^t K >= 0
};

struct GridSpec {
  double seam_step = 0.0;  // a; 0 means 1/20 of the seam width
  double ratio_log = 0.02;  // c
  double far_step = 0.0;    // D; 0 means min(0.01, 1/(40 R)) (eps) or min(0.02, 1/(40 R)) (tau)
  int level = 0;
};

EpsilonTable epsilon_table(const MatchingSolution& sol, double t_start, const GridSpec& spec);
TauTable tau_table(const MatchingSolution& sol, double t_end, const GridSpec& spec);

/// Lower end of the epsilon series grid: where ln K_eps reaches 700, or the
/// discriminant cutoff if that comes first.
double epsilon_series_start(const MatchingSolution& sol);

/// Order-n epsilon term in ratio form: w_n = w_0^+ h_n, dh_n/dt = R K J_n.
/// ln|w_n| = log_amp + Phi + ln|h_n|.
struct EpsilonTerm {
  int order = 0;
  std::vector<double> h;
  std::vector<double> J;
};

/// Order-m tau term for one starting pair: w_m = amp (c_m cos theta + s_m sin theta).
/// c_m, s_m vanish with zero slope at t = 1 for m >= 1.
struct TauTerm {
  int order = 0;
  std::vector<double> c;
  std::vector<double> s;
  std::vector<double> dc;  // d/dt
  std::vector<double> ds;
};

EpsilonTerm epsilon_leading(const EpsilonTable& tab);
TauTerm tau_leading(const TauTable& tab, double c0, double s0);

/// One Volterra step w_n = int G^+ Delta w_{n-1} with the variation-of-
/// parameters kernel G(t,t') = [w_+(t') w_-(t) - w_+(t) w_-(t')] / W.
/// The epsilon integral runs up from the table start, the tau integral from
/// t = 1. Between nodes the kernel weight is integrated exactly against a
/// piecewise-linear density in the phase variable.
EpsilonTerm iterate_term(const EpsilonTable& tab, const EpsilonTerm& prev);

/// (c_minus, s_minus) is the auxiliary pair of the tau resolvent; it must
/// not be parallel to (1, 0), which serves as the reference solution, unless
/// it is (1, 0) itself, in which case (0, 1) is the reference.
TauTerm iterate_term(const TauTable& tab, const TauTerm& prev, double c_minus, double s_minus);

/// One leading-order solution sample. Epsilon: (k^2/K^2)^{1/4} e^{+-R int_1^t K}
/// carried as (sign, log-magnitude). Tau: (k^2/K^2)^{1/4} (C cos theta + S sin theta).
struct WaveTermSample {
  double log_abs = 0.0;
  int sign = 1;
  double value = 0.0;
};

WaveTermSample leading_term(Region region, int sign, const MatchingSolution& sol, double t,
                            std::optional<double> C = std::nullopt, std::optional<double> S = std::nullopt);

struct MatchCoefficients {
  double c_plus = 0.0;
  double s_plus = 0.0;
  double c_minus = 0.0;
  double s_minus = 1.0;
  int N = 2;
  int M = 2;
  double determinant = 0.0;  // of the 2x2 value/slope matching system
};

/// w_+ w_-' - w_- w_+' of the order-0 pair at t, from log-space central
/// differences (Richardson-combined). Epsilon gives -2kR; tau gives
/// kR (C+ S- - C- S+).
double wronskian_check(Region region, const MatchingSolution& sol, const MatchCoefficients& coeffs, double t);

struct SeriesOptions {
  int N = 2;
  int M = 2;
  double c_minus = 0.0;
  double s_minus = 1.0;
  double t_far = 0.0;       // 0: first t >= t_min_far where g^2 U < 1e-8 k^2
  double t_min_far = 3.0;
  int level = 1;            // base grid level
  bool richardson = true;   // combine levels `level` and `level + 1`
  GridSpec grid;
};

struct WaveValue {
  double t = 0.0;
  double value = 0.0;
  double derivative = 0.0;  // d/dt
  double log_abs = 0.0;     // ln|value|, finite even where value underflows
  int sign = 1;
};

struct SeriesDiagnostics {
  std::vector<double> eps_term_norms;  // sup_t |w_eps,n| on the grid
  std::vector<double> tau_term_norms;  // sup_t |w_tau,m| of the matched solution
  double value_mismatch = 0.0;         // |u(1-) - u(1+)| / |u(1)|
  double slope_mismatch = 0.0;
  double P_eps = 0.0;
  double P_tau = 0.0;
  double richardson_phase_change = 0.0;  // |delta(level+1) - delta(level)|
  std::size_t eps_nodes = 0;
  std::size_t tau_nodes = 0;
};

struct SeriesLevel;

struct ScatteringResult {
  MatchingSolution sol;
  MatchCoefficients coeffs;
  PhaseShift phase;
  double t_far = 0.0;
  double t_start = 0.0;
  SeriesDiagnostics diagnostics;
  std::vector<WaveValue> wave;  // samples on the coarse grid nodes
  std::shared_ptr<const SeriesLevel> coarse;
  std::shared_ptr<const SeriesLevel> fine;  // null without Richardson
};

/// Builds both series, matches value and slope at t = 1, extracts the phase
/// shift at t_far. For a solution with the potential removed only the tau
/// series is built, matched to jhat_l(kR) at t = 1; its phase shift must
/// vanish, which calibrates the tau machinery and the extractor.
ScatteringResult solve_series(const MatchingSolution& sol, const SeriesOptions& opts = {});

/// Matched partial sum (and d/dt) at any t in [t_start, t_far].
WaveValue wavefunction(const ScatteringResult& res, double t);

/// Phase shift of the matched partial sum at t_far (potential-only
/// asymptotic check: throws not_asymptotic when g^2 U(R t_far) >= 1e-8 k^2).
PhaseShift phase_shift(const ScatteringResult& res, double t_far);

/// The first t >= t_min with g^2 U(s; R t) < tol * k^2.
double asymptotic_radius(const MatchingSolution& sol, double t_min, double tol);

}  // namespace singscat

#pragma once

#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

#include "singscat/localwave.hpp"
#include "singscat/series.hpp"

namespace singscat {

// Large-R limit formulas, one set per potential class, transcribed as
// printed (including prefactors that do not follow from the exact forms).
// Everything is carried in log form because the values span hundreds of
// decades.

/// sign * exp(log_abs); `value` is that product when it is representable.
struct LogValue {
  double log_abs = -INFINITY;
  int sign = 0;
  double value = 0.0;
};

/// Right-hand side of e^{r1 s / R} -> RHS(R), as a logarithm.
double asymptotic_stage_log_rhs(const PotentialClass& cls, double k, const AngularTriad& triad, double R);

/// s = (R / r1) ln RHS. Throws pre_asymptotic when RHS <= 1.
double asymptotic_stage(const PotentialClass& cls, double k, const AngularTriad& triad, double R);

/// Limit form of K_gamma^2(t). In the tau region every class except EEE and
/// EEP reduces to k^2 - lambda_tau^2 / (R t)^2.
LogValue asymptotic_k_squared(Region region, const MatchingSolution& sol, double t);

/// Limit form of p_eps(t), 0 < t < 1.
LogValue asymptotic_discriminant_eps(const MatchingSolution& sol, double t);

/// -3 lambda_tau^2 / (2 k^2 R^2 t^4), as printed for every class.
double asymptotic_discriminant_tau(const MatchingSolution& sol, double t);

/// Order-0 wave function with the tau coefficients (C0, S0) taken from
/// matching the order-0 terms alone: the epsilon side is
/// (k^2/K^2)^{1/4} e^{R int_1^t K}, the tau side the leading cos/sin pair.
WaveValue asymptotic_wavefunction(const MatchingSolution& sol, const MatchCoefficients& coeffs0, double t);

/// (C0, S0) from matching the two order-0 terms in value and slope at t = 1.
MatchCoefficients leading_coefficients(const MatchingSolution& sol);

/// Sup-norm distance between the matched partial sum at `full`'s cutoff and
/// the order-0 matched solution, over t in [t_lo, t_hi], relative to the
/// sup-norm of the full sum. Both share the epsilon normalization
/// (8 k^2 R^2)^{1/4} of the leading term at t = 1.
struct ReductionDeviation {
  double deviation = 0.0;
  double sup_full = 0.0;
  double t_at_max = 0.0;
  PhaseShift delta_full;
  PhaseShift delta_leading;
};

ReductionDeviation leading_deviation(const MatchingSolution& sol, const SeriesOptions& full, double t_lo = 0.5,
                                     double t_hi = 3.0, int samples = 501);
/// Same, reusing an already solved full sum; `opts` must be the options it was solved with.
ReductionDeviation leading_deviation(const ScatteringResult& full, const SeriesOptions& opts, double t_lo = 0.5,
                                     double t_hi = 3.0, int samples = 501);

/// s_exact(R) divided by the order function quoted for the class:
/// EEE R^2/(r0 r2), EEP R^2/(r0 r1), PEE R^2/(r1 r2), PEP R/r1,
/// EPE R^2, EPP R/r1, PPP R/r1, PPE R^2/(r1 r2).
double order_ratio(const PotentialClass& cls, double k, const AngularTriad& triad, double R);

/// One exact-vs-limit comparison.
struct AsymptoticRow {
  std::string cls;
  std::string quantity;  // "p_eps", "K2_eps", "K2_tau", "stage"
  double R = 0.0;
  double t = 0.0;
  LogValue exact;
  LogValue asymptotic;
  double log_deviation = 0.0;  // | ln|exact| - ln|asymptotic| |
};

AsymptoticRow compare_discriminant(const MatchingSolution& sol, double t);
AsymptoticRow compare_k_squared(Region region, const MatchingSolution& sol, double t);
AsymptoticRow compare_stage(const PotentialClass& cls, double k, const AngularTriad& triad, double R);

void write_asymptotic_csv(std::ostream& out, const std::vector<AsymptoticRow>& rows);

}  // namespace singscat

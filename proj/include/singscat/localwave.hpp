#pragma once

#include <iosfwd>
#include <vector>

#include "singscat/matching.hpp"

namespace singscat {

/// epsilon: t < 1, classically forbidden. tau: t > 1, oscillatory.
enum class Region { epsilon, tau };

const char* to_string(Region region) noexcept;

/// Local quantities at one t, carried in a form that survives the
/// super-exponential growth of K_eps^2 toward the core:
///   r1 = (dK^2/dt) / K^2 and r2 = (d^2K^2/dt^2) / K^2 are always finite,
///   k2, dk2, d2k2 are the plain values and may be +-inf.
struct LocalSample {
  double t = 1.0;
  double log_k2 = 0.0;
  double k2 = 0.0;
  double dk2 = 0.0;
  double d2k2 = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double delta = 0.0;
  double p = 0.0;      // may underflow to 0; see log_abs_p
  double log_abs_p = 0.0;
  int p_sign = 0;
};

/// K_gamma^2(t) = -+{k^2 - g^2 U(s; R t) - lambda_gamma^2 / (R t)^2}
/// (upper sign for epsilon). +inf when the potential term overflows.
double k_squared(Region region, const MatchingSolution& sol, double t);

/// ln K_gamma^2(t); throws domain when K^2 <= 0.
double log_k_squared(Region region, const MatchingSolution& sol, double t);

struct KSquaredDerivatives {
  double first;
  double second;
};
KSquaredDerivatives k_squared_derivatives(Region region, const MatchingSolution& sol, double t);

/// Everything above at one point; throws domain for t <= 0 or K^2 <= 0.
LocalSample local_sample(Region region, const MatchingSolution& sol, double t);

/// Delta_gamma = -(5/16)(K^2'/K^2)^2 + (1/4) K^2''/K^2 - (lambda_gamma^2 - l(l+1)) / t^2.
double residual_delta(Region region, const MatchingSolution& sol, double t);

/// p_gamma = Delta_gamma / (R K_gamma), K_gamma > 0.
double discriminant(Region region, const MatchingSolution& sol, double t);

struct LocalWaveProfile {
  Region region = Region::epsilon;
  std::vector<LocalSample> samples;
  double P_value = 0.0;
};

LocalWaveProfile sample_profile(Region region, const MatchingSolution& sol, const std::vector<double>& ts);

/// Distance in t from the matching point over which K^2 doubles,
/// K^2(1) / |dK^2/dt(1)|. The discriminants peak within a few of these.
double seam_width(Region region, const MatchingSolution& sol);

struct ConvergenceIntegral {
  double value = 0.0;
  double abs_error = 0.0;
  // epsilon only: the integral starts at t_cutoff where log|p| < -745;
  // tail_bound is R times a one-term exponential bound on the dropped mass.
  double t_cutoff = 0.0;
  double tail_bound = 0.0;
};

/// P_eps(t_end) = R int_0^t_end |p_eps| (0 < t_end <= 1) or
/// P_tau(t_end) = R int_1^t_end |p_tau| (t_end >= 1).
ConvergenceIntegral convergence_integral(Region region, const MatchingSolution& sol, double t_end);

/// Smallest t in (0, 1) kept by the epsilon integrals: below it log|p| < -745.
double epsilon_cutoff(const MatchingSolution& sol);

void write_profile_csv(std::ostream& out, const LocalWaveProfile& profile);

}  // namespace singscat

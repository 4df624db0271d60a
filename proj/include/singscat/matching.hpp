#pragma once

#include "singscat/potentials.hpp"

namespace singscat {

/// Auxiliary orbital angular momenta of one partial wave:
///   lambda_eps^2 = (l + 1/2)^2, lambda_tau^2 = l (l + 1),
///   lambda^2 = (lambda_eps^2 + lambda_tau^2) / 2,
/// so lambda_eps^2 - lambda^2 = lambda^2 - lambda_tau^2 = 1/8.
struct AngularTriad {
  int l = 0;
  double lambda_eps_sq = 0.25;
  double lambda_tau_sq = 0.0;
  double lambda_sq = 0.125;
};

AngularTriad lambda_triad(int l);

/// A point (k, l, R, s, g^2) on the matching surface
///   k^2 R^2 - g^2 R^2 U(s; R) - lambda^2 = 0.
///
/// `u_R` is g^2 U(s; R) as fixed by that equation, k^2 - lambda^2 / R^2.
/// The local wave numbers evaluate the potential as u_R times the ratio
/// U(s; R t) / U(s; R), which keeps the matching-point identity
/// K^2(1) = 1 / (8 R^2) exact in floating point.
///
/// `potential_removed` marks the free reference problem (U = 0) used to
/// calibrate the machinery; it does not satisfy the matching equation.
struct MatchingSolution {
  double k = 1.0;
  AngularTriad triad;
  PotentialClass cls;
  double R = 1.0;
  double s = 0.0;
  double g2 = 0.0;
  double u_R = 0.0;
  bool potential_removed = false;
};

/// k^2 R^2 - R^2 g^2 U(s; R) - lambda^2, sign as written.
double master_residual(const PotentialClass& cls, double k, const AngularTriad& triad, double R, double s);

/// Exact stage s(R) solving the matching equation at radius R.
/// Throws no_solution when k^2 R^2 <= lambda^2 and negative_stage when the
/// potential at s = 0 already exceeds k^2 - lambda^2 / R^2.
double solve_stage(const PotentialClass& cls, double k, const AngularTriad& triad, double R);

/// Matching radius at fixed stage s: geometric bracketing scan over
/// R in [1e-3, 1e6] / k followed by a safeguarded secant/bisection solve.
double solve_matching_radius(const PotentialClass& cls, double k, const AngularTriad& triad, double s);

/// Radius at which the coupling law takes the value g2.
double radius_from_coupling(const PotentialClass& cls, double g2);

MatchingSolution match_at_radius(const PotentialClass& cls, double k, int l, double R);
MatchingSolution match_at_stage(const PotentialClass& cls, double k, int l, double s);

/// Free reference problem (potential removed) on the same t = r / R scale.
MatchingSolution free_solution(double k, int l, double R);

}  // namespace singscat

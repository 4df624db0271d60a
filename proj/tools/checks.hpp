#pragma once

#include <string>
#include <vector>

#include "singscat/matching.hpp"
#include "singscat/oracle.hpp"
#include "singscat/series.hpp"

namespace scatter {

/// One measured invariant. `measured` is the quantity compared against
/// `tolerance` (a relative or absolute deviation, see `what`).
struct Check {
  std::string name;
  std::string what;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

Check make_check(std::string name, std::string what, double measured, double tolerance);

/// max over both regions of |K^2(1) 8 R^2 - 1|.
Check check_matching_identity(const singscat::MatchingSolution& sol);

/// |lambda_eps^2 - lambda^2 - 1/8| + |lambda^2 - lambda_tau^2 - 1/8| + integer checks.
Check check_triad(const singscat::AngularTriad& triad);

/// |master residual| / (k^2 R^2).
Check check_master_residual(const singscat::MatchingSolution& sol);

/// |R(s(R)) / R - 1| through solve_matching_radius.
Check check_round_trip(const singscat::MatchingSolution& sol);

/// Order-0 epsilon Wronskian at t = 0.5 ... 0.9 against -2 k R (max relative
/// deviation) and its spread (max - min) / 2kR.
Check check_wronskian_eps(const singscat::MatchingSolution& sol);
Check check_wronskian_eps_constancy(const singscat::MatchingSolution& sol);

/// Order-0 tau Wronskian with the matched (C+, S+) and the auxiliary pair
/// against k R (C+ S- - C- S+), t = 1.5 ... 3.5.
Check check_wronskian_tau(const singscat::MatchingSolution& sol, const singscat::MatchCoefficients& coeffs);

/// Analytic dK^2/dt and d^2K^2/dt^2 against Richardson-extrapolated central
/// differences at `points` t values split between the two regions (epsilon
/// points stop where ln K^2 exceeds 300). Max relative deviation.
Check check_derivatives(const singscat::MatchingSolution& sol, int points = 20);

/// Value and slope mismatch of the matched sum at the seam.
Check check_seam_continuity(const singscat::ScatteringResult& res);

/// |delta_series - delta_oracle| on the unwrapped branch.
Check check_oracle_agreement(const singscat::ScatteringResult& res, const singscat::OracleConfig& cfg,
                             double tolerance = 1e-2);

/// Phase shift with the auxiliary pair (1, 1) (or `alt` when given) against
/// the default (0, 1).
Check check_aux_invariance(const singscat::MatchingSolution& sol, const singscat::SeriesOptions& opts, double c_alt = 1.0,
                           double s_alt = 1.0);

/// Series phase shift of the free problem.
Check check_free_phase(double k, int l, double R, const singscat::SeriesOptions& opts);

}  // namespace scatter

#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "singscat/matching.hpp"
#include "singscat/phase.hpp"

namespace singscat {

/// potential: the matched potential. free: potential removed, started from
/// jhat_l at the origin. hard_wall: potential removed, u(R_w) = 0.
enum class OracleMode { potential, free, hard_wall };

const char* to_string(OracleMode mode) noexcept;

struct OracleConfig {
  double start_depth = 0.0;  // r_start / R; 0 picks the shallowest start whose Riccati phase reaches start_phase
  double start_phase = 40.0;
  double r_max = 0.0;  // 0: max(20/k, 3.2 R, first r with g^2 U < 1e-10 k^2)
  double rtol = 1e-10;
  double atol = 1e-12;
  double step = 0.0;  // two-point recursion step; 0 means (48 rtol / (k r_max))^{1/4} / k
  double switch_band = 0.05;
  OracleMode mode = OracleMode::potential;
  double wall_radius = 1.0;

  /// Throws Error(config) on non-positive tolerances or out-of-range radii.
  void validate() const;
};

struct OracleSample {
  double r = 0.0;
  double u = 0.0;
  double du = 0.0;         // du/dr
  double log_abs_u = 0.0;  // finite in the core where u underflows
};

struct OracleSolution {
  std::vector<OracleSample> samples;  // ascending r
  std::size_t switch_index = 0;       // first sample of the oscillatory phase
  double r_start = 0.0;
  double r_switch = 0.0;
  double r_max = 0.0;
  double prufer = 0.0;  // unwrapped atan2(k u, u') at r_max
  std::size_t riccati_steps = 0;
  std::size_t recursion_steps = 0;
  bool with_potential = false;

  /// Cubic Hermite interpolation of u (log-space in the core) and du/dr.
  double value_at(double r) const;
  double derivative_at(double r) const;
};

/// Regular solution of u'' = (g^2 U + l(l+1)/r^2 - k^2) u.
///
/// Inside the forbidden core the log-derivative y = u'/u obeys
/// y' = Q - y^2 and is started on the decaying branch y = +sqrt(Q); the
/// flow is attracted onto the regular direction at rate 2 sqrt(Q), which is
/// also what makes it stiff, so it is advanced with an L-stable Rosenbrock
/// stepper. Once the effective potential drops below (1 + band) k^2 the
/// solution is continued with the Numerov recursion, normalized to u = 1 at
/// the switch.
OracleSolution integrate_regular(const MatchingSolution& sol, const OracleConfig& cfg = {});

/// Numerov recursion from (r0, u0, du0) to r_end with step h (the last
/// step is shortened by adjusting h so that r_end is a node).
std::vector<OracleSample> integrate_allowed(const MatchingSolution& sol, bool with_potential, double r0, double u0,
                                            double du0, double r_end, double h);

/// Matches (u, u') at r_max to jhat_l, nhat_l. The branch follows the
/// accumulated Pruefer angle minus (k r_max - l pi / 2). Throws
/// not_asymptotic when the potential at r_max is not below 1e-10 k^2.
PhaseShift phase_shift_oracle(const MatchingSolution& sol, const OracleConfig& cfg = {});
PhaseShift phase_shift_oracle(const MatchingSolution& sol, const OracleSolution& run);

void write_oracle_csv(std::ostream& out, const OracleSolution& run);

}  // namespace singscat

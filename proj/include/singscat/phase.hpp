#pragma once

namespace singscat {

/// Riccati-Bessel functions jhat_l(x) = x j_l(x), nhat_l(x) = x y_l(x) and
/// their x-derivatives. nhat_0(x) = -cos x.
struct RiccatiBessel {
  double j;
  double dj;
  double n;
  double dn;
};

RiccatiBessel riccati_bessel(int l, double x);

/// delta in (-pi/2, pi/2] plus the integer branch count that places the
/// unwrapped phase (delta + branch * pi) nearest to a continuous estimate.
struct PhaseShift {
  double delta = 0.0;
  int branch = 0;
  double unwrapped() const;
};

/// Matches (u, du/dr) at radius r against u = a jhat_l(kr) + b nhat_l(kr)
/// and returns delta = atan2(-b, a) folded into (-pi/2, pi/2]. The branch
/// is chosen from `unwrapped_estimate` when it is finite.
PhaseShift extract_phase(int l, double k, double r, double u, double du_dr, double unwrapped_estimate);

/// Folds an angle into (-pi/2, pi/2].
double fold_half_pi(double angle);

}  // namespace singscat

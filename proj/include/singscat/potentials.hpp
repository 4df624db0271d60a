#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace singscat {

/// Exponential or power-law dependence of one potential factor.
enum class Law : char { E = 'E', P = 'P' };

/// Optional overrides for the fixed class parameters. Unset exponents fall
/// back to per-class defaults (see default_sigma0 / default_sigma2).
struct ClassParams {
  double r0 = 1.0;
  double r1 = 1.0;
  double r2 = 1.0;
  std::optional<double> sigma0;
  std::optional<double> sigma2;
};

/// One of the eight repulsive singular potential classes
///
///   g^2 U(s; r) = g^2(R) * V_core(s; r) * V_tail(r)
///
/// tagged by the triad (coupling law, core law, tail law):
///
///   coupling E: g^2 = e^{-R/r0} / r0^2        P: g^2 = (r0/R)^sigma0 / r0^2
///   core     E: e^{r1 s / r}                  P: ((r1 + r)/r)^s
///   tail     E: e^{-r/r2}                     P: (r2/(r2 + r))^sigma2
struct PotentialClass {
  Law coupling = Law::E;
  Law core = Law::E;
  Law tail = Law::E;
  double r0 = 1.0;
  double r1 = 1.0;
  double r2 = 1.0;
  double sigma0 = 5.0;
  double sigma2 = 10.0;

  std::string tag() const;

  /// Minimum tail exponent for this triad (exclusive); 0 when the tail is E.
  double sigma2_bound() const noexcept;

  /// Throws Error(precondition) when a length or exponent is out of range.
  void validate() const;
};

/// Parses a three-letter tag such as "EEP" and validates the result.
PotentialClass make_class(std::string_view tag, const ClassParams& params = {});

/// All eight triads in the order EEE, EEP, EPE, EPP, PEE, PEP, PPE, PPP.
std::array<PotentialClass, 8> all_classes(const ClassParams& params = {});

double default_sigma0() noexcept;
double default_sigma2(Law core) noexcept;

/// Potential value carried both as a logarithm and, when representable, as a
/// plain double. `value` is +inf when exp(log_value) overflows.
struct PotentialValue {
  double log_value;
  double value;
};

/// g^2(R). Strictly decreasing in R.
double coupling(const PotentialClass& cls, double R);
double log_coupling(const PotentialClass& cls, double R);

/// ln V_core(s; r) and ln V_tail(r).
double log_core(const PotentialClass& cls, double s, double r);
double log_tail(const PotentialClass& cls, double r);

/// g^2 U(s; r) at matching radius R.
PotentialValue potential_value(const PotentialClass& cls, double s, double R, double r);

/// ln[U(s; R t) / U(s; R)] evaluated without cancellation near t = 1
/// (the coupling cancels).
double log_potential_ratio(const PotentialClass& cls, double s, double R, double t);

/// First and second t-derivatives of ln U(s; R t).
struct LogDerivatives {
  double first;
  double second;
};
LogDerivatives log_potential_derivatives(const PotentialClass& cls, double s, double R, double t);

}  // namespace singscat

#include "singscat/potentials.hpp"

#include <cmath>
#include <limits>

#include "singscat/error.hpp"

namespace singscat {

namespace {

Law parse_law(char c, std::string_view tag) {
  if (c == 'E' || c == 'e') return Law::E;
  if (c == 'P' || c == 'p') return Law::P;
  throw Error(ErrorKind::config, "invalid potential class tag '" + std::string(tag) + "'");
}

void require_positive_r(double r, const char* what) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw Error(ErrorKind::domain, std::string(what) + " must be a positive finite length",
                {{"value", r}});
  }
}

}  // namespace

double default_sigma0() noexcept { return 5.0; }

double default_sigma2(Law core) noexcept { return core == Law::E ? 10.0 : 5.0; }

std::string PotentialClass::tag() const {
  return {static_cast<char>(coupling), static_cast<char>(core), static_cast<char>(tail)};
}

double PotentialClass::sigma2_bound() const noexcept {
  if (tail == Law::E) return 0.0;
  if (core == Law::E) return 8.0;  // EEP, PEP
  return coupling == Law::E ? 2.0 : 4.0;  // EPP, PPP
}

void PotentialClass::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(r0) || !positive(r1) || !positive(r2)) {
    throw Error(ErrorKind::precondition, "class " + tag() + ": r0, r1, r2 must be positive",
                {{"r0", r0}, {"r1", r1}, {"r2", r2}});
  }
  if (coupling == Law::P && !positive(sigma0)) {
    throw Error(ErrorKind::precondition, "class " + tag() + ": sigma0 must be positive",
                {{"sigma0", sigma0}});
  }
  if (tail == Law::P) {
    const double bound = sigma2_bound();
    if (!(sigma2 > bound) || !std::isfinite(sigma2)) {
      throw Error(ErrorKind::precondition,
                  "class " + tag() + ": tail exponent must satisfy sigma2 > " +
                      std::to_string(static_cast<int>(bound)),
                  {{"sigma2", sigma2}, {"bound", bound}});
    }
  }
}

PotentialClass make_class(std::string_view tag, const ClassParams& params) {
  if (tag.size() != 3) {
    throw Error(ErrorKind::config, "invalid potential class tag '" + std::string(tag) + "'");
  }
  PotentialClass cls;
  cls.coupling = parse_law(tag[0], tag);
  cls.core = parse_law(tag[1], tag);
  cls.tail = parse_law(tag[2], tag);
  cls.r0 = params.r0;
  cls.r1 = params.r1;
  cls.r2 = params.r2;
  cls.sigma0 = params.sigma0.value_or(default_sigma0());
  cls.sigma2 = params.sigma2.value_or(default_sigma2(cls.core));
  cls.validate();
  return cls;
}

std::array<PotentialClass, 8> all_classes(const ClassParams& params) {
  static constexpr std::array<std::string_view, 8> tags = {"EEE", "EEP", "EPE", "EPP",
                                                           "PEE", "PEP", "PPE", "PPP"};
  std::array<PotentialClass, 8> out;
  for (std::size_t i = 0; i < tags.size(); ++i) out[i] = make_class(tags[i], params);
  return out;
}

double log_coupling(const PotentialClass& cls, double R) {
  if (cls.coupling == Law::E) {
    if (!(R >= 0.0)) throw Error(ErrorKind::domain, "coupling: R must be nonnegative", {{"R", R}});
    return -2.0 * std::log(cls.r0) - R / cls.r0;
  }
  require_positive_r(R, "coupling: R");
  return -2.0 * std::log(cls.r0) + cls.sigma0 * std::log(cls.r0 / R);
}

double coupling(const PotentialClass& cls, double R) { return std::exp(log_coupling(cls, R)); }

double log_core(const PotentialClass& cls, double s, double r) {
  require_positive_r(r, "core factor: r");
  if (cls.core == Law::E) return cls.r1 * s / r;
  return s * std::log1p(cls.r1 / r);
}

double log_tail(const PotentialClass& cls, double r) {
  if (cls.tail == Law::E) return -r / cls.r2;
  return -cls.sigma2 * std::log1p(r / cls.r2);
}

PotentialValue potential_value(const PotentialClass& cls, double s, double R, double r) {
  require_positive_r(r, "potential_value: r");
  require_positive_r(R, "potential_value: R");
  if (!(s >= 0.0)) throw Error(ErrorKind::domain, "potential_value: s must be nonnegative", {{"s", s}});
  const double lv = log_coupling(cls, R) + log_core(cls, s, r) + log_tail(cls, r);
  return {lv, std::exp(lv)};
}

double log_potential_ratio(const PotentialClass& cls, double s, double R, double t) {
  require_positive_r(t, "log_potential_ratio: t");
  double out = 0.0;
  if (cls.core == Law::E) {
    out += cls.r1 * s / R * (1.0 - t) / t;
  } else {
    const double a = cls.r1 / R;
    out += s * std::log1p(a * (1.0 - t) / (t * (1.0 + a)));
  }
  if (cls.tail == Law::E) {
    out -= R * (t - 1.0) / cls.r2;
  } else {
    out -= cls.sigma2 * std::log1p(R * (t - 1.0) / (cls.r2 + R));
  }
  return out;
}

LogDerivatives log_potential_derivatives(const PotentialClass& cls, double s, double R, double t) {
  require_positive_r(t, "log_potential_derivatives: t");
  LogDerivatives d{0.0, 0.0};
  if (cls.core == Law::E) {
    const double a = cls.r1 * s / R;
    d.first -= a / (t * t);
    d.second += 2.0 * a / (t * t * t);
  } else {
    const double a = cls.r1 / R;
    const double tt = t * (t + a);
    d.first -= s * a / tt;
    d.second += s * a * (2.0 * t + a) / (tt * tt);
  }
  if (cls.tail == Law::E) {
    d.first -= R / cls.r2;
  } else {
    const double q = cls.r2 + R * t;
    d.first -= cls.sigma2 * R / q;
    d.second += cls.sigma2 * R * R / (q * q);
  }
  return d;
}

}  // namespace singscat

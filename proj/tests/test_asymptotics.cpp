#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "singscat/asymptotics.hpp"
#include "singscat/error.hpp"

using namespace singscat;

namespace {

double value(const LogValue& v) { return v.sign * std::exp(v.log_abs); }

}  // namespace

TEST_CASE("EEE discriminant spot value at R = 10") {
  const auto sol = match_at_radius(make_class("EEE"), 1.0, 0, 10.0);
  const auto row = compare_discriminant(sol, 0.5);
  // hand evaluation of the printed limit form
  CHECK(value(row.asymptotic) == doctest::Approx(-1.887e-4).epsilon(1e-3));
  CHECK(value(row.exact) == doctest::Approx(-1.887e-4).epsilon(0.2));
  CHECK(row.log_deviation == doctest::Approx(std::abs(row.exact.log_abs - row.asymptotic.log_abs)));
}

TEST_CASE("EEE stage limit is exact") {
  for (double R : {5.0, 10.0, 40.0}) {
    const auto tr = lambda_triad(0);
    CHECK(asymptotic_stage(make_class("EEE"), 1.0, tr, R) ==
          doctest::Approx(solve_stage(make_class("EEE"), 1.0, tr, R)).epsilon(1e-12));
  }
}

TEST_CASE("stage limits that approach the exact stage") {
  const auto tr = lambda_triad(0);
  for (const char* tag : {"EEP", "PEE"}) {
    const auto c = make_class(tag);
    const double d10 = std::abs(asymptotic_stage(c, 1.0, tr, 10.0) / solve_stage(c, 1.0, tr, 10.0) - 1.0);
    const double d100 = std::abs(asymptotic_stage(c, 1.0, tr, 100.0) / solve_stage(c, 1.0, tr, 100.0) - 1.0);
    CHECK(d100 < d10);
  }
}

TEST_CASE("K^2 limit forms") {
  const auto eee = match_at_radius(make_class("EEE"), 1.0, 0, 10.0);
  const auto r = compare_k_squared(Region::epsilon, eee, 0.5);
  CHECK(r.exact.log_abs == doctest::Approx(r.asymptotic.log_abs).epsilon(1e-3));
  CHECK(std::exp(r.exact.log_abs) == doctest::Approx(std::exp(r.asymptotic.log_abs)).epsilon(5e-3));
  // tau side of a P-tail class: k^2 - lambda_tau^2 / (R t)^2
  const auto ppp = match_at_radius(make_class("PPP"), 1.0, 1, 10.0);
  const auto a = asymptotic_k_squared(Region::tau, ppp, 2.0);
  CHECK(value(a) == doctest::Approx(1.0 - 2.0 / 400.0).epsilon(1e-14));
  CHECK(k_squared(Region::tau, ppp, 3.0) ==
        doctest::Approx(value(asymptotic_k_squared(Region::tau, ppp, 3.0))).epsilon(1e-8));
}

TEST_CASE("tau discriminant limit") {
  const auto sol = match_at_radius(make_class("EEE"), 1.0, 1, 2.0);
  CHECK(asymptotic_discriminant_tau(sol, 1.0) == doctest::Approx(-0.75).epsilon(1e-14));
  CHECK(asymptotic_discriminant_tau(sol, 2.0) == doctest::Approx(-0.75 / 16.0).epsilon(1e-14));
}

TEST_CASE("order ratios") {
  const auto tr = lambda_triad(0);
  CHECK(order_ratio(make_class("EEE"), 1.0, tr, 1000.0) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(order_ratio(make_class("EPE"), 1.0, tr, 1000.0) == doctest::Approx(2.0).epsilon(1e-3));
  for (const char* tag : {"EEP", "PEE", "PPE"}) {
    CHECK(std::abs(order_ratio(make_class(tag), 1.0, tr, 1000.0) - 1.0) <
          std::abs(order_ratio(make_class(tag), 1.0, tr, 100.0) - 1.0));
  }
}

TEST_CASE("pre-asymptotic stage is reported") {
  // small R: the printed right-hand side has not yet exceeded 1
  bool threw = false;
  for (const auto& c : all_classes()) {
    for (double R : {1.0, 1.5}) {
      try {
        asymptotic_stage(c, 1.0, lambda_triad(0), R);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::pre_asymptotic);
        threw = true;
      }
    }
  }
  CHECK(threw);
}

TEST_CASE("order-0 wave function equals the cutoff-(0,0) series") {
  const auto sol = match_at_radius(make_class("PEP"), 1.0, 0, 5.0);
  SeriesOptions o;
  o.N = 0;
  o.M = 0;
  const auto res = solve_series(sol, o);
  const auto c0 = leading_coefficients(sol);
  CHECK(c0.c_plus == doctest::Approx(res.coeffs.c_plus).epsilon(1e-6));
  CHECK(c0.s_plus == doctest::Approx(res.coeffs.s_plus).epsilon(1e-6));
  for (double t : {0.7, 0.95, 1.0, 1.3, 2.5}) {
    const auto a = asymptotic_wavefunction(sol, c0, t);
    const auto b = wavefunction(res, t);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-6));
  }
}

TEST_CASE("leading deviation bookkeeping") {
  const auto sol = match_at_radius(make_class("EEE"), 1.0, 0, 10.0);
  SeriesOptions o;
  o.N = 2;
  o.M = 2;
  const auto d = leading_deviation(sol, o);
  CHECK(d.deviation > 0.0);
  CHECK(d.sup_full > 0.0);
  CHECK(d.t_at_max >= 0.5);
  CHECK(d.t_at_max <= 3.0);
  const auto again = leading_deviation(solve_series(sol, o), o);
  CHECK(again.deviation == d.deviation);
  CHECK_THROWS_AS(leading_deviation(sol, o, 2.0, 1.0), Error);
}

TEST_CASE("asymptotic rows to CSV") {
  const auto sol = match_at_radius(make_class("PPP"), 1.0, 0, 20.0);
  std::vector<AsymptoticRow> rows{compare_discriminant(sol, 0.5), compare_stage(sol.cls, 1.0, sol.triad, 20.0)};
  std::ostringstream os;
  write_asymptotic_csv(os, rows);
  const std::string s = os.str();
  CHECK(s.rfind("class,quantity,R[length]", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 3);
}

// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// `acceptance --criterion N` runs one criterion; the exit status is nonzero
// when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "checks.hpp"
#include "singscat/asymptotics.hpp"
#include "singscat/error.hpp"
#include "singscat/localwave.hpp"
#include "singscat/numerics.hpp"
#include "singscat/oracle.hpp"
#include "singscat/series.hpp"

using namespace singscat;

namespace {

struct Verdict {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;

  template <class... A>
  void note(const char* fmt, A... args) {
    if constexpr (sizeof...(A) == 0) {
      details.emplace_back(fmt);
    } else {
      char buf[512];
      std::snprintf(buf, sizeof buf, fmt, args...);
      details.emplace_back(buf);
    }
  }
};

bool feasible(int l, double k, double R) { return k * R * k * R > lambda_triad(l).lambda_sq; }

// 1. K^2(1) = 1/(8R^2) in both regions. The library form is exact at t = 1
// by construction, so K^2(1) is also rebuilt from V(R) at the solved stage.
Verdict matching_identity() {
  Verdict v;
  double worst = 0.0, worst_direct = 0.0, worst_excess = 0.0;
  int points = 0, skipped = 0;
  for (double k : {1.0, 2.0}) {
    for (const auto& c : all_classes()) {
      for (int l : {0, 1, 2}) {
        for (double R : {2.0, 5.0, 10.0, 50.0}) {
          if (!feasible(l, k, R)) {
            ++skipped;
            continue;
          }
          const auto sol = match_at_radius(c, k, l, R);
          worst = std::max(worst, scatter::check_matching_identity(sol).measured);
          const double V = potential_value(c, sol.s, R, R).value;
          const double target = 1.0 / (8.0 * R * R);
          const double ke = sol.triad.lambda_eps_sq / (R * R) - k * k + V;
          const double kt = k * k - V - sol.triad.lambda_tau_sq / (R * R);
          const double dev = std::max(std::abs(ke / target - 1.0), std::abs(kt / target - 1.0));
          // dev = 8R^2 |V(R) - u_R|: the stage residual, bounded through its 1e-12 k^2 tolerance
          worst_direct = std::max(worst_direct, dev);
          worst_excess = std::max(worst_excess, dev / std::max(1e-12, 8.0 * k * k * R * R * 1e-12));
          ++points;
        }
      }
    }
  }
  v.pass = worst <= 1e-12 && worst_excess <= 1.0;
  v.note("k = 1 and k = 2 over 8 classes x l {0,1,2} x R {2,5,10,50}: %d points, %d skipped (k R <= lambda)", points,
         skipped);
  v.note("k = 1, l = 2, R = 2 has k^2 R^2 = 4 < lambda^2 = 6.125: no matching stage, covered at k = 2");
  v.note("library K^2(1): max |K^2(1) 8R^2 - 1| = %.3e (tolerance 1e-12)", worst);
  v.note("direct lambda^2/R^2 - k^2 + V(R) at the solved stage: max relative deviation %.3e, "
         "max ratio to the propagated stage tolerance 8 k^2 R^2 1e-12 = %.3f",
         worst_direct, worst_excess);
  char buf[160];
  std::snprintf(buf, sizeof buf, "library %.3e, direct %.3e over %d points", worst, worst_direct, points);
  v.summary = buf;
  return v;
}

// 2. solve_matching_radius(solve_stage(R)) = R, residual small.
Verdict round_trip() {
  Verdict v;
  double worst_r = 0.0, worst_res = 0.0;
  int points = 0;
  for (double k : {1.0, 2.0}) {
    for (const auto& c : all_classes()) {
      for (int l : {0, 1, 2}) {
        for (double R : {2.0, 5.0, 10.0, 50.0}) {
          if (!feasible(l, k, R)) continue;
          const auto sol = match_at_radius(c, k, l, R);
          worst_r = std::max(worst_r, scatter::check_round_trip(sol).measured);
          worst_res = std::max(worst_res, scatter::check_master_residual(sol).measured);
          ++points;
        }
      }
    }
  }
  v.pass = worst_r <= 1e-9 && worst_res <= 1e-12;
  v.note("%d points (same grid as criterion 1)", points);
  v.note("max |R(s(R))/R - 1| = %.3e (tolerance 1e-9)", worst_r);
  v.note("max |residual| / (k^2 R^2) = %.3e (tolerance 1e-12)", worst_res);
  char buf[160];
  std::snprintf(buf, sizeof buf, "round trip %.3e, residual %.3e", worst_r, worst_res);
  v.summary = buf;
  return v;
}

// 3. Order-0 epsilon Wronskian -2kR and its constancy.
Verdict wronskian() {
  Verdict v;
  double worst = 0.0, spread = 0.0;
  int points = 0;
  for (const auto& c : all_classes()) {
    for (int l : {0, 1}) {
      for (double R : {2.0, 5.0, 10.0}) {
        const auto sol = match_at_radius(c, 1.0, l, R);
        worst = std::max(worst, scatter::check_wronskian_eps(sol).measured);
        spread = std::max(spread, scatter::check_wronskian_eps_constancy(sol).measured);
        ++points;
      }
    }
  }
  v.pass = worst <= 1e-8 && spread <= 1e-8;
  v.note("8 classes x l {0,1} x R {2,5,10}, k = 1, t = 0.5 0.6 0.7 0.8 0.9 (%d solutions)", points);
  v.note("max |W/(-2kR) - 1| = %.3e, max spread (max W - min W)/2kR = %.3e (tolerance 1e-8)", worst, spread);
  char buf[128];
  std::snprintf(buf, sizeof buf, "value %.3e, constancy %.3e", worst, spread);
  v.summary = buf;
  return v;
}

// 4. Analytic K^2 derivatives against finite differences.
Verdict derivatives() {
  Verdict v;
  double worst = 0.0;
  for (const auto& c : all_classes()) {
    double cw = 0.0;
    for (double R : {5.0, 10.0}) cw = std::max(cw, scatter::check_derivatives(match_at_radius(c, 1.0, 1, R), 20).measured);
    v.note("%s: 20 points per solution, R {5,10}, l = 1: max relative deviation %.3e", c.tag().c_str(), cw);
    worst = std::max(worst, cw);
  }
  v.pass = worst <= 1e-6;
  char buf[128];
  std::snprintf(buf, sizeof buf, "max relative deviation %.3e (tolerance 1e-6)", worst);
  v.summary = buf;
  return v;
}

// 5. Convergence integrals: finite, decreasing in R; asymptotic P_tau.
Verdict convergence_integrals() {
  Verdict v;
  bool finite = true, decreasing = true;
  int rising = 0;
  for (const auto& c : all_classes()) {
    for (int l : {0, 1}) {
      double pe_prev = HUGE_VAL, pt_prev = HUGE_VAL;
      bool row_down = true;
      std::string row;
      for (double R : {5.0, 10.0, 20.0}) {
        const auto sol = match_at_radius(c, 1.0, l, R);
        const double pe = convergence_integral(Region::epsilon, sol, 1.0).value;
        const double pt = convergence_integral(Region::tau, sol, 50.0).value;
        finite &= std::isfinite(pe) && std::isfinite(pt);
        row_down &= pe < pe_prev && pt < pt_prev;
        pe_prev = pe;
        pt_prev = pt;
        char buf[96];
        std::snprintf(buf, sizeof buf, " R=%g: %.4e / %.4e", R, pe, pt);
        row += buf;
      }
      decreasing &= row_down;
      rising += !row_down;
      v.note("%s l=%d P_eps(1) / P_tau(50):%s", c.tag().c_str(), l, row.c_str());
    }
  }
  // R int_1^inf |p_tau| with the printed large-t form, against lambda_tau^2 / (2 k^2 R)
  const auto sol = match_at_radius(make_class("EEE"), 1.0, 1, 2.0);
  const double target = sol.triad.lambda_tau_sq / (2.0 * sol.k * sol.k * sol.R);
  const std::vector<double> br{0.0, 0.5, 1.0};  // x = 1/t
  const double tail = numerics::integrate(
                          [&](double x) {
                            if (x <= 0.0) return 0.0;
                            const double t = 1.0 / x;
                            return std::abs(asymptotic_discriminant_tau(sol, t)) * t * t;
                          },
                          br)
                          .value *
                      sol.R;
  const double exact = convergence_integral(Region::tau, sol, 1e4).value;
  const bool tail_ok = std::abs(tail / target - 1.0) <= 0.05;
  v.note("l=1, R=2: R int |printed p_tau| = %.6f vs lambda_tau^2/(2k^2R) = %.6f (%s within 5%%)", tail, target,
         tail_ok ? "" : "NOT");
  v.note("  exact P_tau(1e4) at l=1, R=2 = %.6f; the printed large-t form is Delta_tau, which lacks the 1/(kR) of "
         "p_tau, so the exact tail is %.4f", exact, target / (sol.k * sol.R));
  v.note("finite: %s; decreasing in R: %s (%d of 16 rows rise); P grows like R^4 because the seam peak of |p| "
         "scales as R^3 over a width 1/R times the factor R",
         finite ? "yes" : "NO", decreasing ? "yes" : "NO", rising);
  v.pass = finite && decreasing && tail_ok;
  char buf[160];
  std::snprintf(buf, sizeof buf, "finite=%s, decreasing=%s, printed P_tau tail %.4f vs 0.5", finite ? "yes" : "no",
                decreasing ? "yes" : "no", tail);
  v.summary = buf;
  return v;
}

SeriesOptions cutoff(int N, int M) {
  SeriesOptions o;
  o.N = N;
  o.M = M;
  return o;
}

// 6. Deviation of the matched (2,2) sum from the order-0 solution.
Verdict reduction() {
  Verdict v;
  bool monotone = true, small = true;
  double worst40 = 0.0;
  for (const auto& c : all_classes()) {
    double prev = HUGE_VAL;
    std::string row;
    for (double R : {5.0, 10.0, 20.0, 40.0}) {
      const double d = leading_deviation(match_at_radius(c, 1.0, 0, R), cutoff(2, 2)).deviation;
      monotone &= d < prev;
      prev = d;
      if (R == 40.0) {
        small &= d <= 0.01;
        worst40 = std::max(worst40, d);
      }
      char buf[48];
      std::snprintf(buf, sizeof buf, " %.4g", d);
      row += buf;
    }
    v.note("%s sup|u22 - u00| / sup|u22| over t in [0.5,3] at R 5,10,20,40:%s", c.tag().c_str(), row.c_str());
  }
  v.pass = monotone && small;
  char buf[160];
  std::snprintf(buf, sizeof buf, "monotone=%s, max deviation at R=40 %.3f (tolerance 0.01)", monotone ? "yes" : "no",
                worst40);
  v.summary = buf;
  return v;
}

// 7. Series against the ODE oracle.
Verdict oracle_equivalence() {
  Verdict v;
  ClassParams p;
  p.sigma0 = 5.0;
  p.sigma2 = 5.0;
  double worst_phase = 0.0, worst_wave = 0.0, conv_phase = 0.0;
  for (const char* tag : {"EEE", "PPP"}) {
    for (double R : {3.0, 5.0, 8.0}) {
      const auto sol = match_at_radius(make_class(tag, p), 1.0, 0, R);
      const auto run = integrate_regular(sol);
      const double d_oracle = phase_shift_oracle(sol, run).delta;
      const auto res = solve_series(sol, cutoff(2, 2));
      const double dphi = std::abs(fold_half_pi(res.phase.delta - d_oracle));
      const double u1 = wavefunction(res, 1.0).value, o1 = run.value_at(R);
      double diff = 0.0, peak = 0.0;
      for (int i = 0; i <= 440; ++i) {
        const double t = 0.8 + 2.2 * i / 440.0;
        const double us = wavefunction(res, t).value / u1, uo = run.value_at(R * t) / o1;
        diff = std::max(diff, std::abs(us - uo));
        peak = std::max(peak, std::abs(uo));
      }
      const auto conv = solve_series(sol, cutoff(16, 16));
      const double dconv = std::abs(fold_half_pi(conv.phase.delta - d_oracle));
      worst_phase = std::max(worst_phase, dphi);
      worst_wave = std::max(worst_wave, diff / peak);
      conv_phase = std::max(conv_phase, dconv);
      v.note("%s R=%g: oracle %.8f, series(2,2) %.8f (|diff| %.3e), wave sup dev %.3e; series(16,16) %.8f (|diff| %.1e)",
             tag, R, d_oracle, res.phase.delta, dphi, diff / peak, conv.phase.delta, dconv);
    }
  }
  v.note("at cutoff (16,16) the series meets the oracle to %.1e rad: the machinery is right, the (2,2) truncation "
         "is not yet converged at these R",
         conv_phase);
  v.pass = worst_phase <= 1e-2 && worst_wave <= 1e-3;
  char buf[160];
  std::snprintf(buf, sizeof buf, "cutoff (2,2): max phase diff %.3e rad (tol 1e-2), max wave dev %.3e (tol 1e-3)",
                worst_phase, worst_wave);
  v.summary = buf;
  return v;
}

// 8. Printed p_eps limit forms approach the exact discriminant.
Verdict asymptotic_forms() {
  Verdict v;
  int decreasing = 0;
  for (const auto& c : all_classes()) {
    double prev = HUGE_VAL;
    bool mono = true;
    std::string row;
    for (double R : {10.0, 20.0, 40.0, 80.0}) {
      const double d = compare_discriminant(match_at_radius(c, 1.0, 0, R), 0.5).log_deviation;
      mono &= d < prev;
      prev = d;
      char buf[48];
      std::snprintf(buf, sizeof buf, " %.4g", d);
      row += buf;
    }
    decreasing += mono;
    v.note("%s |ln|p_exact| - ln|p_printed|| at t=0.5, R 10,20,40,80:%s  %s", c.tag().c_str(), row.c_str(),
           mono ? "decreasing" : "NOT decreasing");
  }
  const auto spot = compare_discriminant(match_at_radius(make_class("EEE"), 1.0, 0, 10.0), 0.5);
  const double exact = spot.exact.sign * std::exp(spot.exact.log_abs);
  const double printed = spot.asymptotic.sign * std::exp(spot.asymptotic.log_abs);
  const bool spot_ok = std::abs(exact / -1.887e-4 - 1.0) <= 0.2;
  v.note("EEE R=10 t=0.5: exact %.5e, printed form %.5e, hand value -1.887e-4 (exact within 20%%: %s)", exact, printed,
         spot_ok ? "yes" : "NO");
  v.pass = decreasing == 8 && spot_ok;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d of 8 classes decreasing; EEE spot %.4e (%s)", decreasing, exact,
                spot_ok ? "within 20%" : "outside 20%");
  v.summary = buf;
  return v;
}

// 9. g^2 down, s up along R; EEE order ratio.
Verdict double_limit() {
  Verdict v;
  bool ok = true;
  for (const auto& c : all_classes()) {
    double g_prev = HUGE_VAL, s_prev = -HUGE_VAL;
    std::string row;
    for (double R : {10.0, 100.0, 1000.0}) {
      const auto sol = match_at_radius(c, 1.0, 0, R);
      ok &= sol.g2 < g_prev && sol.s > s_prev;
      g_prev = sol.g2;
      s_prev = sol.s;
      char buf[64];
      std::snprintf(buf, sizeof buf, " (%.3e, %.5g)", sol.g2, sol.s);
      row += buf;
    }
    v.note("%s (g2, s) at R 10,100,1000:%s", c.tag().c_str(), row.c_str());
  }
  const double ratio = order_ratio(make_class("EEE"), 1.0, lambda_triad(0), 1000.0);
  const bool ratio_ok = std::abs(ratio - 2.0) <= 1e-3;
  v.note("EEE s r1 / R^2 at R=1000 = %.8f, limit 1/r0 + 1/r2 = 2", ratio);
  v.pass = ok && ratio_ok;
  char buf[128];
  std::snprintf(buf, sizeof buf, "monotone=%s, EEE order ratio %.6f (|.-2| %.1e)", ok ? "yes" : "no", ratio,
                std::abs(ratio - 2.0));
  v.summary = buf;
  return v;
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  bool quiet = false;
  app.add_option("--criterion", only, "criterion numbers to run (default: all)")->delimiter(',');
  app.add_flag("--quiet", quiet, "summary lines only");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "matching-point identity", 1.0, matching_identity},
      {2, "master-equation round trip", 1.0, round_trip},
      {3, "epsilon Wronskian", 1.0, wronskian},
      {4, "K^2 derivative oracle", 5.0, derivatives},
      {5, "convergence integrals", 30.0, convergence_integrals},
      {6, "reduction to the leading term", 300.0, reduction},
      {7, "oracle equivalence", 120.0, oracle_equivalence},
      {8, "asymptotic discriminant forms", 30.0, asymptotic_forms},
      {9, "double-limit witness", 1.0, double_limit},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.summary = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::printf("CRITERION %d %s  %s: %s [%.2f s, budget %.0f s%s]\n", c.id, pass ? "PASS" : "FAIL", c.title,
                v.summary.c_str(), secs, c.budget_s, in_time ? "" : ", OVER BUDGET");
    if (!quiet) {
      for (const auto& d : v.details) std::printf("    %s\n", d.c_str());
    }
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

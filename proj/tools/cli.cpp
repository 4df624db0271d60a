#include "cli.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "checks.hpp"
#include "report.hpp"
#include "singscat/asymptotics.hpp"
#include "singscat/error.hpp"
#include "singscat/localwave.hpp"
#include "singscat/matching.hpp"
#include "singscat/series.hpp"

namespace scatter {

using namespace singscat;

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static const auto log = [] {
    auto l = spdlog::stderr_logger_mt("scatter");
    const char* env = std::getenv("SCATTER_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return log;
}

[[noreturn]] void bad_config(const std::string& what, std::vector<Error::Detail> details = {}) {
  throw Error(ErrorKind::config, what, std::move(details));
}

std::vector<std::string> expand_classes(const std::vector<std::string>& in) {
  static const char* all[] = {"EEE", "EEP", "EPE", "EPP", "PEE", "PEP", "PPE", "PPP"};
  std::vector<std::string> out;
  for (const auto& c : in) {
    if (c == "all") out.insert(out.end(), std::begin(all), std::end(all));
    else out.push_back(c);
  }
  return out;
}

}  // namespace

int exit_code_for(const std::string& kind) {
  static const char* config_kinds[] = {"config", "domain", "precondition", "no_solution", "negative_stage"};
  for (const char* k : config_kinds) {
    if (kind == k) return config_error;
  }
  return numerical_failure;
}

RunConfig parse_config(int argc, const char* const* argv) {
  RunConfig cfg;
  CLI::App app{"Scattering by singular repulsive potentials at the matching distance"};
  app.set_config("--config", "", "flat key=value file; command-line flags override it");
  app.fallthrough();
  app.require_subcommand(1);

  std::vector<std::string> classes;
  double R = NAN, g2 = NAN, s = NAN, r0 = 1, r1 = 1, r2 = 1, sigma0 = NAN, sigma2 = NAN;
  std::vector<int> cutoff;
  std::vector<double> aux, sweep_list, sweep_range;
  std::string oracle_mode = "potential";
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());

  app.add_option("--class", classes, "class tags (EEE ... PPP) or 'all'")->delimiter(',');
  app.add_option("--r0", r0, "coupling length");
  app.add_option("--r1", r1, "core length");
  app.add_option("--r2", r2, "tail length");
  app.add_option("--sigma0", sigma0, "coupling exponent (P coupling)");
  app.add_option("--sigma2", sigma2, "tail exponent (P tail)");
  app.add_option("--k", cfg.k, "wave number");
  app.add_option("--l", cfg.l, "partial wave")->check(CLI::NonNegativeNumber);
  app.add_option("--R", R, "matching radius");
  app.add_option("--g2", g2, "coupling g^2");
  app.add_option("--s", s, "stage");
  app.add_option("--cutoff", cutoff, "series orders N,M")->delimiter(',')->expected(2);
  app.add_option("--level", cfg.level, "base grid level")->check(CLI::Range(0, 8));
  app.add_option("--aux-pair", aux, "auxiliary tau pair C-,S-")->delimiter(',')->expected(2);
  app.add_option("--sweep", sweep_list, "matching radii, strictly increasing")->delimiter(',');
  app.add_option("--sweep-range", sweep_range, "geometric range lo,hi,n")->delimiter(',')->expected(3);
  app.add_option("--t-probe", cfg.t_probe, "t for the discriminant comparison in sweeps");
  app.add_option("--out", cfg.out, "output path (default stdout)");
  app.add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", workers, "sweep worker threads")->check(CLI::PositiveNumber);
  app.add_option("--oracle-mode", oracle_mode, "potential, free or hard_wall")
      ->check(CLI::IsMember({"potential", "free", "hard_wall"}));
  app.add_option("--wall-radius", cfg.oracle.wall_radius, "hard-wall radius");
  app.add_option("--rtol", cfg.oracle.rtol, "oracle relative tolerance");
  app.add_option("--r-max", cfg.oracle.r_max, "oracle outer radius (0: automatic)");
  app.add_option("--start-depth", cfg.oracle.start_depth, "oracle start radius / R (0: automatic)");
  app.add_option("--inject-fault", cfg.inject_fault)->group("")->check(CLI::IsMember({"triad"}));

  for (const char* verb : {"solve", "sweep", "verify", "oracle"}) app.add_subcommand(verb);
  app.get_subcommand("solve")->description("one matched series solution, JSON (csv: wave function samples)");
  app.get_subcommand("sweep")->description("one row per class and matching radius, CSV or JSON");
  app.get_subcommand("verify")->description("invariant suite with measured values; exit 4 on any failure");
  app.get_subcommand("oracle")->description("direct integration of the radial equation, JSON (csv: samples)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    throw HelpRequested{target->help()};
  } catch (const CLI::ParseError& e) {
    bad_config(std::string("command line: ") + e.what());
  }
  for (auto* sub : app.get_subcommands()) cfg.verb = sub->get_name();

  if (!classes.empty()) cfg.classes = expand_classes(classes);
  cfg.params.r0 = r0;
  cfg.params.r1 = r1;
  cfg.params.r2 = r2;
  if (!std::isnan(sigma0)) cfg.params.sigma0 = sigma0;
  if (!std::isnan(sigma2)) cfg.params.sigma2 = sigma2;
  for (const auto& c : cfg.classes) make_class(c, cfg.params);  // validates tags and exponents

  if (!std::isnan(R)) cfg.R = R;
  if (!std::isnan(g2)) cfg.g2 = g2;
  if (!std::isnan(s)) cfg.s = s;
  if (cfg.R && (cfg.g2 || cfg.s)) {
    bad_config("give either --R or (--g2, --s), not both", {{"R", R}, {"g2", g2}, {"s", s}});
  }
  if (!(cfg.k > 0.0) || !std::isfinite(cfg.k)) bad_config("--k must be positive", {{"k", cfg.k}});
  if (cutoff.size() == 2) {
    cfg.N = cutoff[0];
    cfg.M = cutoff[1];
  }
  if (cfg.N < 0 || cfg.M < 0) bad_config("--cutoff orders must be nonnegative");
  if (aux.size() == 2) {
    cfg.c_minus = aux[0];
    cfg.s_minus = aux[1];
  }
  cfg.workers = workers;
  cfg.oracle.mode = oracle_mode == "free" ? OracleMode::free
                    : oracle_mode == "hard_wall" ? OracleMode::hard_wall
                                                 : OracleMode::potential;
  cfg.oracle.validate();

  if (cfg.verb == "sweep") {
    if (!sweep_range.empty()) {
      if (!sweep_list.empty()) bad_config("give either --sweep or --sweep-range");
      const double lo = sweep_range[0], hi = sweep_range[1];
      const int n = static_cast<int>(sweep_range[2]);
      if (!(lo > 0.0) || !(hi > lo) || n < 2 || n != sweep_range[2]) {
        bad_config("--sweep-range needs 0 < lo < hi and an integer n >= 2", {{"lo", lo}, {"hi", hi}});
      }
      for (int i = 0; i < n; ++i) sweep_list.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
      sweep_list.back() = hi;
    }
    if (sweep_list.empty()) bad_config("sweep: the list of matching radii is empty");
    for (std::size_t i = 1; i < sweep_list.size(); ++i) {
      if (!(sweep_list[i] > sweep_list[i - 1])) {
        bad_config("sweep: radii must be strictly increasing", {{"index", double(i)}, {"R", sweep_list[i]}});
      }
    }
    cfg.sweep = sweep_list;
  } else if (cfg.verb == "solve" || cfg.verb == "oracle") {
    if (cfg.classes.size() != 1) bad_config(cfg.verb + ": exactly one class");
    if (!cfg.R && !cfg.g2 && !cfg.s) bad_config(cfg.verb + ": give --R or (--g2, --s)");
  }
  return cfg;
}

namespace {

MatchingSolution matched_point(const RunConfig& cfg, const std::string& tag) {
  const PotentialClass cls = make_class(tag, cfg.params);
  MatchingSolution sol;
  if (cfg.R) {
    sol = match_at_radius(cls, cfg.k, cfg.l, *cfg.R);
  } else if (cfg.g2) {
    sol = match_at_radius(cls, cfg.k, cfg.l, radius_from_coupling(cls, *cfg.g2));
    if (cfg.s && !(std::abs(sol.s - *cfg.s) <= 1e-6 * std::max(1.0, std::abs(*cfg.s)))) {
      bad_config("(g2, s) is not on the matching surface: the stage at R(g2) differs",
                   {{"g2", *cfg.g2}, {"s", *cfg.s}, {"R", sol.R}, {"s_at_R", sol.s}});
    }
  } else {
    sol = match_at_stage(cls, cfg.k, cfg.l, *cfg.s);
  }
  if (cfg.inject_fault == "triad") {
    sol.triad.lambda_sq += 0.01;
    sol.u_R = sol.k * sol.k - sol.triad.lambda_sq / (sol.R * sol.R);
    logger()->warn("fault injected: lambda^2 shifted by 0.01");
  }
  return sol;
}

SeriesOptions series_options(const RunConfig& cfg) {
  SeriesOptions o;
  o.N = cfg.N;
  o.M = cfg.M;
  o.level = cfg.level;
  o.c_minus = cfg.c_minus;
  o.s_minus = cfg.s_minus;
  return o;
}

ordered_json params_json(const MatchingSolution& sol) {
  return {{"r0", sol.cls.r0}, {"r1", sol.cls.r1}, {"r2", sol.cls.r2}, {"sigma0", sol.cls.sigma0},
          {"sigma2", sol.cls.sigma2}};
}

ordered_json point_json(const MatchingSolution& sol) {
  ordered_json j;
  j["class"] = sol.cls.tag();
  j["params"] = params_json(sol);
  j["k"] = number(sol.k);
  j["l"] = sol.triad.l;
  j["R"] = number(sol.R);
  j["s"] = number(sol.s);
  j["g2"] = number(sol.g2);
  return j;
}

ordered_json numbers(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

struct Sink {
  std::ofstream file;
  std::ostream* os;
  explicit Sink(const RunConfig& cfg, std::ostream& fallback) : os(&fallback) {
    if (!cfg.out.empty()) {
      file.open(cfg.out);
      if (!file) bad_config("cannot open --out path '" + cfg.out + "'");
      os = &file;
    }
  }
};

int cmd_solve(const RunConfig& cfg, std::ostream& fallback) {
  const MatchingSolution sol = matched_point(cfg, cfg.classes.front());
  const SeriesOptions opts = series_options(cfg);
  logger()->info("solve {} R={} s={} cutoff=({},{})", sol.cls.tag(), sol.R, sol.s, opts.N, opts.M);
  const ScatteringResult res = solve_series(sol, opts);
  Sink sink(cfg, fallback);
  if (cfg.format == "csv") {
    Table t{{"t[1]", "u[1]", "du_dt[1]", "log_abs_u[1]"}, {}};
    for (const auto& w : res.wave) t.rows.push_back({w.t, w.value, w.derivative, w.log_abs});
    write_csv(*sink.os, t);
    return ok;
  }
  ordered_json j = point_json(sol);
  j["cutoff"] = {opts.N, opts.M};
  j["aux_pair"] = {number(opts.c_minus), number(opts.s_minus)};
  j["C_plus"] = number(res.coeffs.c_plus);
  j["S_plus"] = number(res.coeffs.s_plus);
  j["delta_l"] = number(res.phase.delta);
  j["branch"] = res.phase.branch;
  j["delta_unwrapped"] = number(res.phase.unwrapped());
  j["P_eps"] = number(res.diagnostics.P_eps);
  j["P_tau"] = number(res.diagnostics.P_tau);
  j["t_far"] = number(res.t_far);
  j["term_norms"] = {{"eps", numbers(res.diagnostics.eps_term_norms)}, {"tau", numbers(res.diagnostics.tau_term_norms)}};
  j["residuals"] = {{"value_mismatch", number(res.diagnostics.value_mismatch)},
                    {"slope_mismatch", number(res.diagnostics.slope_mismatch)},
                    {"richardson_phase_change", number(res.diagnostics.richardson_phase_change)},
                    {"matching_identity", number(check_matching_identity(sol).measured)},
                    {"master_residual", number(check_master_residual(sol).measured)}};
  write_json(*sink.os, j);
  return ok;
}

struct SweepRow {
  std::string cls;
  double R = NAN, s = NAN, g2 = NAN, P_eps = NAN, P_tau = NAN, delta = NAN, deviation = NAN;
  double p_exact = NAN, p_asym = NAN, log_p_exact = NAN, log_p_asym = NAN;
  std::string error;
};

SweepRow sweep_row(const RunConfig& cfg, const std::string& tag, double R) {
  SweepRow row;
  row.cls = tag;
  row.R = R;
  auto note = [&](const char* stage, const std::exception& e) {
    if (row.error.empty()) row.error = std::string(stage) + ": " + e.what();
    logger()->warn("sweep {} R={}: {}: {}", tag, R, stage, e.what());
  };
  MatchingSolution sol;
  try {
    sol = match_at_radius(make_class(tag, cfg.params), cfg.k, cfg.l, R);
    row.s = sol.s;
    row.g2 = sol.g2;
  } catch (const std::exception& e) {
    note("matching", e);
    return row;
  }
  try {
    const auto cmp = compare_discriminant(sol, cfg.t_probe);
    row.p_exact = cmp.exact.sign * std::exp(cmp.exact.log_abs);
    row.log_p_exact = cmp.exact.log_abs;
    row.p_asym = cmp.asymptotic.sign * std::exp(cmp.asymptotic.log_abs);
    row.log_p_asym = cmp.asymptotic.log_abs;
  } catch (const std::exception& e) {
    note("discriminant", e);
  }
  try {
    const SeriesOptions opts = series_options(cfg);
    const ScatteringResult res = solve_series(sol, opts);
    row.P_eps = res.diagnostics.P_eps;
    row.P_tau = res.diagnostics.P_tau;
    row.delta = res.phase.delta;
    row.deviation = leading_deviation(res, opts).deviation;
  } catch (const std::exception& e) {
    note("series", e);
  }
  logger()->info("sweep {} R={} done", tag, R);
  return row;
}

const std::vector<std::string> kSweepHeader = {
    "class", "R[length]", "s[1]", "g2[1/length^2]", "P_eps[1]", "P_tau[1]", "delta_l[rad]",
    "leading_vs_full_deviation[1]", "t_probe[1]", "p_eps_exact@t[1]", "p_eps_asym@t[1]",
    "log_abs_p_eps_exact@t[1]", "log_abs_p_eps_asym@t[1]", "error"};

int cmd_sweep(const RunConfig& cfg, std::ostream& fallback) {
  struct Job {
    std::string cls;
    double R;
  };
  std::vector<Job> jobs;
  for (const auto& c : cfg.classes) {
    for (double R : cfg.sweep) jobs.push_back({c, R});
  }
  std::vector<std::optional<SweepRow>> done(jobs.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      SweepRow row = sweep_row(cfg, jobs[i].cls, jobs[i].R);
      {
        std::lock_guard lock(mu);
        done[i] = std::move(row);
      }
      cv.notify_all();
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::min<unsigned>(cfg.workers, static_cast<unsigned>(jobs.size()));
  for (unsigned w = 0; w < n; ++w) pool.emplace_back(worker);

  // single collector: rows are emitted in job order as soon as each is ready
  Sink sink(cfg, fallback);
  const bool json = cfg.format == "json";
  Table header{kSweepHeader, {}};
  if (!json) write_csv(*sink.os, header);
  ordered_json arr = ordered_json::array();
  bool any_error = false;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return done[i].has_value(); });
    const SweepRow r = *done[i];
    lock.unlock();
    any_error |= !r.error.empty();
    if (json) {
      arr.push_back({{"class", r.cls}, {"R", number(r.R)}, {"s", number(r.s)}, {"g2", number(r.g2)},
                     {"P_eps", number(r.P_eps)}, {"P_tau", number(r.P_tau)}, {"delta_l", number(r.delta)},
                     {"leading_vs_full_deviation", number(r.deviation)}, {"t_probe", number(cfg.t_probe)},
                     {"p_eps_exact@t", number(r.p_exact)}, {"p_eps_asym@t", number(r.p_asym)},
                     {"log_abs_p_eps_exact@t", number(r.log_p_exact)},
                     {"log_abs_p_eps_asym@t", number(r.log_p_asym)}, {"error", r.error}});
    } else {
      Table t{{}, {{r.cls, r.R, r.s, r.g2, r.P_eps, r.P_tau, r.delta, r.deviation, cfg.t_probe, r.p_exact, r.p_asym,
                    r.log_p_exact, r.log_p_asym, r.error}}};
      std::ostringstream line;
      write_csv(line, t);
      *sink.os << line.str().substr(1);  // drop the empty header line
      sink.os->flush();
    }
  }
  for (auto& t : pool) t.join();
  if (json) write_json(*sink.os, arr);
  if (any_error) logger()->warn("sweep finished with per-row errors");
  return ok;
}

int cmd_verify(const RunConfig& cfg, std::ostream& fallback) {
  RunConfig c = cfg;
  if (!c.R && !c.g2 && !c.s) c.R = 5.0;
  ordered_json report;
  report["cutoff"] = {c.N, c.M};
  report["aux_pair"] = {number(c.c_minus), number(c.s_minus)};
  if (!c.inject_fault.empty()) report["fault"] = c.inject_fault;
  ordered_json runs = ordered_json::array();
  Table table{{"class", "check", "measured[1]", "tolerance[1]", "pass", "what"}, {}};
  bool all = true;
  for (const auto& tag : c.classes) {
    const MatchingSolution sol = matched_point(c, tag);
    const SeriesOptions opts = series_options(c);
    std::vector<Check> checks;
    auto guarded = [&](const char* name, auto&& fn) {
      try {
        checks.push_back(fn());
      } catch (const std::exception& e) {
        checks.push_back({name, std::string("threw: ") + e.what(), NAN, 0.0, false});
      }
    };
    guarded("triad_identities", [&] { return check_triad(sol.triad); });
    guarded("matching_point_identity", [&] { return check_matching_identity(sol); });
    guarded("master_residual", [&] { return check_master_residual(sol); });
    guarded("stage_radius_round_trip", [&] { return check_round_trip(sol); });
    guarded("k2_derivatives", [&] { return check_derivatives(sol); });
    guarded("wronskian_eps", [&] { return check_wronskian_eps(sol); });
    guarded("wronskian_eps_constancy", [&] { return check_wronskian_eps_constancy(sol); });
    std::optional<ScatteringResult> res;
    try {
      res = solve_series(sol, opts);
    } catch (const std::exception& e) {
      checks.push_back({"series_solve", std::string("threw: ") + e.what(), NAN, 0.0, false});
    }
    if (res) {
      guarded("wronskian_tau", [&] { return check_wronskian_tau(sol, res->coeffs); });
      guarded("seam_continuity", [&] { return check_seam_continuity(*res); });
      guarded("oracle_agreement", [&] { return check_oracle_agreement(*res, c.oracle); });
    }
    const bool default_pair = c.c_minus == 0.0 && c.s_minus == 1.0;
    guarded("aux_pair_invariance", [&] {
      return check_aux_invariance(sol, opts, default_pair ? 1.0 : c.c_minus, default_pair ? 1.0 : c.s_minus);
    });
    guarded("free_phase_zero", [&] { return check_free_phase(sol.k, sol.triad.l, sol.R, opts); });

    ordered_json run = point_json(sol);
    ordered_json arr = ordered_json::array();
    for (const auto& ch : checks) {
      all &= ch.pass;
      arr.push_back({{"name", ch.name}, {"measured", number(ch.measured)}, {"tolerance", number(ch.tolerance)},
                     {"pass", ch.pass}, {"what", ch.what}});
      table.rows.push_back({tag, ch.name, ch.measured, ch.tolerance, std::string(ch.pass ? "PASS" : "FAIL"), ch.what});
      logger()->info("verify {} {}: {} ({} vs {})", tag, ch.name, ch.pass ? "PASS" : "FAIL", ch.measured,
                     ch.tolerance);
    }
    run["checks"] = arr;
    runs.push_back(run);
  }
  report["runs"] = runs;
  report["passed"] = all;
  Sink sink(c, fallback);
  if (c.format == "csv") write_csv(*sink.os, table);
  else write_json(*sink.os, report);
  return all ? ok : verification_failure;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& fallback) {
  const MatchingSolution sol = matched_point(cfg, cfg.classes.front());
  const OracleSolution run = integrate_regular(sol, cfg.oracle);
  const PhaseShift ph = phase_shift_oracle(sol, run);
  Sink sink(cfg, fallback);
  if (cfg.format == "csv") {
    Table t{{"r[length]", "u[1]", "du_dr[1/length]", "log_abs_u[1]"}, {}};
    for (const auto& s : run.samples) t.rows.push_back({s.r, s.u, s.du, s.log_abs_u});
    write_csv(*sink.os, t);
    return ok;
  }
  ordered_json j = point_json(sol);
  j["mode"] = to_string(cfg.oracle.mode);
  j["delta_l"] = number(ph.delta);
  j["branch"] = ph.branch;
  j["delta_unwrapped"] = number(ph.unwrapped());
  j["r_start"] = number(run.r_start);
  j["r_switch"] = number(run.r_switch);
  j["r_max"] = number(run.r_max);
  j["riccati_steps"] = run.riccati_steps;
  j["recursion_steps"] = run.recursion_steps;
  j["rtol"] = number(cfg.oracle.rtol);
  write_json(*sink.os, j);
  return ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out) {
  try {
    RunConfig cfg = parse_config(argc, argv);
    if (cfg.verb == "solve") return cmd_solve(cfg, out);
    if (cfg.verb == "sweep") return cmd_sweep(cfg, out);
    if (cfg.verb == "verify") return cmd_verify(cfg, out);
    return cmd_oracle(cfg, out);
  } catch (const HelpRequested& h) {
    out << h.text;
    return ok;
  } catch (const Error& e) {
    const int code = exit_code_for(to_string(e.kind()));
    logger()->error("{}", e.what());
    write_json(out, error_object(to_string(e.kind()), e.what(), e.details(), code));
    return code;
  } catch (const std::exception& e) {
    logger()->error("{}", e.what());
    write_json(out, error_object("internal", e.what(), {}, numerical_failure));
    return numerical_failure;
  }
}

}  // namespace scatter

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "report.hpp"
#include "singscat/phase.hpp"

using scatter::ordered_json;

namespace {

struct Outcome {
  int code;
  std::string out;
};

Outcome scatter_run(std::vector<std::string> args) {
  args.insert(args.begin(), "scatter");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream os;
  const int code = scatter::run(static_cast<int>(argv.size()), argv.data(), os);
  return {code, os.str()};
}

std::string rewrite_json(const std::string& text) {
  std::ostringstream os;
  scatter::write_json(os, ordered_json::parse(text));
  return os.str();
}

std::string rewrite_csv(const std::string& text) {
  std::istringstream is(text);
  std::ostringstream os;
  scatter::write_csv(os, scatter::read_csv(is));
  return os.str();
}

double cell(const scatter::Table& t, std::size_t row, const std::string& col) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == col) return std::get<double>(t.rows[row][i]);
  }
  FAIL("no column " << col);
  return NAN;
}

}  // namespace

TEST_CASE("solve agrees with the oracle command") {
  const auto s = scatter_run({"solve", "--class", "EEE", "--R", "5"});
  REQUIRE(s.code == 0);
  const auto o = scatter_run({"oracle", "--class", "EEE", "--R", "5"});
  REQUIRE(o.code == 0);
  const auto js = ordered_json::parse(s.out), jo = ordered_json::parse(o.out);
  for (const char* key : {"class", "k", "l", "R", "s", "g2", "C_plus", "S_plus", "delta_l", "P_eps", "P_tau",
                          "term_norms", "residuals"}) {
    CHECK(js.contains(key));
  }
  const double d = js["delta_l"].get<double>() - jo["delta_l"].get<double>();
  CHECK(std::abs(singscat::fold_half_pi(d)) < 1e-2);
  CHECK(rewrite_json(s.out) == s.out);
  CHECK(rewrite_json(o.out) == o.out);
}

TEST_CASE("configuration errors exit with 2 and an error object") {
  const auto both = scatter_run({"solve", "--R", "5", "--g2", "0.1", "--s", "3"});
  CHECK(both.code == 2);
  const auto e = ordered_json::parse(both.out);
  CHECK(e["error"]["kind"] == "config");
  CHECK(e["exit_code"] == 2);

  const auto sigma = scatter_run({"solve", "--class", "EEP", "--sigma2", "3", "--R", "5"});
  CHECK(sigma.code == 2);
  const auto es = ordered_json::parse(sigma.out);
  CHECK(es["error"]["kind"] == "precondition");
  CHECK(es["error"]["message"].get<std::string>().find("sigma2 > 8") != std::string::npos);
  CHECK(es["error"]["details"]["bound"] == 8.0);

  CHECK(scatter_run({"sweep", "--class", "EEE"}).code == 2);                       // no radii
  CHECK(scatter_run({"sweep", "--sweep", "5,5,10"}).code == 2);                    // not increasing
  CHECK(scatter_run({"solve"}).code == 2);                                          // no point
  CHECK(scatter_run({"solve", "--R", "5", "--class", "XYZ"}).code == 2);
  CHECK(scatter_run({"solve", "--R", "5", "--bogus"}).code == 2);
  CHECK(scatter_run({"solve", "--R", "1", "--l", "2"}).code == 2);                  // no matching stage
  CHECK(scatter_run({"--help"}).code == 0);
}

TEST_CASE("numerical failures exit with 3") {
  const auto r = scatter_run({"oracle", "--R", "5", "--r-max", "6"});
  CHECK(r.code == 3);
  CHECK(ordered_json::parse(r.out)["error"]["kind"] == "not_asymptotic");
}

TEST_CASE("(g2, s) input") {
  const auto byR = ordered_json::parse(scatter_run({"solve", "--R", "5", "--cutoff", "2,2"}).out);
  const double g2 = byR["g2"].get<double>(), s = byR["s"].get<double>();
  char gbuf[32], sbuf[32];
  std::snprintf(gbuf, sizeof gbuf, "%.17g", g2);
  std::snprintf(sbuf, sizeof sbuf, "%.17g", s);
  const auto both = scatter_run({"solve", "--g2", gbuf, "--s", sbuf, "--cutoff", "2,2"});
  REQUIRE(both.code == 0);
  CHECK(ordered_json::parse(both.out)["R"].get<double>() == doctest::Approx(5.0).epsilon(1e-10));
  const auto only_s = scatter_run({"solve", "--s", sbuf, "--cutoff", "2,2"});
  REQUIRE(only_s.code == 0);
  CHECK(ordered_json::parse(only_s.out)["R"].get<double>() == doctest::Approx(5.0).epsilon(1e-9));
  const auto off = scatter_run({"solve", "--g2", gbuf, "--s", "10", "--cutoff", "2,2"});
  CHECK(off.code == 2);
}

TEST_CASE("sweep over all classes keeps R order and g2 decreases") {
  const auto r = scatter_run({"sweep", "--class", "all", "--sweep", "10,100", "--cutoff", "0,0", "--workers", "3"});
  REQUIRE(r.code == 0);
  std::istringstream is(r.out);
  const auto t = scatter::read_csv(is);
  REQUIRE(t.rows.size() == 16);
  for (std::size_t i = 0; i < 16; i += 2) {
    CHECK(std::get<std::string>(t.rows[i][0]) == std::get<std::string>(t.rows[i + 1][0]));
    CHECK(cell(t, i, "R[length]") == 10.0);
    CHECK(cell(t, i + 1, "R[length]") == 100.0);
    CHECK(cell(t, i + 1, "g2[1/length^2]") < cell(t, i, "g2[1/length^2]"));
    CHECK(cell(t, i + 1, "s[1]") > cell(t, i, "s[1]"));
  }
  CHECK(rewrite_csv(r.out) == r.out);
}

TEST_CASE("EEE leading-term deviation falls along the sweep at cutoff (2,2)") {
  const auto r = scatter_run({"sweep", "--class", "EEE", "--sweep", "5,10,20,40", "--cutoff", "2,2"});
  REQUIRE(r.code == 0);
  std::istringstream is(r.out);
  const auto t = scatter::read_csv(is);
  REQUIRE(t.rows.size() == 4);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(cell(t, i, "leading_vs_full_deviation[1]") < cell(t, i - 1, "leading_vs_full_deviation[1]"));
  }
  const auto j = scatter_run({"sweep", "--class", "EEE", "--sweep", "5,10", "--cutoff", "2,2", "--format", "json"});
  REQUIRE(j.code == 0);
  CHECK(ordered_json::parse(j.out).size() == 2);
  CHECK(rewrite_json(j.out) == j.out);
}

TEST_CASE("geometric sweep range") {
  const auto r = scatter_run({"sweep", "--sweep-range", "5,20,3", "--cutoff", "0,0"});
  REQUIRE(r.code == 0);
  std::istringstream is(r.out);
  const auto t = scatter::read_csv(is);
  REQUIRE(t.rows.size() == 3);
  CHECK(cell(t, 1, "R[length]") == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("verify passes by default and catches a corrupted triad") {
  const auto ok = scatter_run({"verify"});
  CHECK(ok.code == 0);
  CHECK(ordered_json::parse(ok.out)["passed"] == true);
  CHECK(rewrite_json(ok.out) == ok.out);

  const auto bad = scatter_run({"verify", "--inject-fault", "triad"});
  CHECK(bad.code == 4);
  const auto j = ordered_json::parse(bad.out);
  bool seen = false;
  for (const auto& c : j["runs"][0]["checks"]) {
    if (c["name"] == "matching_point_identity") {
      seen = true;
      CHECK(c["pass"] == false);
      CHECK(c["measured"].get<double>() > 1e-3);
    }
  }
  CHECK(seen);

  const auto aux = scatter_run({"verify", "--aux-pair", "1,1", "--format", "csv"});
  CHECK(aux.code == 0);
  CHECK(aux.out.find("aux_pair_invariance") != std::string::npos);
  CHECK(rewrite_csv(aux.out) == aux.out);
}

TEST_CASE("oracle samples and config files") {
  const auto r = scatter_run({"oracle", "--R", "3", "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("r[length],u[1],du_dr[1/length],log_abs_u[1]\n", 0) == 0);
  CHECK(rewrite_csv(r.out) == r.out);

  const std::string path = "test_cli_config.ini";
  {
    std::ofstream f(path);
    f << "class=PPP\nR=3\ncutoff=2,2\nsigma2=5\n";
  }
  const auto c = scatter_run({"solve", "--config", path});
  REQUIRE(c.code == 0);
  const auto j = ordered_json::parse(c.out);
  CHECK(j["class"] == "PPP");
  CHECK(j["R"] == 3.0);
  CHECK(j["cutoff"][0] == 2);
  CHECK(j["params"]["sigma2"] == 5.0);
  const auto over = scatter_run({"solve", "--config", path, "--R", "4"});
  CHECK(ordered_json::parse(over.out)["R"] == 4.0);
  std::remove(path.c_str());
}

TEST_CASE("CSV cells round-trip") {
  scatter::Table t{{"a[1]", "b"}, {{1e-300, std::string("x, \"y\"")}, {NAN, std::string("")}, {-0.1, std::string("5")}}};
  std::ostringstream os;
  scatter::write_csv(os, t);
  CHECK(rewrite_csv(os.str()) == os.str());
  std::istringstream is(os.str());
  const auto back = scatter::read_csv(is);
  CHECK(std::get<double>(back.rows[0][0]) == 1e-300);
  CHECK(std::get<std::string>(back.rows[0][1]) == "x, \"y\"");
  CHECK(std::isnan(std::get<double>(back.rows[1][0])));
}

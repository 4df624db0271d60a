#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "singscat/oracle.hpp"
#include "singscat/potentials.hpp"

namespace scatter {

enum ExitCode : int { ok = 0, config_error = 2, numerical_failure = 3, verification_failure = 4 };

struct RunConfig {
  std::string verb;
  std::vector<std::string> classes{"EEE"};
  singscat::ClassParams params;
  double k = 1.0;
  int l = 0;
  std::optional<double> R;
  std::optional<double> g2;
  std::optional<double> s;
  int N = 16;
  int M = 16;
  int level = 1;
  double c_minus = 0.0;
  double s_minus = 1.0;
  std::vector<double> sweep;  // strictly increasing
  double t_probe = 0.5;
  std::string out;            // empty: stdout
  std::string format;         // empty: verb default
  unsigned workers = 1;
  singscat::OracleConfig oracle;
  std::string inject_fault;   // test hook: "triad"
};

struct HelpRequested {
  std::string text;
};

/// Parses argv (CLI11, with an optional key=value --config file) and checks
/// the cross-field invariants. Throws singscat::Error(config), or
/// HelpRequested for --help.
RunConfig parse_config(int argc, const char* const* argv);

/// Runs the verb and returns the process exit code. Reports go to `out`
/// (or the --out file); errors are written to `out` as a JSON error object.
int run(int argc, const char* const* argv, std::ostream& out);

/// Maps an error kind to the exit code: input and precondition problems are
/// configuration errors, everything else a numerical failure.
int exit_code_for(const std::string& kind);

}  // namespace scatter

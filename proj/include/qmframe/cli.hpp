#pragma once

// Command-line front end: run configuration, the registry of named checks,
// report rendering and the verify / tabulate / list-checks commands.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmframe/check.hpp"
#include "qmframe/hilbert.hpp"

namespace qmframe::cli {

enum class Format { Json, Csv };

struct RunConfig {
  System system = System::Free;
  double mass = 1.0;
  double omega = 1.0;  // ignored for Free
  double hbar = 1.0;
  double q_min = -25.0;
  double q_max = 25.0;
  Index n = 1024;
  std::vector<double> times{0.3, 0.7};
  std::vector<std::string> checks{"all"};
  std::uint64_t seed = 20240611;
  std::string out;  // empty: standard output
  Format format = Format::Json;
  Index op_n = 256;  // balanced grid for operator identities
  Index fd_n = 128;  // balanced grid for the finite-difference K check

  SystemParams params() const;
  Grid grid() const;
};

struct CheckReport {
  std::string check_name;
  std::string module;
  std::string system;
  SystemParams params;
  std::optional<double> t;  // empty for time-independent checks
  CheckResult result;
  double runtime_ms = 0.0;
};

class RunContext;

struct CheckInfo {
  std::string name;
  std::string module;
  std::string anchor;  // the relation the check verifies
  bool time_dependent = true;
  std::function<bool(System)> applies_to;
  std::function<CheckResult(RunContext&, double t)> run;
};

const std::vector<CheckInfo>& registry();
/// Checks of one module ("" for all). An unknown module gives an empty list.
std::vector<const CheckInfo*> list_checks(std::string_view module = "");

/// Resolves names ("all" expands to every check applicable to the system).
/// Throws ConfigParse for unknown names.
std::vector<const CheckInfo*> select_checks(const RunConfig& config);

struct VerifyOutcome {
  std::vector<CheckReport> reports;  // sorted by check name, then t
  int passed = 0;
  int failed = 0;
  int skipped = 0;
  int exit_code() const { return failed > 0 ? 1 : 0; }
};

/// Runs the selected checks for every configured time. Singular times are
/// reported as skipped with a caustic-window note. Diagnostics go to `log`.
VerifyOutcome cmd_verify(const RunConfig& config, std::ostream& log);

/// Deterministic report text (no timings).
std::string render_json(const RunConfig& config, const VerifyOutcome& outcome);
std::string render_csv(const RunConfig& config, const VerifyOutcome& outcome);
/// Timings and wall-clock start, written next to the report.
std::string render_timing(const VerifyOutcome& outcome);

struct TabulateOptions {
  std::string what = "kernel";  // kernel | moving_number | moving_coherent | moving_momentum | action
  std::string representation = "position";  // kernel: position | momentum; action: qQ | qP
  std::string part = "re";                   // moving_number: re | im | abs
  int points = 201;
  double lo = -5.0;
  double hi = 5.0;
  int n_max = 4;
  double z_re = 1.0;
  double z_im = 0.0;
  double p = 1.0;  // momentum for moving_momentum
  double x = 0.0;  // second argument of W for action
};

/// CSV tabulation at t = config.times.front().
std::string cmd_tabulate(const RunConfig& config, const TabulateOptions& options);

/// Parses argv and dispatches. Returns the process exit code:
/// 0 success, 1 check failure, 2 configuration error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qmframe::cli

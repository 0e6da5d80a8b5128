#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "locomo/cli/io.hpp"
#include "locomo/cli/scenario.hpp"

namespace locomo::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvariantFailure = 1,
  kExitValidationError = 2,
  kExitNumericalAbort = 3,
};

/// Non-finite state or another condition the integration cannot recover from.
class NumericalAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { Simulate, Sweep, Optimize, Verify };

const char* to_string(Command c);

/// Runs one property suite against the scenario's model and gait.
SuiteResult run_suite(Suite suite, double tolerance, const Scenario& sc, const BuiltModel& model);

/// Output file names inside the output directory.
inline constexpr const char* kTrajectoryFile = "trajectory.csv";
inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kFieldFile = "field.csv";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kVerifyFile = "verify.csv";

/// Loads the scenario, applies overrides, runs the command and writes its
/// files. Diagnostics go to `err`, the human summary to `out`. Returns an ExitCode.
int run_command(Command command, const std::string& scenario_path, const Overrides& overrides,
                std::ostream& out, std::ostream& err);

/// Full command line: `locomo <command> <scenario> [--out DIR] [--step S] [--cycles N] [--seed K]`.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace locomo::cli

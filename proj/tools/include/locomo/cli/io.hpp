#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "locomo/analysis.hpp"
#include "locomo/integrator.hpp"
#include "locomo/optimizer.hpp"

namespace locomo::cli {

inline constexpr int kSchemaVersion = 1;

/// Raised when an output file cannot be read back.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// %.17g, which round-trips every finite double; "nan", "inf", "-inf" otherwise.
std::string format_double(double v);
double parse_double(const std::string& text);

/// Key-value lines of the leading "# key: value" comment block.
using Metadata = std::map<std::string, std::string>;

/// Splits one CSV line; fields may be double-quoted with "" escapes.
std::vector<std::string> split_csv(const std::string& line);
std::string quote_csv(const std::string& field);

/// Contact-set cell: "-" when the provider does not switch.
std::string format_contacts(const std::optional<ContactSet>& c);
std::optional<ContactSet> parse_contacts(const std::string& text);

// Trajectory table ----------------------------------------------------------

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const Metadata& meta);

struct TrajectoryTable {
  Metadata meta;
  /// Samples plus the run settings stored in the metadata; events and
  /// warnings live in the summary.
  Trajectory traj;
};
TrajectoryTable read_trajectory_csv(std::istream& in);

// Field table ---------------------------------------------------------------

void write_field_csv(std::ostream& out, const FieldGrid& field, const CurvatureField* curvature,
                     const Metadata& meta);

struct FieldTable {
  Metadata meta;
  FieldGrid field;
  std::optional<CurvatureField> curvature;
};
FieldTable read_field_csv(std::istream& in);

// Simulation summary --------------------------------------------------------

struct SimulationSummary {
  Metadata meta;
  NetDisplacement net;
  std::vector<EventRecord> events;
  std::vector<std::string> warnings;
  std::size_t samples = 0;
  double max_twist_norm = 0.0;
};
void write_summary_json(std::ostream& out, const SimulationSummary& summary);
SimulationSummary read_summary_json(std::istream& in);

// Optimization report -------------------------------------------------------

struct ReportFile {
  Metadata meta;
  std::vector<std::string> parameter_names;
  OptimizationReport report;
};
void write_report_json(std::ostream& out, const ReportFile& report);
ReportFile read_report_json(std::istream& in);

// Verification table --------------------------------------------------------

struct SuiteResult {
  std::string suite;
  bool passed = false;
  double metric = 0.0;
  double tolerance = 0.0;
  std::string detail;
};
void write_verify_csv(std::ostream& out, const std::vector<SuiteResult>& results, const Metadata& meta);

struct VerifyTable {
  Metadata meta;
  std::vector<SuiteResult> results;
};
VerifyTable read_verify_csv(std::istream& in);

}  // namespace locomo::cli

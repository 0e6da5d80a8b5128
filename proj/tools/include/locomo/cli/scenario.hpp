#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "locomo/analysis.hpp"
#include "locomo/connection.hpp"
#include "locomo/integrator.hpp"
#include "locomo/models.hpp"
#include "locomo/optimizer.hpp"
#include "locomo/shapespace.hpp"

namespace locomo::cli {

/// Scenario rejected before anything runs. what() carries "file:line:col: field: reason".
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& where, const std::string& field, const std::string& reason);

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ModelSpec {
  enum class Type { Jacobian, Swimmer, Crawler, Slip, ManyLegged, Constant };
  Type type = Type::Jacobian;

  // jacobian
  std::string map = "synthetic";
  std::vector<double> arm_lengths;
  double h = kDefaultJacobianStep;

  // swimmer, many_legged
  double link_length = 1.0;
  double c_t = 1.0;
  double c_n = 2.0;
  int quadrature = 8;
  int feet_per_link = 8;

  // crawler, slip
  double half_width = 0.5;
  double leg_length = 1.0;
  std::vector<double> selector_offsets;
  SlipCoefficients stance{1.0, 2.0, 0.5};
  SlipCoefficients swing{0.2, 0.4, 0.1};
  double slip_scale = 1.0;

  // constant
  ConnectionMatrix constant;
};

const char* to_string(ModelSpec::Type type);

/// A provider together with the pieces of the model some suites inspect.
struct BuiltModel {
  ConnectionProvider provider;
  std::optional<LeggedModel> legs;
  /// Feet are pinned (not slipping) while in stance.
  bool pinned_feet = false;
};

BuiltModel build_model(const ModelSpec& spec);

struct SweepSpec {
  GridSpec grid;
  bool curvature = true;
};

struct OptimizeSpec {
  GaitFamily family;
  DisplacementObjective objective;
  OptimizerSettings settings;
};

enum class Suite { LoopClosure, SinglePiece, Continuity, Reversal, Pacing, Residual, Stance };

const char* to_string(Suite suite);
Suite parse_suite(const std::string& text);
const std::vector<Suite>& all_suites();
double default_tolerance(Suite suite);

struct VerifySpec {
  std::vector<Suite> suites;
  std::vector<double> tolerances;  // parallel to suites
  int samples = 100;
  double shape_range = 1.5;
  std::optional<int> events_per_cycle;
};

struct Scenario {
  std::string source;  // file path, for diagnostics
  std::string text;
  std::string name;
  std::string description;
  std::uint64_t seed = 0;
  ModelSpec model;
  std::optional<Gait> gait;
  IntegratorSettings integrator;
  std::optional<SweepSpec> sweep;
  std::optional<OptimizeSpec> optimize;
  std::optional<VerifySpec> verify;
  std::string output_dir = ".";
  /// FNV-1a of the scenario text and the command-line overrides.
  std::uint64_t hash = 0;
};

struct Overrides {
  std::optional<std::string> out;
  std::optional<double> step;
  std::optional<int> cycles;
  std::optional<std::uint64_t> seed;

  /// Canonical text folded into the scenario hash.
  std::string canonical() const;
};

/// Parses and validates scenario text; `source` names it in diagnostics.
Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>");
Scenario load_scenario(const std::string& path);

/// Applies command-line overrides and refreshes the hash.
void apply_overrides(Scenario& scenario, const Overrides& overrides);

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex_hash(std::uint64_t hash);

}  // namespace locomo::cli

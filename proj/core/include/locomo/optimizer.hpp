#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "locomo/connection.hpp"
#include "locomo/integrator.hpp"
#include "locomo/shapespace.hpp"

namespace locomo {

/// Which component of the per-cycle net displacement to maximize.
struct DisplacementObjective {
  enum class Component { X, Y, Theta, Planar };
  Component component = Component::X;
  /// -1 maximizes the negated component.
  double sign = 1.0;

  /// "x", "-x", "y", "-y", "theta", "-theta" or "planar".
  static DisplacementObjective parse(const std::string& text);
  std::string to_string() const;
};

/// Mean per-cycle displacement component. Singular constraint evaluations
/// return -infinity.
double objective_displacement(const ConnectionProvider& provider, const Gait& gait,
                              const DisplacementObjective& objective,
                              const IntegratorSettings& settings);

/// One free parameter of a Fourier gait family. Amplitude and Phase act on
/// harmonic k of each listed coordinate written as A sin(k u + phase).
struct FamilyParameter {
  enum class Kind { Mean, Cos, Sin, Amplitude, Phase };
  std::string name;
  Kind kind = Kind::Amplitude;
  int harmonic = 1;
  std::vector<int> coordinates;
  double lower = 0.0;
  double upper = 1.0;
};

struct GaitFamily {
  FourierGait base;
  std::vector<FamilyParameter> parameters;

  int size() const { return static_cast<int>(parameters.size()); }
  Eigen::VectorXd lower() const;
  Eigen::VectorXd upper() const;
  void validate() const;
  Gait instantiate(const Eigen::VectorXd& p) const;
};

struct OptimizerSettings {
  int budget = 500;
  int seeds = 4;
  std::uint64_t seed = 0;
  /// Initial simplex edge as a fraction of each parameter's bound width.
  double initial_step = 0.1;
  double ftol = 1e-12;
  double xtol = 1e-9;
  /// Seeds searched concurrently; results do not depend on this.
  int threads = 1;
};

struct EvaluationRecord {
  Eigen::VectorXd params;
  double objective = 0.0;
  int seed = 0;
};

struct OptimizationReport {
  Eigen::VectorXd best_params;
  double best_objective = 0.0;
  int evaluations = 0;
  std::vector<EvaluationRecord> history;
  std::string termination;
};

using ScalarObjective = std::function<double(const Eigen::VectorXd&)>;

/// Bounded Nelder-Mead maximization with seeded restarts. Reflection,
/// expansion, contraction and shrink coefficients are 1, 2, 0.5, 0.5;
/// candidates are projected onto the box before evaluation.
OptimizationReport nelder_mead_maximize(const ScalarObjective& f, const Eigen::VectorXd& lower,
                                        const Eigen::VectorXd& upper,
                                        const OptimizerSettings& settings);

OptimizationReport optimize(const ConnectionProvider& provider, const GaitFamily& family,
                            const DisplacementObjective& objective,
                            const IntegratorSettings& integrator, const OptimizerSettings& settings);

}  // namespace locomo

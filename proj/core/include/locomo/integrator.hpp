#pragma once

#include <optional>
#include <string>
#include <vector>

#include "locomo/connection.hpp"
#include "locomo/liegroup.hpp"
#include "locomo/shapespace.hpp"

namespace locomo {

struct IntegratorSettings {
  double step = 1e-3;
  double event_tol = 1e-10;
  int cycles = 1;
  /// When false only the samples at cycle boundaries are kept.
  bool record_samples = true;
};

/// A located contact switch. The switch lies in [bracket_lo, bracket_hi].
struct EventRecord {
  double time = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  ContactSet before;
  ContactSet after;
  Shape shape;
};

/**
 * Solution of g^-1 gdot = A(r(t)) rdot(t). Sample k holds the state at
 * times[k]; twists[k] and contacts[k] describe the step leaving sample k
 * (for the final sample, the active piece there).
 */
struct Trajectory {
  std::vector<double> times;
  std::vector<Pose> poses;
  std::vector<Shape> shapes;
  std::vector<Twist> twists;
  std::vector<ContactSet> contacts;
  bool has_contacts = false;

  double period = 0.0;
  int cycles = 0;
  double step = 0.0;
  double event_tol = 0.0;
  int scheme_order = 4;
  /// Largest |A rdot| over every stage evaluation of the run.
  double max_twist_norm = 0.0;
  std::vector<EventRecord> events;
  std::vector<std::string> warnings;

  std::size_t size() const { return times.size(); }
};

/// Fourth-order Runge-Kutta-Munthe-Kaas integration over whole gait cycles.
/// Steps never straddle waypoint knots; contact switches are bisected to
/// event_tol and the step is split there with g carried across.
Trajectory integrate_gait(const ConnectionProvider& provider, const Gait& gait,
                          const IntegratorSettings& settings, const Pose& start = Pose::identity());

struct NetDisplacement {
  /// log(g(0)^-1 g(end)).
  Twist total;
  std::vector<Twist> per_cycle;
};

/// Throws std::invalid_argument unless the trajectory spans whole cycles.
NetDisplacement net_displacement(const Trajectory& traj);

/// dexp^-1 truncated after the second commutator, for gdot = g xi.
Twist dexp_inv(const Twist& u, const Twist& xi);

}  // namespace locomo

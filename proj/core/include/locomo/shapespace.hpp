#pragma once

#include <Eigen/Core>

#include <functional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace locomo {

/// Point r in shape space: one joint angle per shape coordinate.
using Shape = Eigen::VectorXd;
/// Shape velocity dr/dt, same dimension as the owning Shape.
using ShapeVelocity = Eigen::VectorXd;

class InvalidGait : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws DimensionMismatch unless actual == expected.
void check_dimension(Eigen::Index actual, Eigen::Index expected, const char* what);

struct GaitSample {
  Shape r;
  ShapeVelocity rdot;
};

/// Which one-sided derivative to report when t sits exactly on a waypoint knot.
enum class KnotSide { Right, Left };

/**
 * Truncated Fourier series per coordinate:
 *   r_j(t) = mean_j + sum_k cos_jk cos(2 pi k t / T) + sin_jk sin(2 pi k t / T)
 * cos_coeffs and sin_coeffs are d x K (column k-1 holds harmonic k).
 */
struct FourierGait {
  double period = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cos_coeffs;
  Eigen::MatrixXd sin_coeffs;
};

/**
 * Closed piecewise-linear loop. points[i] is reached at times[i]; the loop
 * returns to points[0] at t = period. times[0] == 0 and period > times.back().
 */
struct WaypointGait {
  double period = 1.0;
  std::vector<Shape> points;
  std::vector<double> times;
};

/// Periodic shape trajectory r(t). Closed by construction: r(0) == r(T).
class Gait {
 public:
  explicit Gait(FourierGait fourier);
  explicit Gait(WaypointGait waypoints);

  /// Uniformly timed waypoint loop. A trailing copy of the first point is
  /// accepted as an explicit closure and dropped.
  static Gait waypoints(std::vector<Shape> points, double period);
  static Gait waypoints(std::vector<Shape> points, std::vector<double> times, double period);
  /// One-harmonic gait r_j = offset_j + amplitude_j sin(2 pi t / T + phase_j).
  static Gait sinusoid(const Eigen::VectorXd& offset, const Eigen::VectorXd& amplitude,
                       const Eigen::VectorXd& phase, double period);

  double period() const;
  Eigen::Index dim() const;
  bool is_fourier() const { return std::holds_alternative<FourierGait>(rep_); }
  const FourierGait* fourier() const { return std::get_if<FourierGait>(&rep_); }
  const WaypointGait* waypoint() const { return std::get_if<WaypointGait>(&rep_); }

  /// Times in [0, T) where the derivative may jump (waypoint knots; empty for Fourier).
  std::vector<double> breakpoints() const;

  GaitSample evaluate(double t, KnotSide side = KnotSide::Right) const;
  Shape shape_at(double t) const { return evaluate(t).r; }

 private:
  std::variant<FourierGait, WaypointGait> rep_;
};

GaitSample gait_eval(const Gait& gait, double t);

/// Strictly increasing time map from [0, T] onto [0, T'], with warp(0) == 0.
using TimeWarp = std::function<double(double)>;

/// Gait tracing the same shape-space path with knots retimed by warp.
/// Fourier gaits are first resampled into a `resolution`-point waypoint loop.
Gait reparameterize(const Gait& gait, const TimeWarp& warp, int resolution = 1000);

/// Waypoint loop that traverses the gait's path and then retraces it back to
/// the start, over twice the period.
Gait retrace(const Gait& gait, int resolution = 1000);

/// The path of a gait as a uniform waypoint loop (waypoint gaits are returned as-is).
Gait to_waypoints(const Gait& gait, int resolution = 1000);

}  // namespace locomo

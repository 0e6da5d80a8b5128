#pragma once

#include <Eigen/Core>

namespace locomo {

/// Wraps an angle to (-pi, pi].
double normalize_angle(double angle);

/// Element of the Lie algebra se(2): a body velocity (vx, vy, omega).
struct Twist {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;

  static Twist from_vector(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
  Eigen::Vector3d vector() const { return {vx, vy, omega}; }
  double norm() const { return vector().norm(); }

  Twist& operator+=(const Twist& o) {
    vx += o.vx;
    vy += o.vy;
    omega += o.omega;
    return *this;
  }
  Twist& operator*=(double s) {
    vx *= s;
    vy *= s;
    omega *= s;
    return *this;
  }
  friend Twist operator+(Twist a, const Twist& b) { return a += b; }
  friend Twist operator-(const Twist& a, const Twist& b) {
    return {a.vx - b.vx, a.vy - b.vy, a.omega - b.omega};
  }
  friend Twist operator*(double s, Twist a) { return a *= s; }
  friend Twist operator*(Twist a, double s) { return a *= s; }
  friend bool operator==(const Twist&, const Twist&) = default;
};

/**
 * @brief Element of SE(2): planar position plus heading.
 *
 * Homogeneous form
 * ----------------
 * [ cos(theta) -sin(theta) x ]
 * [ sin(theta)  cos(theta) y ]
 * [ 0           0          1 ]
 *
 * theta is kept in (-pi, pi]. Construct through make() to normalize.
 */
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  static Pose identity() { return {}; }
  static Pose make(double x, double y, double theta) { return {x, y, normalize_angle(theta)}; }
  static Pose translation(double x, double y) { return {x, y, 0.0}; }
  static Pose rotation(double theta) { return make(0.0, 0.0, theta); }
  static Pose from_matrix(const Eigen::Matrix3d& m);

  Eigen::Matrix3d matrix() const;
  Eigen::Vector2d position() const { return {x, y}; }
  /// Applies the pose to a point expressed in its own frame.
  Eigen::Vector2d transform(const Eigen::Vector2d& p) const;

  friend bool operator==(const Pose&, const Pose&) = default;
};

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& g);

/// Flow for time dt of the constant body velocity xi, starting at identity.
Pose exp(const Twist& xi, double dt = 1.0);
/// Principal-branch logarithm; exp(log(g)) == g.
Twist log(const Pose& g);

/// Ad_g xi, so that compose(g, exp(xi)) == compose(exp(adjoint(g, xi)), g).
Twist adjoint(const Pose& g, const Twist& xi);
/// Matrix commutator [hat(a), hat(b)] expressed as a twist.
Twist bracket(const Twist& a, const Twist& b);

Eigen::Matrix3d hat(const Twist& xi);
Twist vee(const Eigen::Matrix3d& m);

/// Below this |omega * dt| the translation coupling uses its series expansion.
inline constexpr double kSmallAngle = 1e-6;

}  // namespace locomo

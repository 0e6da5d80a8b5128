#include "locomo/liegroup.hpp"

#include <cmath>
#include <numbers>

namespace locomo {

namespace {

// Entries of the SE(2) translation coupling matrix V(w) = [[a, -b], [b, a]],
// a = sin(w)/w, b = (1 - cos(w))/w.
struct Coupling {
  double a;
  double b;
};

Coupling coupling(double w) {
  if (std::abs(w) < kSmallAngle) {
    const double w2 = w * w;
    return {1.0 - w2 / 6.0, 0.5 * w * (1.0 - w2 / 12.0)};
  }
  // 1 - cos(w) written as 2 sin^2(w/2) to avoid cancellation for small w.
  const double h = std::sin(0.5 * w);
  return {std::sin(w) / w, 2.0 * h * h / w};
}

}  // namespace

double normalize_angle(double angle) {
  double a = std::remainder(angle, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

Pose Pose::from_matrix(const Eigen::Matrix3d& m) {
  return make(m(0, 2), m(1, 2), std::atan2(m(1, 0), m(0, 0)));
}

Eigen::Matrix3d Pose::matrix() const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix3d m;
  // clang-format off
  m << c, -s, x,
       s,  c, y,
       0,  0, 1;
  // clang-format on
  return m;
}

Eigen::Vector2d Pose::transform(const Eigen::Vector2d& p) const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {x + c * p.x() - s * p.y(), y + s * p.x() + c * p.y()};
}

Pose compose(const Pose& a, const Pose& b) {
  const Eigen::Vector2d p = a.transform(b.position());
  return Pose::make(p.x(), p.y(), a.theta + b.theta);
}

Pose inverse(const Pose& g) {
  const double c = std::cos(g.theta);
  const double s = std::sin(g.theta);
  return Pose::make(-c * g.x - s * g.y, s * g.x - c * g.y, -g.theta);
}

Pose exp(const Twist& xi, double dt) {
  const double w = xi.omega * dt;
  const double u = xi.vx * dt;
  const double v = xi.vy * dt;
  const auto [a, b] = coupling(w);
  return Pose::make(a * u - b * v, b * u + a * v, w);
}

Twist log(const Pose& g) {
  const double w = g.theta;
  const auto [a, b] = coupling(w);
  const double det = a * a + b * b;
  return {(a * g.x + b * g.y) / det, (-b * g.x + a * g.y) / det, w};
}

Twist adjoint(const Pose& g, const Twist& xi) {
  const double c = std::cos(g.theta);
  const double s = std::sin(g.theta);
  return {c * xi.vx - s * xi.vy + xi.omega * g.y,
          s * xi.vx + c * xi.vy - xi.omega * g.x, xi.omega};
}

Twist bracket(const Twist& a, const Twist& b) {
  return {b.omega * a.vy - a.omega * b.vy, a.omega * b.vx - b.omega * a.vx, 0.0};
}

Eigen::Matrix3d hat(const Twist& xi) {
  Eigen::Matrix3d m;
  // clang-format off
  m << 0,        -xi.omega, xi.vx,
       xi.omega,  0,        xi.vy,
       0,         0,        0;
  // clang-format on
  return m;
}

Twist vee(const Eigen::Matrix3d& m) { return {m(0, 2), m(1, 2), 0.5 * (m(1, 0) - m(0, 1))}; }

}  // namespace locomo

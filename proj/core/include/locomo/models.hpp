#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

#include "locomo/connection.hpp"
#include "locomo/liegroup.hpp"
#include "locomo/shapespace.hpp"

namespace locomo {

class InvalidModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateStance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Planar link chains
// ---------------------------------------------------------------------------

/**
 * Serial chain of n = d + 1 links. Joint j (0-based) connects link j to link
 * j + 1 and r_j is the heading of link j + 1 relative to link j. The body
 * frame sits at the midpoint of the middle link, x along that link, so n
 * must be odd.
 */
struct ChainModel {
  std::vector<double> lengths;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(lengths.size()) - 1; }
  std::size_t middle() const { return lengths.size() / 2; }
  void validate() const;
};

/// Link frames (midpoint, x along the link) in the body frame.
std::vector<Pose> chain_frames(const ChainModel& chain, const Shape& r);

/// Joint positions in the body frame; entry j is joint j.
std::vector<Eigen::Vector2d> chain_joints(const ChainModel& chain, const Shape& r);

/// Body-frame velocity Jacobian of the point at arclength s (from the link
/// midpoint) on link k, plus the heading Jacobian of link k. Both 1 row per
/// planar component, one column per joint.
struct LinkPointJacobian {
  Eigen::Vector2d position;
  double heading = 0.0;
  Eigen::Matrix<double, 2, Eigen::Dynamic> dposition;
  Eigen::RowVectorXd dheading;
};
LinkPointJacobian link_point_jacobian(const ChainModel& chain, const std::vector<Pose>& frames,
                                      const std::vector<Eigen::Vector2d>& joints,
                                      std::size_t link, double s);

// ---------------------------------------------------------------------------
// Resistive-force swimmer
// ---------------------------------------------------------------------------

/// Slender links in a viscous medium with anisotropic drag per unit length.
struct DragModel {
  ChainModel chain;
  double c_t = 1.0;
  double c_n = 2.0;
  int quadrature = 8;

  void validate() const;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature gauss_legendre(int points);

/// Zero net drag force and moment about the body origin as M xi + N rdot = 0.
ConstraintSystem build_drag_constraints(const DragModel& model, const Shape& r);

/// Equal-length three-link swimmer.
DragModel purcell_swimmer(double link_length = 1.0, double c_t = 1.0, double c_n = 2.0,
                          int quadrature = 8);

// ---------------------------------------------------------------------------
// Legged models
// ---------------------------------------------------------------------------

/// A leg pivots at `hip` (body frame); foot pose = hip * Rot(direction * r_i) * Trans(length, 0).
struct Leg {
  Pose hip;
  double length = 1.0;
  double direction = 1.0;
};

/**
 * Rigid body with one leg per shape coordinate. The stance foot is the one
 * with the largest r_i - selector_offsets[i]; ties go to the lower index.
 * A single stance foot is planted flat (bears a yaw moment).
 */
struct LeggedModel {
  std::vector<Leg> legs;
  std::vector<double> selector_offsets;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(legs.size()); }
  void validate() const;
};

/// Foot pose in the body frame for leg i.
Pose foot_pose(const LeggedModel& model, std::size_t leg, const Shape& r);

/// F[c]: pose of the body relative to the stance frame implied by the feet in c.
/// One foot: the inverse foot pose. Two feet: pin frame at the lower-index
/// foot with x toward the other. DegenerateStance on coincident pins.
PoseMap build_contact_map(const LeggedModel& model, const ContactSet& c);

ContactSet select_contacts(const LeggedModel& model, const Shape& r);

/// Two legs on opposite sides of a body of width 2 * half_width, mirrored so
/// that positive angles swing either foot forward.
LeggedModel crawler(double half_width = 0.5, double leg_length = 1.0);

ConnectionProvider legged_provider(const LeggedModel& model, double h = kDefaultJacobianStep);

// ---------------------------------------------------------------------------
// Slipping feet
// ---------------------------------------------------------------------------

/// Viscous foot contact: force -k_t (tangential), -k_n (normal) times foot
/// velocity, and yaw moment -k_omega times foot angular velocity.
struct SlipCoefficients {
  double k_t = 1.0;
  double k_n = 1.0;
  double k_omega = 1.0;

  SlipCoefficients scaled(double s) const { return {s * k_t, s * k_n, s * k_omega}; }
};

/// Legged geometry whose feet all slip. Feet in the active contact set use
/// `stance` coefficients, the others drag with `swing` coefficients.
struct SlipModel {
  LeggedModel legs;
  std::vector<SlipCoefficients> stance;
  std::vector<SlipCoefficients> swing;

  void validate() const;
};

ConstraintSystem build_slip_constraints(const SlipModel& model, const ContactSet& c,
                                        const Shape& r);

SlipModel slip_crawler(const LeggedModel& geometry, SlipCoefficients stance,
                       SlipCoefficients swing);

ConnectionProvider slip_provider(const SlipModel& model);

/// Point contacts along the links of a drag chain: m evenly spaced
/// (midpoint-rule) feet per link with k_t = c_t L / m, k_n = c_n L / m and no
/// yaw resistance.
struct ManyLeggedModel {
  DragModel drag;
  int feet_per_link = 2;

  void validate() const;
};

ConstraintSystem many_legged_drag_surrogate(const ManyLeggedModel& model, const Shape& r);

ConnectionProvider drag_provider(const DragModel& model);
ConnectionProvider many_legged_provider(const ManyLeggedModel& model);

// ---------------------------------------------------------------------------
// Holonomic testbeds
// ---------------------------------------------------------------------------

/// Planar arm: F(r) = Rot(r1) Trans(l1) Rot(r2) Trans(l2) ... (tip frame).
PoseMap arm_map(std::vector<double> lengths);

/// Tip link frame of a chain, seen from the first link's frame.
PoseMap chain_tip_map(const ChainModel& chain);

/// Smooth nonlinear 2-dof map with no kinematic interpretation.
PoseMap synthetic_map();

/// Looks up "arm2", "arm3" or "synthetic".
PoseMap testbed_map(const std::string& name);

}  // namespace locomo

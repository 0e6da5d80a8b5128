#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "locomo/liegroup.hpp"
#include "locomo/shapespace.hpp"

namespace locomo {

/// Local connection A(r): 3 x d, rows (vx, vy, omega), one column per shape coordinate.
using ConnectionMatrix = Eigen::Matrix<double, 3, Eigen::Dynamic>;

/// Twist-valued column i of A.
inline Twist column(const ConnectionMatrix& a, Eigen::Index i) {
  return Twist::from_vector(a.col(i));
}

/// g^-1 gdot = A rdot.
Twist apply(const ConnectionMatrix& a, const ShapeVelocity& rdot);

/// Raised when M of a constraint system cannot be solved reliably.
class SingularConstraint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Set of feet in contact with the ground, as a bit mask over 0-based foot indices.
class ContactSet {
 public:
  ContactSet() = default;
  static ContactSet single(int foot) { return ContactSet(std::uint32_t{1} << foot); }
  static ContactSet from_mask(std::uint32_t mask) { return ContactSet(mask); }

  bool contains(int foot) const { return (mask_ >> foot) & 1U; }
  bool empty() const { return mask_ == 0; }
  int size() const;
  std::uint32_t mask() const { return mask_; }
  ContactSet with(int foot) const { return ContactSet(mask_ | (std::uint32_t{1} << foot)); }

  /// 1-based feet joined with '+', e.g. "1+3"; "none" when empty.
  std::string to_string() const;
  /// Inverse of to_string.
  static ContactSet parse(const std::string& text);

  friend bool operator==(const ContactSet&, const ContactSet&) = default;

 private:
  explicit ContactSet(std::uint32_t mask) : mask_(mask) {}
  std::uint32_t mask_ = 0;
};

/// Holonomic map F: Q -> SE(2).
struct PoseMap {
  std::function<Pose(const Shape&)> map;
  Eigen::Index dim = 0;

  Pose operator()(const Shape& r) const { return map(r); }
};

/// Linear implicit equation M xi + N rdot = 0.
struct ConstraintSystem {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  ConnectionMatrix n;
};

inline constexpr double kDefaultJacobianStep = 1e-5;
inline constexpr double kMaxConstraintCondition = 1e12;

/// A_F(r) = F(r)^-1 J_F(r) by central differencing through the group logarithm:
/// column i = log(F(r - h e_i)^-1 F(r + h e_i)) / 2h.
ConnectionMatrix jacobian_connection_eval(const PoseMap& f, const Shape& r,
                                          double h = kDefaultJacobianStep);

/// Solves M A = -N with a pivoted direct solve. Throws SingularConstraint when
/// the condition number of M exceeds kMaxConstraintCondition.
ConnectionMatrix linear_constraint_connection(const ConstraintSystem& sys);

/// max |M A + N| over entries.
double constraint_residual(const ConstraintSystem& sys, const ConnectionMatrix& a);

struct ConnectionEval {
  ConnectionMatrix a;
  std::optional<ContactSet> contacts;
};

/**
 * Evaluates r -> A(r) for one of the construction routes: a holonomic pose
 * map, a contact-switching family of pose maps, or a linear constraint
 * builder (optionally contact-switching too).
 *
 * Switching providers expose their selector so integrators can locate
 * contact changes and hold a piece fixed across a step.
 */
class ConnectionProvider {
 public:
  enum class Kind { Jacobian, Piecewise, Constraint };

  using Selector = std::function<ContactSet(const Shape&)>;
  using PieceMap = std::function<PoseMap(const ContactSet&)>;
  using ConstraintBuilder = std::function<ConstraintSystem(const Shape&, const ContactSet&)>;

  static ConnectionProvider jacobian(PoseMap f, double h = kDefaultJacobianStep);
  static ConnectionProvider piecewise(Eigen::Index dim, Selector selector, PieceMap pieces,
                                      double h = kDefaultJacobianStep);
  /// Without a selector the builder always receives an empty ContactSet.
  static ConnectionProvider constraint(Eigen::Index dim, ConstraintBuilder builder,
                                       Selector selector = {});
  /// Fixed A for every r; mostly a test fixture.
  static ConnectionProvider constant(ConnectionMatrix a);

  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  bool switching() const { return static_cast<bool>(selector_); }

  /// Active contact set at r; empty set for non-switching providers.
  ContactSet select(const Shape& r) const;
  ConnectionEval evaluate(const Shape& r) const;
  /// A of the piece c at r, whether or not c is the active piece there.
  ConnectionMatrix evaluate_piece(const Shape& r, const ContactSet& c) const;
  /// The constraint system behind a Constraint provider.
  ConstraintSystem constraint_system(const Shape& r, const ContactSet& c) const;

 private:
  Kind kind_ = Kind::Jacobian;
  Eigen::Index dim_ = 0;
  double h_ = kDefaultJacobianStep;
  Selector selector_;
  PieceMap pieces_;
  ConstraintBuilder builder_;
};

ConnectionEval piecewise_connection_eval(const ConnectionProvider& provider, const Shape& r);

}  // namespace locomo

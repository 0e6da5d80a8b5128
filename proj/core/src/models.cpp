#include "locomo/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>

namespace locomo {

namespace {

// Planar cross-product operator: perp(v) = z x v.
Eigen::Vector2d perp(const Eigen::Vector2d& v) { return {-v.y(), v.x()}; }

// Maps a body twist to the body-frame velocity of the point p: v + omega z x p.
Eigen::Matrix<double, 2, 3> point_velocity_map(const Eigen::Vector2d& p) {
  Eigen::Matrix<double, 2, 3> b;
  // clang-format off
  b << 1, 0, -p.y(),
       0, 1,  p.x();
  // clang-format on
  return b;
}

Eigen::Matrix2d anisotropic(double heading, double k_t, double k_n) {
  const Eigen::Vector2d t(std::cos(heading), std::sin(heading));
  const Eigen::Vector2d n = perp(t);
  return k_t * t * t.transpose() + k_n * n * n.transpose();
}

// A foot or contact point that moves with the shape.
struct PointContact {
  Eigen::Vector2d position;
  double heading = 0.0;
  Eigen::Matrix<double, 2, Eigen::Dynamic> dposition;
  Eigen::RowVectorXd dheading;
  SlipCoefficients k;
};

ConstraintSystem assemble_point_contacts(std::span<const PointContact> contacts, Eigen::Index d) {
  ConstraintSystem sys;
  sys.n = ConnectionMatrix::Zero(3, d);
  for (const auto& c : contacts) {
    const Eigen::Matrix<double, 2, 3> b = point_velocity_map(c.position);
    const Eigen::Matrix2d damping = anisotropic(c.heading, c.k.k_t, c.k.k_n);
    sys.m -= b.transpose() * damping * b;
    sys.m(2, 2) -= c.k.k_omega;
    sys.n -= b.transpose() * damping * c.dposition;
    sys.n.row(2) -= c.k.k_omega * c.dheading;
  }
  return sys;
}

void require_positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidModel(what + " must be positive and finite");
}

void require_nonnegative(double v, const std::string& what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidModel(what + " must be non-negative and finite");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void ChainModel::validate() const {
  if (lengths.empty() || lengths.size() % 2 == 0) {
    throw InvalidModel("chain needs an odd number of links");
  }
  for (double l : lengths) require_positive(l, "link length");
}

std::vector<Pose> chain_frames(const ChainModel& chain, const Shape& r) {
  chain.validate();
  check_dimension(r.size(), chain.dim(), "chain shape");
  const auto n = chain.lengths.size();
  const auto m = chain.middle();
  const auto& len = chain.lengths;
  std::vector<Pose> frames(n);
  for (std::size_t k = m; k + 1 < n; ++k) {
    frames[k + 1] =
        compose(compose(compose(frames[k], Pose::translation(0.5 * len[k], 0.0)),
                        Pose::rotation(r[static_cast<Eigen::Index>(k)])),
                Pose::translation(0.5 * len[k + 1], 0.0));
  }
  for (std::size_t k = m; k >= 1; --k) {
    frames[k - 1] =
        compose(compose(compose(frames[k], Pose::translation(-0.5 * len[k], 0.0)),
                        Pose::rotation(-r[static_cast<Eigen::Index>(k - 1)])),
                Pose::translation(-0.5 * len[k - 1], 0.0));
  }
  return frames;
}

std::vector<Eigen::Vector2d> chain_joints(const ChainModel& chain, const Shape& r) {
  const auto frames = chain_frames(chain, r);
  std::vector<Eigen::Vector2d> joints;
  for (std::size_t j = 0; j + 1 < frames.size(); ++j) {
    joints.push_back(frames[j].transform({0.5 * chain.lengths[j], 0.0}));
  }
  return joints;
}

LinkPointJacobian link_point_jacobian(const ChainModel& chain, const std::vector<Pose>& frames,
                                      const std::vector<Eigen::Vector2d>& joints,
                                      std::size_t link, double s) {
  const auto d = chain.dim();
  const auto m = chain.middle();
  LinkPointJacobian out;
  out.position = frames[link].transform({s, 0.0});
  out.heading = frames[link].theta;
  out.dposition = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, d);
  out.dheading = Eigen::RowVectorXd::Zero(d);
  // Joints between the middle link and this link swing it about the joint.
  for (std::size_t j = 0; j < joints.size(); ++j) {
    double sign = 0.0;
    if (link > m && j >= m && j < link) sign = 1.0;
    if (link < m && j >= link && j < m) sign = -1.0;
    if (sign == 0.0) continue;
    const auto col = static_cast<Eigen::Index>(j);
    out.dposition.col(col) = sign * perp(out.position - joints[j]);
    out.dheading(col) = sign;
  }
  return out;
}

// ---------------------------------------------------------------------------

void DragModel::validate() const {
  chain.validate();
  require_positive(c_t, "tangential drag coefficient");
  require_positive(c_n, "normal drag coefficient");
  if (quadrature < 2) throw InvalidModel("drag quadrature needs at least 2 points per link");
}

Quadrature gauss_legendre(int points) {
  if (points < 1) throw std::invalid_argument("quadrature needs at least one point");
  Quadrature q;
  const int n = points;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    q.nodes.push_back(x);
    q.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
  }
  // Newton starts from the largest root; present ascending.
  std::reverse(q.nodes.begin(), q.nodes.end());
  std::reverse(q.weights.begin(), q.weights.end());
  return q;
}

ConstraintSystem build_drag_constraints(const DragModel& model, const Shape& r) {
  model.validate();
  const auto& chain = model.chain;
  const auto frames = chain_frames(chain, r);
  const auto joints = chain_joints(chain, r);
  const Quadrature quad = gauss_legendre(model.quadrature);

  ConstraintSystem sys;
  sys.n = ConnectionMatrix::Zero(3, chain.dim());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const double half = 0.5 * chain.lengths[k];
    const Eigen::Matrix2d drag = anisotropic(frames[k].theta, model.c_t, model.c_n);
    for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
      const double s = half * quad.nodes[i];
      const double w = half * quad.weights[i];
      const LinkPointJacobian pt = link_point_jacobian(chain, frames, joints, k, s);
      const Eigen::Matrix<double, 2, 3> b = point_velocity_map(pt.position);
      // Force density -D v, moment density p x (-D v).
      sys.m -= w * b.transpose() * drag * b;
      sys.n -= w * b.transpose() * drag * pt.dposition;
    }
  }
  return sys;
}

DragModel purcell_swimmer(double link_length, double c_t, double c_n, int quadrature) {
  DragModel m{ChainModel{{link_length, link_length, link_length}}, c_t, c_n, quadrature};
  m.validate();
  return m;
}

ConnectionProvider drag_provider(const DragModel& model) {
  model.validate();
  return ConnectionProvider::constraint(
      model.chain.dim(),
      [model](const Shape& r, const ContactSet&) { return build_drag_constraints(model, r); });
}

// ---------------------------------------------------------------------------

void LeggedModel::validate() const {
  if (legs.empty()) throw InvalidModel("legged model needs at least one leg");
  if (legs.size() > 32) throw InvalidModel("legged model supports at most 32 legs");
  if (!selector_offsets.empty() && selector_offsets.size() != legs.size()) {
    throw InvalidModel("selector offsets need one entry per leg");
  }
  for (const auto& leg : legs) {
    require_positive(leg.length, "leg length");
    if (leg.direction != 1.0 && leg.direction != -1.0) {
      throw InvalidModel("leg direction must be +1 or -1");
    }
  }
}

Pose foot_pose(const LeggedModel& model, std::size_t leg, const Shape& r) {
  const Leg& l = model.legs.at(leg);
  const double angle = l.direction * r[static_cast<Eigen::Index>(leg)];
  return compose(compose(l.hip, Pose::rotation(angle)), Pose::translation(l.length, 0.0));
}

PoseMap build_contact_map(const LeggedModel& model, const ContactSet& c) {
  model.validate();
  if (c.empty()) throw std::invalid_argument("contact map needs a nonempty contact set");
  std::vector<std::size_t> feet;
  for (std::size_t i = 0; i < model.legs.size(); ++i) {
    if (c.contains(static_cast<int>(i))) feet.push_back(i);
  }
  if (feet.size() != static_cast<std::size_t>(c.size())) {
    throw InvalidModel("contact set " + c.to_string() + " names a foot the model lacks");
  }
  const Eigen::Index d = model.dim();
  if (feet.size() == 1) {
    const std::size_t foot = feet.front();
    return {[model, foot, d](const Shape& r) {
              check_dimension(r.size(), d, "legged shape");
              return inverse(foot_pose(model, foot, r));
            },
            d};
  }
  if (feet.size() == 2) {
    const std::size_t a = feet[0];
    const std::size_t b = feet[1];
    return {[model, a, b, d](const Shape& r) {
              check_dimension(r.size(), d, "legged shape");
              const Eigen::Vector2d pa = foot_pose(model, a, r).position();
              const Eigen::Vector2d pb = foot_pose(model, b, r).position();
              const Eigen::Vector2d span = pb - pa;
              const double scale = std::max({1.0, pa.norm(), pb.norm()});
              if (span.norm() <= 1e-12 * scale) {
                throw DegenerateStance("pinned feet coincide; stance frame is undefined");
              }
              return inverse(Pose::make(pa.x(), pa.y(), std::atan2(span.y(), span.x())));
            },
            d};
  }
  throw DegenerateStance("planar pinning is defined for one flat foot or two pin feet, got " +
                         std::to_string(feet.size()) + " feet");
}

ContactSet select_contacts(const LeggedModel& model, const Shape& r) {
  check_dimension(r.size(), model.dim(), "legged shape");
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < model.legs.size(); ++i) {
    const double offset = model.selector_offsets.empty() ? 0.0 : model.selector_offsets[i];
    const double value = r[static_cast<Eigen::Index>(i)] - offset;
    if (value > best_value) {
      best = i;
      best_value = value;
    }
  }
  return ContactSet::single(static_cast<int>(best));
}

LeggedModel crawler(double half_width, double leg_length) {
  LeggedModel m;
  m.legs = {Leg{Pose::make(0.0, half_width, std::numbers::pi / 2), leg_length, -1.0},
            Leg{Pose::make(0.0, -half_width, -std::numbers::pi / 2), leg_length, 1.0}};
  m.validate();
  return m;
}

ConnectionProvider legged_provider(const LeggedModel& model, double h) {
  model.validate();
  return ConnectionProvider::piecewise(
      model.dim(), [model](const Shape& r) { return select_contacts(model, r); },
      [model](const ContactSet& c) { return build_contact_map(model, c); }, h);
}

// ---------------------------------------------------------------------------

void SlipModel::validate() const {
  legs.validate();
  if (stance.size() != legs.legs.size() || swing.size() != legs.legs.size()) {
    throw InvalidModel("slip model needs stance and swing coefficients per foot");
  }
  for (const auto& k : stance) {
    require_positive(k.k_t, "stance k_t");
    require_positive(k.k_n, "stance k_n");
    require_positive(k.k_omega, "stance k_omega");
  }
  for (const auto& k : swing) {
    require_nonnegative(k.k_t, "swing k_t");
    require_nonnegative(k.k_n, "swing k_n");
    require_nonnegative(k.k_omega, "swing k_omega");
  }
}

ConstraintSystem build_slip_constraints(const SlipModel& model, const ContactSet& c,
                                        const Shape& r) {
  model.validate();
  if (c.empty()) throw std::invalid_argument("slip constraints need a nonempty contact set");
  const Eigen::Index d = model.legs.dim();
  check_dimension(r.size(), d, "legged shape");
  std::vector<PointContact> contacts;
  for (std::size_t i = 0; i < model.legs.legs.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const Leg& leg = model.legs.legs[i];
    const Pose foot = foot_pose(model.legs, i, r);
    PointContact pc;
    pc.position = foot.position();
    pc.heading = foot.theta;
    pc.dposition = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, d);
    pc.dposition.col(col) = leg.direction * perp(pc.position - leg.hip.position());
    pc.dheading = Eigen::RowVectorXd::Zero(d);
    pc.dheading(col) = leg.direction;
    pc.k = c.contains(static_cast<int>(i)) ? model.stance[i] : model.swing[i];
    contacts.push_back(std::move(pc));
  }
  return assemble_point_contacts(contacts, d);
}

SlipModel slip_crawler(const LeggedModel& geometry, SlipCoefficients stance,
                       SlipCoefficients swing) {
  SlipModel m{geometry, std::vector<SlipCoefficients>(geometry.legs.size(), stance),
              std::vector<SlipCoefficients>(geometry.legs.size(), swing)};
  m.validate();
  return m;
}

ConnectionProvider slip_provider(const SlipModel& model) {
  model.validate();
  return ConnectionProvider::constraint(
      model.legs.dim(),
      [model](const Shape& r, const ContactSet& c) {
        return build_slip_constraints(model, c, r);
      },
      [model](const Shape& r) { return select_contacts(model.legs, r); });
}

void ManyLeggedModel::validate() const {
  drag.validate();
  if (feet_per_link < 2) throw InvalidModel("many-legged surrogate needs at least 2 feet per link");
}

ConstraintSystem many_legged_drag_surrogate(const ManyLeggedModel& model, const Shape& r) {
  model.validate();
  const auto& chain = model.drag.chain;
  const auto frames = chain_frames(chain, r);
  const auto joints = chain_joints(chain, r);
  const int m = model.feet_per_link;
  std::vector<PointContact> contacts;
  contacts.reserve(frames.size() * static_cast<std::size_t>(m));
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const double len = chain.lengths[k];
    const double spacing = len / m;
    for (int j = 0; j < m; ++j) {
      const double s = -0.5 * len + (j + 0.5) * spacing;
      const LinkPointJacobian pt = link_point_jacobian(chain, frames, joints, k, s);
      contacts.push_back({pt.position, pt.heading, pt.dposition, pt.dheading,
                          {model.drag.c_t * spacing, model.drag.c_n * spacing, 0.0}});
    }
  }
  return assemble_point_contacts(contacts, chain.dim());
}

ConnectionProvider many_legged_provider(const ManyLeggedModel& model) {
  model.validate();
  return ConnectionProvider::constraint(
      model.drag.chain.dim(), [model](const Shape& r, const ContactSet&) {
        return many_legged_drag_surrogate(model, r);
      });
}

// ---------------------------------------------------------------------------

PoseMap arm_map(std::vector<double> lengths) {
  if (lengths.empty()) throw InvalidModel("arm needs at least one link");
  for (double l : lengths) require_positive(l, "arm link length");
  const auto d = static_cast<Eigen::Index>(lengths.size());
  return {[lengths = std::move(lengths), d](const Shape& r) {
            check_dimension(r.size(), d, "arm shape");
            Pose g;
            for (Eigen::Index i = 0; i < d; ++i) {
              g = compose(compose(g, Pose::rotation(r[i])),
                          Pose::translation(lengths[static_cast<std::size_t>(i)], 0.0));
            }
            return g;
          },
          d};
}

PoseMap chain_tip_map(const ChainModel& chain) {
  chain.validate();
  if (chain.lengths.size() < 3) throw InvalidModel("chain tip map needs at least 3 links");
  return {[chain](const Shape& r) {
            const auto frames = chain_frames(chain, r);
            return compose(inverse(frames.front()), frames.back());
          },
          chain.dim()};
}

PoseMap synthetic_map() {
  return {[](const Shape& r) {
            check_dimension(r.size(), 2, "synthetic shape");
            const double a = r[0];
            const double b = r[1];
            return Pose::make(std::sin(a) + 0.5 * b * b, a * b + std::cos(b) - 1.0,
                              0.7 * std::sin(a - b) + 0.2 * a);
          },
          2};
}

PoseMap testbed_map(const std::string& name) {
  if (name == "arm2") return arm_map({1.0, 0.8});
  if (name == "arm3") return arm_map({1.0, 0.8, 0.6});
  if (name == "synthetic") return synthetic_map();
  throw InvalidModel("unknown holonomic testbed '" + name + "'");
}

}  // namespace locomo

#include "locomo/models.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "test_support.hpp"

namespace locomo {
namespace {

using testing::kPi;
using testing::pose_distance;
using testing::Rng;

// Hand forward kinematics of a 3-link chain with lengths l.
std::vector<Pose> ThreeLinkFrames(const std::array<double, 3>& l, double r1, double r2) {
  const Pose left = Pose::make(-0.5 * l[1] - 0.5 * l[0] * std::cos(r1), 0.5 * l[0] * std::sin(r1), -r1);
  const Pose right = Pose::make(0.5 * l[1] + 0.5 * l[2] * std::cos(r2), 0.5 * l[2] * std::sin(r2), r2);
  return {left, Pose::identity(), right};
}

TEST(ChainFrames, StraightChainIsCollinear) {
  const ChainModel chain{{1.0, 2.0, 0.5}};
  const auto frames = chain_frames(chain, Eigen::Vector2d::Zero());
  EXPECT_EQ(frames[1], Pose::identity());
  EXPECT_LE(pose_distance(frames[0], Pose::make(-1.5, 0, 0)), 1e-15);
  EXPECT_LE(pose_distance(frames[2], Pose::make(1.25, 0, 0)), 1e-15);
}

TEST(ChainFrames, MatchHandKinematics) {
  const std::array<double, 3> l{1.0, 2.0, 0.5};
  const ChainModel chain{{l[0], l[1], l[2]}};
  const Eigen::Vector2d shapes[] = {{kPi / 2, 0}, {0.3, -0.7}, {-1.2, 2.0}};
  for (const auto& r : shapes) {
    const auto frames = chain_frames(chain, r);
    const auto expected = ThreeLinkFrames(l, r[0], r[1]);
    for (int k = 0; k < 3; ++k) EXPECT_LE(pose_distance(frames[k], expected[k]), 1e-14);
  }
  // Link 1 sits rotated -pi/2 relative to the middle link.
  EXPECT_NEAR(chain_frames(chain, shapes[0])[0].theta, -kPi / 2, 1e-15);
}

TEST(ChainFrames, Deterministic) {
  const ChainModel chain{{1, 1, 1, 1, 1}};
  const Eigen::Vector4d r(0.1, -0.2, 0.3, 0.4);
  const auto a = chain_frames(chain, r);
  const auto b = chain_frames(chain, r);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k], b[k]);
  EXPECT_THROW(chain_frames(chain, Eigen::Vector2d(0, 0)), DimensionMismatch);
  EXPECT_THROW((ChainModel{{1, 1}}).validate(), InvalidModel);
  EXPECT_THROW((ChainModel{{1, -1, 1}}).validate(), InvalidModel);
}

TEST(LinkPointJacobian, MatchesFiniteDifferences) {
  const ChainModel chain{{1.0, 0.7, 1.3, 0.9, 1.1}};
  Rng rng;
  for (int trial = 0; trial < 5; ++trial) {
    const Shape r = rng.vector(4, -1.2, 1.2);
    const auto frames = chain_frames(chain, r);
    const auto joints = chain_joints(chain, r);
    for (std::size_t k = 0; k < 5; ++k) {
      const double s = rng.uniform(-0.4, 0.4);
      const auto pj = link_point_jacobian(chain, frames, joints, k, s);
      for (Eigen::Index j = 0; j < 4; ++j) {
        const double h = 1e-6;
        Shape rp = r, rm = r;
        rp[j] += h;
        rm[j] -= h;
        const Pose fp = chain_frames(chain, rp)[k];
        const Pose fm = chain_frames(chain, rm)[k];
        const Eigen::Vector2d dp = (fp.transform({s, 0}) - fm.transform({s, 0})) / (2 * h);
        EXPECT_LE((pj.dposition.col(j) - dp).norm(), 1e-8);
        EXPECT_NEAR(pj.dheading(j), normalize_angle(fp.theta - fm.theta) / (2 * h), 1e-8);
      }
    }
  }
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int n : {2, 3, 8, 64}) {
    const Quadrature q = gauss_legendre(n);
    ASSERT_EQ(q.nodes.size(), static_cast<std::size_t>(n));
    EXPECT_TRUE(std::is_sorted(q.nodes.begin(), q.nodes.end()));
    for (int p = 0; p < 2 * n; ++p) {
      double sum = 0;
      for (int i = 0; i < n; ++i) sum += q.weights[i] * std::pow(q.nodes[i], p);
      const double exact = p % 2 == 1 ? 0.0 : 2.0 / (p + 1);
      EXPECT_NEAR(sum, exact, 1e-13) << "n = " << n << " p = " << p;
    }
  }
}

TEST(DragConstraints, SingleLinkLongitudinal) {
  const DragModel link{ChainModel{{1.5}}, 0.8, 2.5, 8};
  const ConstraintSystem sys = build_drag_constraints(link, Shape(0));
  EXPECT_EQ(sys.n.cols(), 0);
  EXPECT_NEAR(sys.m(0, 0), -0.8 * 1.5, 1e-14);
  // Whole matrix against the analytic integral over the link.
  const Eigen::Vector3d diag(-0.8 * 1.5, -2.5 * 1.5, -2.5 * std::pow(1.5, 3) / 12);
  EXPECT_LE((sys.m - Eigen::Matrix3d(diag.asDiagonal())).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(DragConstraints, IsotropicStraightSwimmerIsSymmetricNegativeDefinite) {
  const DragModel swimmer = purcell_swimmer(1.0, 1.0, 1.0);
  const ConstraintSystem sys = build_drag_constraints(swimmer, Eigen::Vector2d::Zero());
  EXPECT_LE((sys.m - sys.m.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(sys.m);
  EXPECT_LT(eig.eigenvalues().maxCoeff(), 0.0);
}

TEST(DragConstraints, QuadratureSelfConvergence) {
  Rng rng;
  DragModel coarse = purcell_swimmer();
  DragModel fine = coarse;
  fine.quadrature = 64;
  for (int i = 0; i < 20; ++i) {
    const Shape r = rng.vector(2, -2, 2);
    const ConstraintSystem a = build_drag_constraints(coarse, r);
    const ConstraintSystem b = build_drag_constraints(fine, r);
    EXPECT_LE((a.m - b.m).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((a.n - b.n).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(DragConstraints, Dissipative) {
  Rng rng(11);
  const DragModel swimmer = purcell_swimmer();
  for (int i = 0; i < 100; ++i) {
    const Shape r = rng.vector(2, -kPi, kPi);
    const Eigen::Matrix3d m = build_drag_constraints(swimmer, r).m;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(-0.5 * (m + m.transpose()));
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(DragConstraints, InvalidModelsRejected) {
  EXPECT_THROW(purcell_swimmer(1.0, 0.0), InvalidModel);
  EXPECT_THROW(purcell_swimmer(1.0, 1.0, 2.0, 1), InvalidModel);
  EXPECT_THROW(build_drag_constraints(purcell_swimmer(), Eigen::Vector3d::Zero()), DimensionMismatch);
}

// --- legged ----------------------------------------------------------------

TEST(ContactMap, FootUnderHipIsPureTranslation) {
  LeggedModel one;
  one.legs = {Leg{Pose::identity(), 0.9, 1.0}};
  const PoseMap f = build_contact_map(one, ContactSet::single(0));
  EXPECT_LE(pose_distance(f(Eigen::VectorXd::Zero(1)), Pose::make(-0.9, 0, 0)), 1e-15);
}

TEST(ContactMap, LegSweepRotatesBodyAboutFoot) {
  const LeggedModel model = crawler();
  const PoseMap f = build_contact_map(model, ContactSet::single(1));
  const Pose base = f(Eigen::Vector2d(0.1, 0.0));
  const Eigen::Vector2d hip = model.legs[1].hip.position();
  for (double delta : {0.1, -0.3, 0.7}) {
    const Pose moved = f(Eigen::Vector2d(0.1, delta));
    // Heading turns by -delta (leg direction +1) while the hip pivot, rigidly
    // tied to the planted foot through the leg, stays put in the stance frame.
    EXPECT_NEAR(normalize_angle(moved.theta - base.theta), -delta, 1e-15);
    EXPECT_LE((moved.transform(hip) - base.transform(hip)).norm(), 1e-15);
  }
  // One foot with a zero-length offset from its hip: the rotation is about the foot itself.
  LeggedModel short_leg;
  short_leg.legs = {Leg{Pose::make(0.3, 0.2, 0.1), 1e-300, 1.0}};
  const PoseMap g = build_contact_map(short_leg, ContactSet::single(0));
  const Pose g0 = g(Eigen::VectorXd::Constant(1, 0.0));
  const Pose g1 = g(Eigen::VectorXd::Constant(1, 0.4));
  EXPECT_LE(pose_distance(g1, compose(Pose::rotation(-0.4), g0)), 1e-15);
}

// Body pose (in the stance frame) solving the two-pin equations by Newton's
// method with a finite-difference Jacobian.
Pose SolvePinning(const Eigen::Vector2d& pa, const Eigen::Vector2d& pb, Eigen::Vector3d q) {
  auto residual = [&](const Eigen::Vector3d& s) {
    const Pose g = Pose::make(s.x(), s.y(), s.z());
    const Eigen::Vector2d a = g.transform(pa);
    const Eigen::Vector2d b = g.transform(pb);
    return Eigen::Vector3d(a.x(), a.y(), b.y());
  };
  for (int it = 0; it < 50; ++it) {
    const Eigen::Vector3d f = residual(q);
    if (f.norm() < 1e-15) break;
    Eigen::Matrix3d j;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d e = Eigen::Vector3d::Zero();
      e[k] = 1e-7;
      j.col(k) = (residual(q + e) - residual(q - e)) / 2e-7;
    }
    q -= j.fullPivLu().solve(f);
  }
  return Pose::make(q.x(), q.y(), q.z());
}

TEST(ContactMap, TwoPinStanceMatchesRootFinder) {
  const LeggedModel model = crawler();
  const PoseMap f = build_contact_map(model, ContactSet::single(0).with(1));
  Rng rng;
  for (int i = 0; i < 5; ++i) {
    const Eigen::Vector2d r(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Eigen::Vector2d pa = foot_pose(model, 0, r).position();
    const Eigen::Vector2d pb = foot_pose(model, 1, r).position();
    // Start away from the solution; foot b sits on the -y body side, so the
    // stance x axis points roughly along -y and the body heads about +pi/2.
    const Pose solved = SolvePinning(pa, pb, Eigen::Vector3d(0.3, -0.2, kPi / 2 + 0.3));
    ASSERT_GT(solved.transform(pb).x(), 0.0);
    EXPECT_LE(pose_distance(f(r), solved), 1e-9);
  }
}

TEST(ContactMap, DegenerateStances) {
  LeggedModel twin;
  twin.legs = {Leg{Pose::identity(), 1.0, 1.0}, Leg{Pose::identity(), 1.0, 1.0}};
  const PoseMap f = build_contact_map(twin, ContactSet::single(0).with(1));
  EXPECT_THROW(f(Eigen::Vector2d(0.2, 0.2)), DegenerateStance);
  EXPECT_NO_THROW(f(Eigen::Vector2d(0.2, 0.5)));
  LeggedModel three = twin;
  three.legs.push_back(Leg{Pose::make(1, 0, 0), 1.0, 1.0});
  EXPECT_THROW(build_contact_map(three, ContactSet::from_mask(7)), DegenerateStance);
  EXPECT_THROW(build_contact_map(twin, ContactSet::single(4)), InvalidModel);
}

TEST(SelectContacts, ThresholdRule) {
  const LeggedModel model = crawler();
  EXPECT_EQ(select_contacts(model, Eigen::Vector2d(0.2, 0.1)), ContactSet::single(0));
  EXPECT_EQ(select_contacts(model, Eigen::Vector2d(0.1, 0.2)), ContactSet::single(1));
  EXPECT_EQ(select_contacts(model, Eigen::Vector2d(0.3, 0.3)), ContactSet::single(0));
  LeggedModel offset = model;
  offset.selector_offsets = {0.25, 0.0};
  EXPECT_EQ(select_contacts(offset, Eigen::Vector2d(0.2, 0.1)), ContactSet::single(1));
}

TEST(SelectContacts, PiecewiseConstantOffTheDiagonal) {
  const LeggedModel model = crawler();
  for (int i = 0; i <= 200; ++i) {
    for (int j = 0; j <= 200; ++j) {
      const Eigen::Vector2d r(-1 + 0.01 * i, -1 + 0.01 * j);
      const ContactSet expected = r[0] >= r[1] ? ContactSet::single(0) : ContactSet::single(1);
      ASSERT_EQ(select_contacts(model, r), expected) << r.transpose();
    }
  }
}

// --- slip ------------------------------------------------------------------

TEST(SlipConstraints, FrozenIsotropicFootPinsTheBody) {
  LeggedModel one;
  one.legs = {Leg{Pose::make(0.2, 0.1, 0.4), 1.0, 1.0}};
  const SlipModel model{one, {SlipCoefficients{3, 3, 3}}, {SlipCoefficients{0, 0, 0}}};
  const ConstraintSystem sys = build_slip_constraints(model, ContactSet::single(0), Eigen::VectorXd::Constant(1, 0.3));
  const ConnectionMatrix a = linear_constraint_connection(sys);
  EXPECT_EQ(apply(a, Eigen::VectorXd::Zero(1)), Twist{});
  EXPECT_GT(std::abs(sys.m.determinant()), 1.0);
  EXPECT_LE(constraint_residual(sys, a), 1e-10);
}

TEST(SlipConstraints, MirrorSymmetricStanceDoesNotYaw) {
  const SlipModel model = slip_crawler(crawler(), {2, 5, 1}, {2, 5, 1});
  const ContactSet both = ContactSet::single(0).with(1);
  for (double v : {-0.6, 0.0, 0.4}) {
    const ConstraintSystem sys = build_slip_constraints(model, both, Eigen::Vector2d(v, v));
    const Twist xi = apply(linear_constraint_connection(sys), Eigen::Vector2d(1.3, 1.3));
    EXPECT_LE(std::abs(xi.omega), 1e-14);
    EXPECT_LE(std::abs(xi.vy), 1e-14);
    EXPECT_GT(std::abs(xi.vx), 0.1);
  }
}

TEST(SlipConstraints, StickLimitRecoversThePlantedFootConnection) {
  const LeggedModel geometry = crawler();
  const ConnectionProvider pinned = legged_provider(geometry);
  const SlipCoefficients stance{1.0, 2.0, 0.5};
  const SlipCoefficients swing{1.0, 2.0, 0.5};
  Rng rng;
  for (int trial = 0; trial < 5; ++trial) {
    const Shape r = rng.vector(2, -0.8, 0.8);
    const ContactSet c = select_contacts(geometry, r);
    const ConnectionMatrix target = pinned.evaluate_piece(r, c);
    double prev = std::numeric_limits<double>::infinity();
    for (double s : {1e1, 1e2, 1e3, 1e4, 1e5}) {
      const SlipModel model = slip_crawler(geometry, stance.scaled(s), swing);
      const ConnectionMatrix a = linear_constraint_connection(build_slip_constraints(model, c, r));
      const double gap = (a - target).cwiseAbs().maxCoeff();
      EXPECT_LE(gap, prev);
      prev = gap;
    }
    EXPECT_LE(prev, 1e-3);
  }
}

TEST(SlipConstraints, ValidationAndSingularity) {
  EXPECT_THROW(slip_crawler(crawler(), {0, 1, 1}, {1, 1, 1}), InvalidModel);
  EXPECT_THROW(slip_crawler(crawler(), {1, 1, 1}, {-1, 1, 1}), InvalidModel);
  const SlipModel m = slip_crawler(crawler(), {1, 1, 1}, {0, 0, 0});
  EXPECT_THROW(build_slip_constraints(m, ContactSet(), Eigen::Vector2d(0, 0)), std::invalid_argument);
}

// --- many-legged surrogate ---------------------------------------------------

TEST(ManyLegged, TwoFeetEqualsTwoPointMidpointSum) {
  const DragModel link{ChainModel{{2.0}}, 0.7, 1.9, 8};
  const ConstraintSystem sys = many_legged_drag_surrogate({link, 2}, Shape(0));
  // Feet at s = -L/4 and +L/4, each carrying half the link.
  Eigen::Matrix3d expected = Eigen::Matrix3d::Zero();
  for (double s : {-0.5, 0.5}) {
    Eigen::Matrix<double, 2, 3> b;
    b << 1, 0, 0, 0, 1, s;
    const Eigen::Matrix2d d = Eigen::Vector2d(0.7, 1.9).asDiagonal();
    expected -= 1.0 * b.transpose() * d * b;
  }
  EXPECT_LE((sys.m - expected).cwiseAbs().maxCoeff(), 1e-15);
}

double RelativeGap(const ConstraintSystem& a, const ConstraintSystem& b) {
  Eigen::MatrixXd ab(3, 3 + a.n.cols()), bb(3, 3 + b.n.cols());
  ab << a.m, a.n;
  bb << b.m, b.n;
  return (ab - bb).norm() / bb.norm();
}

TEST(ManyLegged, SixtyFourFeetApproachTheAnalyticLink) {
  const DragModel link{ChainModel{{1.0}}, 1.0, 2.0, 8};
  const ConstraintSystem surrogate = many_legged_drag_surrogate({link, 64}, Shape(0));
  const Eigen::Matrix3d analytic = Eigen::Vector3d(-1.0, -2.0, -2.0 / 12).asDiagonal();
  EXPECT_LE((surrogate.m - analytic).norm() / analytic.norm(), 1e-3);
}

TEST(ManyLegged, DoublingFeetShrinksTheGap) {
  const DragModel swimmer = purcell_swimmer();
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Shape r = rng.vector(2, -1.5, 1.5);
    const ConstraintSystem drag = build_drag_constraints(swimmer, r);
    double prev = std::numeric_limits<double>::infinity();
    for (int m : {2, 4, 8, 16, 32, 64}) {
      const double gap = RelativeGap(many_legged_drag_surrogate({swimmer, m}, r), drag);
      EXPECT_LE(gap, 0.5 * prev) << "m = " << m;
      prev = gap;
    }
    EXPECT_LE(prev, 1e-3);
  }
}

// --- holonomic testbeds -------------------------------------------------------

TEST(Testbeds, ArmAndChainTip) {
  const PoseMap arm = testbed_map("arm2");
  EXPECT_LE(pose_distance(arm(Eigen::Vector2d(kPi / 2, 0)), Pose::make(0, 1.8, kPi / 2)), 1e-15);
  const PoseMap tip = chain_tip_map(ChainModel{{1, 1, 1}});
  EXPECT_LE(pose_distance(tip(Eigen::Vector2d::Zero()), Pose::make(2, 0, 0)), 1e-15);
  EXPECT_THROW(testbed_map("nope"), InvalidModel);
}

}  // namespace
}  // namespace locomo

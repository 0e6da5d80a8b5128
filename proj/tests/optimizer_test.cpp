#include "locomo/optimizer.hpp"

#include <gtest/gtest.h>

#include "locomo/models.hpp"
#include "test_support.hpp"

namespace locomo {
namespace {

using testing::kPi;

OptimizerSettings Budget(int budget, int seeds, std::uint64_t seed = 0) {
  OptimizerSettings s;
  s.budget = budget;
  s.seeds = seeds;
  s.seed = seed;
  return s;
}

GaitFamily SwimmerFamily() {
  GaitFamily family;
  family.base.period = 1.0;
  family.base.mean = Eigen::Vector2d::Zero();
  family.base.cos_coeffs = Eigen::MatrixXd::Zero(2, 1);
  family.base.sin_coeffs = Eigen::MatrixXd::Zero(2, 1);
  family.parameters = {
      {"amplitude", FamilyParameter::Kind::Amplitude, 1, {0, 1}, 0.2, 1.5},
      {"phase", FamilyParameter::Kind::Phase, 1, {1}, 0.0, kPi},
  };
  return family;
}

IntegratorSettings Coarse() {
  IntegratorSettings s;
  s.step = 1e-2;
  return s;
}

TEST(NelderMead, RecoversQuadraticPeak) {
  const Eigen::Vector2d target(0.3, -0.6);
  int calls = 0;
  const ScalarObjective f = [&](const Eigen::VectorXd& p) {
    ++calls;
    return -(p - target).squaredNorm();
  };
  const OptimizationReport rep =
      nelder_mead_maximize(f, Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1), Budget(200, 1));
  EXPECT_LE((rep.best_params - target).norm(), 1e-4);
  EXPECT_LE(rep.evaluations, 200);
  EXPECT_EQ(rep.evaluations, calls);
  EXPECT_EQ(static_cast<int>(rep.history.size()), rep.evaluations);
}

TEST(NelderMead, PeakOnTheBoundary) {
  const ScalarObjective f = [](const Eigen::VectorXd& p) { return p[0] + 0.5 * p[1] - p[2] * p[2]; };
  const OptimizationReport rep = nelder_mead_maximize(f, Eigen::Vector3d(-1, -1, -1),
                                                      Eigen::Vector3d(1, 2, 1), Budget(400, 2));
  EXPECT_LE((rep.best_params - Eigen::Vector3d(1, 2, 0)).norm(), 1e-4);
  for (const auto& rec : rep.history) {
    EXPECT_TRUE((rec.params.array() >= -1).all());
    EXPECT_LE(rec.params[1], 2.0);
  }
}

TEST(NelderMead, BestSoFarIsMonotoneAndMatchesHistory) {
  const ScalarObjective f = [](const Eigen::VectorXd& p) {
    return std::sin(3 * p[0]) * std::cos(2 * p[1]) - 0.1 * p.squaredNorm();
  };
  const OptimizationReport rep =
      nelder_mead_maximize(f, Eigen::Vector2d(-2, -2), Eigen::Vector2d(2, 2), Budget(300, 4, 9));
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& rec : rep.history) {
    const double next = std::max(best, rec.objective);
    EXPECT_GE(next, best);
    best = next;
    // Re-evaluation is exact.
    EXPECT_EQ(f(rec.params), rec.objective);
  }
  EXPECT_EQ(best, rep.best_objective);
  EXPECT_EQ(f(rep.best_params), rep.best_objective);
}

TEST(NelderMead, DeterministicAcrossRunsAndThreadCounts) {
  const ScalarObjective f = [](const Eigen::VectorXd& p) {
    return -std::pow(p[0] - 0.2, 2) - std::pow(p[1] + 0.1, 4) + std::cos(5 * p[0]);
  };
  OptimizerSettings s = Budget(240, 4, 42);
  const OptimizationReport a = nelder_mead_maximize(f, Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1), s);
  const OptimizationReport b = nelder_mead_maximize(f, Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1), s);
  s.threads = 4;
  const OptimizationReport c = nelder_mead_maximize(f, Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1), s);
  for (const OptimizationReport* other : {&b, &c}) {
    ASSERT_EQ(a.history.size(), other->history.size());
    for (std::size_t k = 0; k < a.history.size(); ++k) {
      EXPECT_EQ(a.history[k].params, other->history[k].params);
      EXPECT_EQ(a.history[k].objective, other->history[k].objective);
      EXPECT_EQ(a.history[k].seed, other->history[k].seed);
    }
    EXPECT_EQ(a.best_params, other->best_params);
    EXPECT_EQ(a.termination, other->termination);
  }
  s.seed = 43;
  s.threads = 1;
  const OptimizationReport d = nelder_mead_maximize(f, Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1), s);
  EXPECT_NE(a.history.back().params, d.history.back().params);
}

TEST(NelderMead, SentinelRegionsAreAvoided) {
  const ScalarObjective f = [](const Eigen::VectorXd& p) {
    if (p[0] > 0.5) return std::numeric_limits<double>::quiet_NaN();
    if (p[1] < -0.5) return -std::numeric_limits<double>::infinity();
    return -(p - Eigen::Vector2d(0.2, 0.1)).squaredNorm();
  };
  const OptimizationReport rep =
      nelder_mead_maximize(f, Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1), Budget(300, 3));
  EXPECT_LE((rep.best_params - Eigen::Vector2d(0.2, 0.1)).norm(), 1e-4);
  for (const auto& rec : rep.history) EXPECT_FALSE(std::isnan(rec.objective));
}

TEST(NelderMead, InvalidSettings) {
  const ScalarObjective f = [](const Eigen::VectorXd&) { return 0.0; };
  EXPECT_THROW(nelder_mead_maximize(f, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), Budget(3, 1)),
               std::invalid_argument);
  EXPECT_THROW(nelder_mead_maximize(f, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Budget(30, 1)),
               std::invalid_argument);
}

TEST(ObjectiveDisplacement, Examples) {
  const auto swimmer = drag_provider(purcell_swimmer());
  const DisplacementObjective x = DisplacementObjective::parse("x");
  IntegratorSettings s;

  const Gait still = Gait::sinusoid(Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(),
                                    Eigen::Vector2d::Zero(), 1.0);
  EXPECT_EQ(objective_displacement(swimmer, still, x, s), 0.0);

  const Gait reciprocal = Gait::sinusoid(Eigen::Vector2d::Zero(), Eigen::Vector2d(0.8, 0.0),
                                         Eigen::Vector2d::Zero(), 1.0);
  EXPECT_LE(std::abs(objective_displacement(swimmer, reciprocal, x, s)), 1e-8);

  const Gait quarter = Gait::sinusoid(Eigen::Vector2d::Zero(), Eigen::Vector2d(0.5, 0.5),
                                      Eigen::Vector2d(0, kPi / 2), 1.0);
  const double forward = objective_displacement(swimmer, quarter, x, s);
  EXPECT_GT(forward, 0.0);
  EXPECT_NEAR(forward, 0.0455115419128537, 1e-12);
  EXPECT_EQ(objective_displacement(swimmer, quarter, DisplacementObjective::parse("-x"), s), -forward);

  IntegratorSettings two = s;
  two.cycles = 2;
  EXPECT_NEAR(objective_displacement(swimmer, quarter, x, two), forward, 1e-12);
}

TEST(ObjectiveDisplacement, SingularModelsGiveTheSentinel) {
  const auto broken = ConnectionProvider::constraint(2, [](const Shape&, const ContactSet&) {
    return ConstraintSystem{Eigen::Matrix3d::Zero(), ConnectionMatrix::Zero(3, 2)};
  });
  const Gait quarter = Gait::sinusoid(Eigen::Vector2d::Zero(), Eigen::Vector2d(0.5, 0.5),
                                      Eigen::Vector2d(0, kPi / 2), 1.0);
  EXPECT_EQ(objective_displacement(broken, quarter, DisplacementObjective{}, IntegratorSettings{}),
            -std::numeric_limits<double>::infinity());
}

TEST(ObjectiveDisplacement, ParseAndPrint) {
  for (const char* text : {"x", "-x", "y", "-y", "theta", "-theta", "planar"}) {
    EXPECT_EQ(DisplacementObjective::parse(text).to_string(), text);
  }
  EXPECT_THROW(DisplacementObjective::parse("-planar"), std::invalid_argument);
  EXPECT_THROW(DisplacementObjective::parse("z"), std::invalid_argument);
}

TEST(GaitFamily, PolarParametersSetSineAndCosine) {
  const GaitFamily family = SwimmerFamily();
  family.validate();
  const Gait g = family.instantiate(Eigen::Vector2d(0.7, kPi / 2));
  const FourierGait& f = *g.fourier();
  EXPECT_NEAR(f.sin_coeffs(0, 0), 0.7, 1e-15);
  EXPECT_NEAR(f.cos_coeffs(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(f.sin_coeffs(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(f.cos_coeffs(1, 0), 0.7, 1e-15);
  EXPECT_THROW(family.instantiate(Eigen::Vector3d::Zero()), DimensionMismatch);
  GaitFamily bad = family;
  bad.parameters[0].coordinates = {2};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = family;
  bad.parameters[1].harmonic = 2;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Optimize, SwimmerFamilyBeatsGridSearch) {
  const auto swimmer = drag_provider(purcell_swimmer());
  const GaitFamily family = SwimmerFamily();
  const DisplacementObjective x{};
  const IntegratorSettings integ = Coarse();
  double grid_best = -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd lo = family.lower();
  const Eigen::VectorXd hi = family.upper();
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const Eigen::Vector2d p(lo[0] + (hi[0] - lo[0]) * i / 20, lo[1] + (hi[1] - lo[1]) * j / 20);
      grid_best = std::max(grid_best, objective_displacement(swimmer, family.instantiate(p), x, integ));
    }
  }
  const OptimizationReport rep = optimize(swimmer, family, x, integ, Budget(500, 4));
  EXPECT_LE(rep.evaluations, 500);
  EXPECT_GE(rep.best_objective, grid_best - 1e-6);
  EXPECT_EQ(objective_displacement(swimmer, family.instantiate(rep.best_params), x, integ),
            rep.best_objective);
}

}  // namespace
}  // namespace locomo

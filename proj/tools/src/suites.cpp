#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "locomo/cli/commands.hpp"

namespace locomo::cli {

namespace {

const Gait& require_gait(const Scenario& sc) {
  if (!sc.gait) throw ValidationError(sc.source, "gait", "the verify command needs a gait block");
  return *sc.gait;
}

IntegratorSettings boundary_only(IntegratorSettings s) {
  s.record_samples = false;
  return s;
}

SuiteResult make(Suite suite, double metric, double tolerance, std::string detail) {
  return {to_string(suite), metric <= tolerance, metric, tolerance, std::move(detail)};
}

double pose_gap(const Pose& a, const Pose& b) { return log(compose(inverse(a), b)).norm(); }

SuiteResult loop_closure(double tol, const Scenario& sc, const BuiltModel& m) {
  const Trajectory tr = integrate_gait(m.provider, require_gait(sc), boundary_only(sc.integrator));
  const NetDisplacement net = net_displacement(tr);
  double worst = net.total.norm();
  for (const Twist& t : net.per_cycle) worst = std::max(worst, t.norm());
  return make(Suite::LoopClosure, worst, tol,
              "largest |log g(T)| over " + std::to_string(net.per_cycle.size()) + " cycle(s)");
}

SuiteResult single_piece(double tol, const Scenario& sc, const BuiltModel& m) {
  const Trajectory tr = integrate_gait(m.provider, require_gait(sc), boundary_only(sc.integrator));
  const double metric = net_displacement(tr).total.norm();
  if (!tr.events.empty()) {
    return {to_string(Suite::SinglePiece), false, metric, tol,
            "gait crosses " + std::to_string(tr.events.size()) + " contact switch(es)"};
  }
  return make(Suite::SinglePiece, metric, tol, "net displacement norm, gait stays on one piece");
}

SuiteResult continuity(double tol, const Scenario& sc, const BuiltModel& m, std::optional<int> per_cycle) {
  const Trajectory tr = integrate_gait(m.provider, require_gait(sc), sc.integrator);
  const double bound = tr.max_twist_norm * sc.integrator.step;
  double ratio = 0.0;
  for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
    const double jump = pose_gap(tr.poses[k], tr.poses[k + 1]);
    ratio = std::max(ratio, bound > 0.0 ? jump / bound : (jump > 0.0 ? INFINITY : 0.0));
  }
  std::vector<int> counts(static_cast<std::size_t>(tr.cycles), 0);
  for (const EventRecord& e : tr.events) {
    const auto c = static_cast<std::size_t>(std::floor(e.time / tr.period));
    if (c < counts.size()) ++counts[c];
  }
  std::ostringstream detail;
  detail << "max increment / (C step) with C " << format_double(tr.max_twist_norm) << "; events per cycle";
  for (int c : counts) detail << ' ' << c;
  SuiteResult r = make(Suite::Continuity, ratio, tol, detail.str());
  if (per_cycle && std::any_of(counts.begin(), counts.end(), [&](int c) { return c != *per_cycle; })) {
    r.passed = false;
    r.detail += " (expected " + std::to_string(*per_cycle) + ")";
  }
  return r;
}

SuiteResult reversal(double tol, const Scenario& sc, const BuiltModel& m) {
  const Trajectory tr = integrate_gait(m.provider, retrace(require_gait(sc)), boundary_only(sc.integrator));
  return make(Suite::Reversal, net_displacement(tr).total.norm(), tol,
              "net displacement norm of the path traced out and back");
}

SuiteResult pacing(double tol, const Scenario& sc, const BuiltModel& m) {
  const Gait base = to_waypoints(require_gait(sc), 400);
  const double period = base.period();
  // Strictly increasing cubic retiming of [0, T] onto itself.
  const Gait warped = reparameterize(base, [period](double t) {
    const double u = t / period;
    return period * (u + 0.6 * u * (1 - u) * (0.5 - u));
  });
  const IntegratorSettings s = boundary_only(sc.integrator);
  const Twist a = net_displacement(integrate_gait(m.provider, base, s)).total;
  const Twist b = net_displacement(integrate_gait(m.provider, warped, s)).total;
  return make(Suite::Pacing, (a - b).norm(), tol, "net displacement change under a cubic time warp");
}

SuiteResult residual(double tol, const Scenario& sc, const BuiltModel& m, const VerifySpec& v) {
  std::mt19937_64 rng(sc.seed);
  std::uniform_real_distribution<double> unit(-v.shape_range, v.shape_range);
  const Eigen::Index d = m.provider.dim();
  double worst = 0.0;
  int singular = 0;
  for (int k = 0; k < v.samples; ++k) {
    Shape r(d);
    for (Eigen::Index i = 0; i < d; ++i) r[i] = unit(rng);
    const ConstraintSystem sys = m.provider.constraint_system(r, m.provider.select(r));
    try {
      worst = std::max(worst, constraint_residual(sys, linear_constraint_connection(sys)));
    } catch (const SingularConstraint&) {
      ++singular;
    }
  }
  std::string detail = "max |M A + N| over " + std::to_string(v.samples - singular) + " random shapes";
  if (singular) detail += ", " + std::to_string(singular) + " singular skipped";
  return make(Suite::Residual, worst, tol, detail);
}

SuiteResult stance(double tol, const Scenario& sc, const BuiltModel& m) {
  const LeggedModel& legs = *m.legs;
  const Trajectory tr = integrate_gait(m.provider, require_gait(sc), sc.integrator);
  auto world_foot = [&](std::size_t k, int foot) {
    return tr.poses[k].transform(foot_pose(legs, static_cast<std::size_t>(foot), tr.shapes[k]).position());
  };
  double worst = 0.0;
  std::size_t phase_start = 0;
  int phases = tr.size() ? 1 : 0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const bool switched = k > 0 && tr.contacts[k] != tr.contacts[k - 1];
    if (switched) {
      // The switch sample closes the old phase as well.
      for (int f = 0; f < legs.dim(); ++f) {
        if (tr.contacts[k - 1].contains(f)) worst = std::max(worst, (world_foot(phase_start, f) - world_foot(k, f)).norm());
      }
      phase_start = k;
      ++phases;
    }
    for (int f = 0; f < legs.dim(); ++f) {
      if (tr.contacts[k].contains(f)) worst = std::max(worst, (world_foot(phase_start, f) - world_foot(k, f)).norm());
    }
  }
  return make(Suite::Stance, worst, tol,
              "largest planted-foot drift over " + std::to_string(phases) + " stance phase(s)");
}

}  // namespace

SuiteResult run_suite(Suite suite, double tolerance, const Scenario& sc, const BuiltModel& model) {
  switch (suite) {
    case Suite::LoopClosure: return loop_closure(tolerance, sc, model);
    case Suite::SinglePiece: return single_piece(tolerance, sc, model);
    case Suite::Continuity:
      return continuity(tolerance, sc, model, sc.verify ? sc.verify->events_per_cycle : std::nullopt);
    case Suite::Reversal: return reversal(tolerance, sc, model);
    case Suite::Pacing: return pacing(tolerance, sc, model);
    case Suite::Residual: return residual(tolerance, sc, model, sc.verify ? *sc.verify : VerifySpec{});
    case Suite::Stance: return stance(tolerance, sc, model);
  }
  throw std::logic_error("unhandled suite");
}

}  // namespace locomo::cli

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <Eigen/Eigenvalues>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "locomo/analysis.hpp"
#include "locomo/cli/commands.hpp"
#include "locomo/connection.hpp"
#include "locomo/integrator.hpp"
#include "locomo/models.hpp"
#include "locomo/optimizer.hpp"
#include "test_support.hpp"

namespace {

using namespace locomo;
using testing::kPi;
using testing::Rng;
namespace fs = std::filesystem;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 3) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

IntegratorSettings Settings(double step, int cycles = 1, bool record = false) {
  IntegratorSettings s;
  s.step = step;
  s.cycles = cycles;
  s.record_samples = record;
  return s;
}

Twist Net(const ConnectionProvider& p, const Gait& g, double step) {
  return net_displacement(integrate_gait(p, g, Settings(step))).total;
}

Gait QuarterPhase() {
  return Gait::sinusoid(Eigen::Vector2d::Zero(), Eigen::Vector2d::Constant(0.5), Eigen::Vector2d(0, kPi / 2), 1.0);
}

double Increment(const Pose& a, const Pose& b) { return log(compose(inverse(a), b)).norm(); }

// 1 -----------------------------------------------------------------------
Verdict HolonomicLoopClosure() {
  Rng rng(7);
  const std::vector<double> steps{0.05, 0.02, 0.01, 0.005, 0.002};
  double worst = 0.0;
  double lo = INFINITY, hi = -INFINITY;
  for (const char* name : {"arm2", "arm3", "synthetic"}) {
    const PoseMap f = testbed_map(name);
    const auto p = ConnectionProvider::jacobian(f);
    for (int i = 0; i < 5; ++i) {
      const Gait gait = rng.fourier_gait(f.dim, 2, 0.6);
      worst = std::max(worst, Net(p, gait, 1e-3).norm());
      std::vector<double> errors;
      for (double h : steps) errors.push_back(Net(p, gait, h).norm());
      const double slope = testing::loglog_slope(steps, errors);
      lo = std::min(lo, slope);
      hi = std::max(hi, slope);
    }
  }
  const bool pass = worst <= 1e-8 && lo >= 3.7 && hi <= 4.3;
  return {pass, "worst |log g(T)| " + fmt(worst) + " (<= 1e-8) at step 1e-3; slopes in [" + fmt(lo) + ", " +
                    fmt(hi) + "] (4 +- 0.3) over 3 maps x 5 gaits"};
}

// 2 -----------------------------------------------------------------------
Verdict SinglePieceImmobility() {
  const LeggedModel model = crawler();
  const auto p = legged_provider(model);
  Rng rng(21);
  double worst = 0.0;
  for (int foot = 0; foot < 2; ++foot) {
    for (int i = 0; i < 5; ++i) {
      const double lead = foot == 0 ? 1.0 : -1.0;
      const Eigen::Vector2d offset(lead * rng.uniform(0.7, 1.0), -lead * rng.uniform(0.7, 1.0));
      const Eigen::Vector2d amp(rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3));
      const Eigen::Vector2d phase(rng.uniform(0, 2 * kPi), rng.uniform(0, 2 * kPi));
      const Gait g = Gait::sinusoid(offset, amp, phase, 1.0);
      for (int k = 0; k < 2000; ++k) {
        if (!(select_contacts(model, g.shape_at(k / 2000.0)) == ContactSet::single(foot))) {
          return {false, "test gait leaves its contact set"};
        }
      }
      worst = std::max(worst, Net(p, g, 1e-3).norm());
    }
  }
  const Twist moving = Net(p, QuarterPhase(), 1e-3);
  // Regression value archived from the first run at step 1e-3; the heading
  // change per cycle is exactly -sqrt(2) for this gait.
  const Twist archived{0.045649996999075938, -0.36135548812551116, -1.4142135623745002};
  const double drift = (moving - archived).norm();
  const double heading_gap = std::abs(moving.omega + std::sqrt(2.0));
  const bool pass = worst <= 1e-8 && moving.norm() > 0.01 && drift <= 1e-8 && heading_gap <= 1e-9;
  return {pass, "single-piece worst " + fmt(worst) + " (<= 1e-8) over 10 gaits; alternating |net| " +
                    fmt(moving.norm()) + " (> 0.01), regression gap " + fmt(drift) + ", heading gap " +
                    fmt(heading_gap)};
}

// 3 -----------------------------------------------------------------------
Verdict ContinuityAcrossSwitches() {
  const LeggedModel model = crawler();
  const auto p = legged_provider(model);
  const Gait gait = QuarterPhase();
  const double step = 1e-3;
  const Trajectory tr = integrate_gait(p, gait, Settings(step, 10, true));
  // C = max |A rdot| along the gait, sampled densely on the active piece and
  // merged with every stage evaluation the integrator made.
  double c = tr.max_twist_norm;
  for (int k = 0; k < 200000; ++k) {
    const GaitSample s = gait.evaluate(k / 200000.0);
    c = std::max(c, apply(p.evaluate(s.r).a, s.rdot).norm());
  }
  double ratio = 0.0;
  for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
    ratio = std::max(ratio, Increment(tr.poses[k], tr.poses[k + 1]) / (c * step));
  }
  std::vector<int> per_cycle(10, 0);
  for (const EventRecord& e : tr.events) ++per_cycle[static_cast<std::size_t>(std::floor(e.time))];
  const bool two_each = std::all_of(per_cycle.begin(), per_cycle.end(), [](int n) { return n == 2; });
  const bool pass = ratio <= 1.0 && tr.events.size() == 20 && two_each;
  return {pass, "largest increment / (C step) " + fmt(ratio, 8) + " (<= 1) with C " + fmt(c) + "; " +
                    std::to_string(tr.events.size()) + " events over 10 cycles (2 per cycle: " +
                    (two_each ? "yes" : "no") + ")"};
}

// 4 -----------------------------------------------------------------------
Verdict StanceFootStationary() {
  const LeggedModel model = crawler();
  const auto p = legged_provider(model);
  const Trajectory tr = integrate_gait(p, QuarterPhase(), Settings(1e-4, 2, true));
  // Foot i in the world: g * hip_i * Rot(direction_i r_i) * (length_i, 0).
  auto foot = [&](std::size_t k, int i) {
    const Leg& leg = model.legs[static_cast<std::size_t>(i)];
    const double a = leg.hip.theta + leg.direction * tr.shapes[k][i];
    const Eigen::Vector2d body = leg.hip.position() + leg.length * Eigen::Vector2d(std::cos(a), std::sin(a));
    const Pose& g = tr.poses[k];
    return Eigen::Vector2d(g.x + std::cos(g.theta) * body.x() - std::sin(g.theta) * body.y(),
                           g.y + std::sin(g.theta) * body.x() + std::cos(g.theta) * body.y());
  };
  double worst = 0.0;
  int phases = 1;
  std::size_t start = 0;
  for (std::size_t k = 1; k < tr.size(); ++k) {
    // The phase of sample k-1 runs up to and including sample k.
    for (int i = 0; i < 2; ++i) {
      if (tr.contacts[k - 1].contains(i)) worst = std::max(worst, (foot(k, i) - foot(start, i)).norm());
    }
    if (tr.contacts[k] != tr.contacts[k - 1]) {
      start = k;
      ++phases;
    }
  }
  return {worst <= 1e-8, "largest planted-foot drift " + fmt(worst) + " (<= 1e-8) over " +
                             std::to_string(phases) + " stance phases at step 1e-4"};
}

// 5 -----------------------------------------------------------------------
Verdict PathReversal() {
  Rng rng(5);
  const std::pair<const char*, ConnectionProvider> providers[] = {
      {"holonomic", ConnectionProvider::jacobian(testbed_map("synthetic"))},
      {"legged", legged_provider(crawler())},
      {"drag", drag_provider(purcell_swimmer())},
      {"slipping", slip_provider(slip_crawler(crawler(), {1, 2, 0.5}, {0.2, 0.4, 0.1}))},
  };
  std::vector<Gait> gaits = {QuarterPhase()};
  for (int i = 0; i < 2; ++i) gaits.push_back(rng.fourier_gait(2, 2, 0.6));
  double worst = 0.0;
  std::string detail;
  for (const auto& [name, p] : providers) {
    double w = 0.0;
    for (const Gait& g : gaits) w = std::max(w, Net(p, retrace(g), 1e-3).norm());
    worst = std::max(worst, w);
    detail += std::string(detail.empty() ? "" : ", ") + name + " " + fmt(w);
  }
  return {worst <= 1e-8, "retraced |net| " + detail + " (<= 1e-8)"};
}

// 6 -----------------------------------------------------------------------
Verdict PacingInvariance() {
  const Gait base = to_waypoints(QuarterPhase(), 400);
  const Gait warped = reparameterize(base, [](double t) { return t + 0.6 * t * (1 - t) * (0.5 - t); });
  const std::pair<const char*, ConnectionProvider> providers[] = {
      {"swimmer", drag_provider(purcell_swimmer())},
      {"crawler", legged_provider(crawler())},
  };
  double worst = 0.0;
  std::string detail;
  for (const auto& [name, p] : providers) {
    const double gap = (Net(p, warped, 1e-3) - Net(p, base, 1e-3)).norm();
    worst = std::max(worst, gap);
    detail += std::string(detail.empty() ? "" : ", ") + name + " " + fmt(gap);
  }
  return {worst <= 1e-7, "cubic-warp displacement change " + detail + " (<= 1e-7)"};
}

// 7 -----------------------------------------------------------------------
Verdict ConstraintResidual() {
  const std::pair<const char*, ConnectionProvider> providers[] = {
      {"swimmer", drag_provider(purcell_swimmer())},
      {"many-legged", many_legged_provider({purcell_swimmer(), 8})},
      {"slipping", slip_provider(slip_crawler(crawler(), {1, 2, 0.5}, {0.2, 0.4, 0.1}))},
  };
  Rng rng(77);
  double worst = 0.0;
  std::string detail;
  for (const auto& [name, p] : providers) {
    double w = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Shape r = rng.vector(2, -kPi / 2, kPi / 2);
      const ConstraintSystem sys = p.constraint_system(r, p.select(r));
      const ConnectionMatrix a = p.evaluate(r).a;
      w = std::max(w, (sys.m * a + sys.n).cwiseAbs().maxCoeff());
    }
    worst = std::max(worst, w);
    detail += std::string(detail.empty() ? "" : ", ") + name + " " + fmt(w);
  }
  return {worst <= 1e-10, "max |M A + N| over 100 shapes: " + detail + " (<= 1e-10)"};
}

// 8 -----------------------------------------------------------------------
Verdict SlipToStick() {
  const LeggedModel geometry = crawler();
  const ConnectionProvider pinned = legged_provider(geometry);
  const SlipCoefficients stance{1.0, 2.0, 0.5};
  const SlipCoefficients swing{0.2, 0.4, 0.1};
  Rng rng(8);
  bool monotone = true;
  double final_gap = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Shape r = rng.vector(2, -0.8, 0.8);
    const ContactSet c = select_contacts(geometry, r);
    const ConnectionMatrix target = pinned.evaluate_piece(r, c);
    double prev = INFINITY;
    for (double s : {1e1, 1e2, 1e3, 1e4, 1e5}) {
      const SlipModel model = slip_crawler(geometry, stance.scaled(s), swing);
      const double gap = (linear_constraint_connection(build_slip_constraints(model, c, r)) - target).norm();
      monotone = monotone && gap <= prev;
      prev = gap;
    }
    final_gap = std::max(final_gap, prev);
  }
  return {monotone && final_gap <= 1e-3, std::string("gap monotone over s = 1e1..1e5: ") +
                                             (monotone ? "yes" : "no") + "; largest gap at s = 1e5 " +
                                             fmt(final_gap) + " (<= 1e-3) over 20 shapes"};
}

// 9 -----------------------------------------------------------------------
Verdict ManyLeggedLimit() {
  const DragModel swimmer = purcell_swimmer();
  Rng rng(9);
  auto relative = [](const ConstraintSystem& a, const ConstraintSystem& b) {
    Eigen::MatrixXd ab(3, 3 + a.n.cols()), bb(3, 3 + b.n.cols());
    ab << a.m, a.n;
    bb << b.m, b.n;
    return (ab - bb).norm() / bb.norm();
  };
  double at64 = 0.0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Shape r = rng.vector(2, -1.5, 1.5);
    const ConstraintSystem drag = build_drag_constraints(swimmer, r);
    double prev = INFINITY;
    for (int m : {2, 4, 8, 16, 32, 64}) {
      const double gap = relative(many_legged_drag_surrogate({swimmer, m}, r), drag);
      if (m > 2) worst_ratio = std::max(worst_ratio, gap / prev);
      prev = gap;
    }
    at64 = std::max(at64, prev);
  }
  // Independent check on one straight link: exact drag is diag(-c_t L, -c_n L, -c_n L^3 / 12).
  const DragModel link{ChainModel{{1.0}}, 1.0, 2.0, 8};
  const Eigen::Matrix3d exact = Eigen::Vector3d(-1.0, -2.0, -2.0 / 12).asDiagonal();
  const double link_gap = (many_legged_drag_surrogate({link, 64}, Shape(0)).m - exact).norm() / exact.norm();
  const bool pass = at64 <= 1e-3 && worst_ratio <= 0.5 && link_gap <= 1e-3;
  return {pass, "relative gap at m = 64 " + fmt(at64) + " (<= 1e-3), single link " + fmt(link_gap) +
                    "; worst gap ratio on doubling m " + fmt(worst_ratio) + " (<= 0.5)"};
}

// 10 ----------------------------------------------------------------------
Verdict DragDissipativity() {
  const DragModel swimmer = purcell_swimmer();
  Rng rng(10);
  double min_eig = INFINITY;
  for (int i = 0; i < 100; ++i) {
    const Shape r = rng.vector(2, -kPi, kPi);
    const Eigen::Matrix3d m = build_drag_constraints(swimmer, r).m;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(-0.5 * (m + m.transpose()));
    min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
  }
  return {min_eig > 0.0, "smallest eigenvalue of -M over 100 shapes " + fmt(min_eig) + " (> 0)"};
}

// 11 ----------------------------------------------------------------------
Verdict OptimizerVsGrid() {
  const auto swimmer = drag_provider(purcell_swimmer());
  GaitFamily family;
  family.base.period = 1.0;
  family.base.mean = Eigen::Vector2d::Zero();
  family.base.cos_coeffs = Eigen::MatrixXd::Zero(2, 1);
  family.base.sin_coeffs = Eigen::MatrixXd::Zero(2, 1);
  family.parameters = {
      {"amplitude", FamilyParameter::Kind::Amplitude, 1, {0, 1}, 0.2, 1.5},
      {"phase", FamilyParameter::Kind::Phase, 1, {1}, 0.0, kPi},
  };
  const DisplacementObjective x{};
  const IntegratorSettings integ = Settings(1e-2);
  double grid = -INFINITY;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const Eigen::Vector2d q(0.2 + 1.3 * i / 20.0, kPi * j / 20.0);
      grid = std::max(grid, objective_displacement(swimmer, family.instantiate(q), x, integ));
    }
  }
  OptimizerSettings s;
  s.budget = 500;
  s.seeds = 4;
  const OptimizationReport rep = optimize(swimmer, family, x, integ, s);
  const bool pass = rep.evaluations <= 500 && rep.best_objective >= grid - 1e-6;
  return {pass, "optimizer best " + fmt(rep.best_objective, 10) + " after " + std::to_string(rep.evaluations) +
                    " evaluations vs 21x21 grid best " + fmt(grid, 10) + " (>= grid - 1e-6)"};
}

// 12 ----------------------------------------------------------------------
std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict CliDeterminism() {
  const std::string dir = LOCOMO_SCENARIO_DIR;
  struct Case {
    const char* command;
    const char* scenario;
    std::vector<const char*> files;
  };
  const Case cases[] = {
      {"simulate", "crawler_alternating.yaml", {locomo::cli::kTrajectoryFile, locomo::cli::kSummaryFile}},
      {"sweep", "swimmer_sweep.yaml", {locomo::cli::kFieldFile}},
      {"optimize", "swimmer_optimize.yaml", {locomo::cli::kReportFile}},
      {"verify", "holonomic_loop.yaml", {locomo::cli::kVerifyFile}},
  };
  const fs::path root = fs::temp_directory_path() / ("locomo_acceptance_" + std::to_string(::getpid()));
  int compared = 0;
  std::size_t bytes = 0;
  for (const Case& c : cases) {
    std::string first[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path out = root / (std::string(c.command) + std::to_string(run));
      fs::remove_all(out);
      const std::string cmd = std::string(LOCOMO_CLI_PATH) + " " + c.command + " " + dir + "/" + c.scenario +
                              " --seed 17 --out " + out.string() + " > /dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        return {false, std::string(c.command) + " run exited with a failure status"};
      }
    }
    for (const char* f : c.files) {
      const std::string a = Slurp(root / (std::string(c.command) + "0") / f);
      const std::string b = Slurp(root / (std::string(c.command) + "1") / f);
      if (a.empty() || a != b) return {false, std::string(c.command) + " " + f + " differs between runs"};
      ++compared;
      bytes += a.size();
    }
  }
  fs::remove_all(root);
  return {true, std::to_string(compared) + " output files (" + std::to_string(bytes) +
                    " bytes) byte-identical across two runs of simulate, sweep, optimize and verify"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"holonomic loop closure", HolonomicLoopClosure},
      {"single-piece immobility", SinglePieceImmobility},
      {"continuity across switches", ContinuityAcrossSwitches},
      {"stance-foot stationarity", StanceFootStationary},
      {"path-reversal cancellation", PathReversal},
      {"pacing invariance", PacingInvariance},
      {"constraint-solve residual", ConstraintResidual},
      {"slip-to-stick convergence", SlipToStick},
      {"many-legged limit", ManyLeggedLimit},
      {"drag dissipativity", DragDissipativity},
      {"optimizer vs grid oracle", OptimizerVsGrid},
      {"CLI determinism", CliDeterminism},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += v.pass ? 0 : 1;
    std::printf("%s %2d %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", index, name, v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", 12 - failures, 12);
  return failures;
}

#include "locomo/cli/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace locomo::cli {

const char* to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Sweep: return "sweep";
    case Command::Optimize: return "optimize";
    case Command::Verify: return "verify";
  }
  return "?";
}

namespace {

Metadata common_metadata(Command c, const Scenario& sc) {
  Metadata m;
  m["command"] = to_string(c);
  m["scenario_hash"] = "fnv1a64:" + hex_hash(sc.hash);
  m["model"] = to_string(sc.model.type);
  m["seed"] = std::to_string(sc.seed);
  if (!sc.name.empty()) m["name"] = sc.name;
  return m;
}

// Writes through a buffer so a failed run never leaves a half-written file.
template <typename Writer>
std::string write_file(const Scenario& sc, const char* name, Writer&& writer) {
  std::ostringstream buf;
  writer(buf);
  const std::filesystem::path dir(sc.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path path = dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << buf.str();
  if (!out) throw ValidationError(path.string(), "output", "cannot write file");
  return path.string();
}

const Gait& require_gait(const Scenario& sc, Command c) {
  if (!sc.gait) {
    throw ValidationError(sc.source, "gait", std::string("the ") + to_string(c) + " command needs a gait block");
  }
  return *sc.gait;
}

void check_finite(const Trajectory& tr) {
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const Pose& g = tr.poses[k];
    if (!std::isfinite(g.x) || !std::isfinite(g.y) || !std::isfinite(g.theta)) {
      throw NumericalAbort("pose became non-finite at t=" + format_double(tr.times[k]));
    }
  }
}

std::string twist_text(const Twist& t) {
  return "(" + format_double(t.vx) + ", " + format_double(t.vy) + ", " + format_double(t.omega) + ")";
}

int simulate(const Scenario& sc, std::ostream& out) {
  const BuiltModel m = build_model(sc.model);
  const Trajectory tr = integrate_gait(m.provider, require_gait(sc, Command::Simulate), sc.integrator);
  check_finite(tr);
  SimulationSummary s;
  s.meta = common_metadata(Command::Simulate, sc);
  s.net = net_displacement(tr);
  s.events = tr.events;
  s.warnings = tr.warnings;
  s.samples = tr.size();
  s.max_twist_norm = tr.max_twist_norm;
  const Metadata meta = s.meta;
  const std::string traj_path =
      write_file(sc, kTrajectoryFile, [&](std::ostream& o) { write_trajectory_csv(o, tr, meta); });
  const std::string summary_path =
      write_file(sc, kSummaryFile, [&](std::ostream& o) { write_summary_json(o, s); });
  for (const std::string& w : tr.warnings) out << "warning: " << w << '\n';
  out << "simulate: " << tr.size() << " samples, " << tr.events.size() << " events over "
      << tr.cycles << " cycle(s)\n"
      << "net displacement (vx, vy, omega): " << twist_text(s.net.total) << '\n'
      << "wrote " << traj_path << '\n'
      << "wrote " << summary_path << '\n';
  return kExitOk;
}

int sweep(const Scenario& sc, std::ostream& out) {
  if (!sc.sweep) throw ValidationError(sc.source, "sweep", "the sweep command needs a sweep block");
  const BuiltModel m = build_model(sc.model);
  const FieldGrid field = sample_field(m.provider, sc.sweep->grid);
  std::optional<CurvatureField> curv;
  if (sc.sweep->curvature) curv = curvature(field);
  const Metadata meta = common_metadata(Command::Sweep, sc);
  const std::string path = write_file(
      sc, kFieldFile, [&](std::ostream& o) { write_field_csv(o, field, curv ? &*curv : nullptr, meta); });
  std::size_t singular = 0;
  for (const FieldNode& n : field.nodes) singular += n.singular ? 1 : 0;
  out << "sweep: " << field.nodes.size() << " nodes, " << singular << " singular\n"
      << "wrote " << path << '\n';
  return kExitOk;
}

int optimize_cmd(const Scenario& sc, std::ostream& out) {
  if (!sc.optimize) throw ValidationError(sc.source, "optimize", "the optimize command needs an optimize block");
  const BuiltModel m = build_model(sc.model);
  OptimizerSettings settings = sc.optimize->settings;
  settings.seed = sc.seed;
  IntegratorSettings integ = sc.integrator;
  integ.record_samples = false;
  ReportFile r;
  r.meta = common_metadata(Command::Optimize, sc);
  r.meta["objective"] = sc.optimize->objective.to_string();
  for (const FamilyParameter& p : sc.optimize->family.parameters) r.parameter_names.push_back(p.name);
  r.report = optimize(m.provider, sc.optimize->family, sc.optimize->objective, integ, settings);
  const std::string path = write_file(sc, kReportFile, [&](std::ostream& o) { write_report_json(o, r); });
  out << "optimize: best objective " << format_double(r.report.best_objective) << " after "
      << r.report.evaluations << " evaluations (" << r.report.termination << ")\n";
  for (std::size_t i = 0; i < r.parameter_names.size(); ++i) {
    out << "  " << r.parameter_names[i] << " = "
        << format_double(r.report.best_params[static_cast<Eigen::Index>(i)]) << '\n';
  }
  out << "wrote " << path << '\n';
  return kExitOk;
}

int verify(const Scenario& sc, std::ostream& out) {
  if (!sc.verify) throw ValidationError(sc.source, "verify", "the verify command needs a verify block");
  require_gait(sc, Command::Verify);
  const BuiltModel m = build_model(sc.model);
  std::vector<SuiteResult> results;
  for (std::size_t i = 0; i < sc.verify->suites.size(); ++i) {
    results.push_back(run_suite(sc.verify->suites[i], sc.verify->tolerances[i], sc, m));
  }
  const Metadata meta = common_metadata(Command::Verify, sc);
  const std::string path = write_file(sc, kVerifyFile, [&](std::ostream& o) { write_verify_csv(o, results, meta); });
  bool ok = true;
  for (const SuiteResult& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.suite << ": " << format_double(r.metric)
        << " (tolerance " << format_double(r.tolerance) << ") " << r.detail << '\n';
    ok = ok && r.passed;
  }
  out << "wrote " << path << '\n';
  return ok ? kExitOk : kExitInvariantFailure;
}

}  // namespace

int run_command(Command command, const std::string& scenario_path, const Overrides& overrides,
                std::ostream& out, std::ostream& err) {
  try {
    Scenario sc = load_scenario(scenario_path);
    apply_overrides(sc, overrides);
    switch (command) {
      case Command::Simulate: return simulate(sc, out);
      case Command::Sweep: return sweep(sc, out);
      case Command::Optimize: return optimize_cmd(sc, out);
      case Command::Verify: return verify(sc, out);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidationError;
  } catch (const SingularConstraint& e) {
    err << "numerical abort: singular constraint: " << e.what() << '\n';
    return kExitNumericalAbort;
  } catch (const DegenerateStance& e) {
    err << "numerical abort: degenerate stance: " << e.what() << '\n';
    return kExitNumericalAbort;
  } catch (const NumericalAbort& e) {
    err << "numerical abort: " << e.what() << '\n';
    return kExitNumericalAbort;
  } catch (const std::invalid_argument& e) {
    err << "error: " << scenario_path << ": " << e.what() << '\n';
    return kExitValidationError;
  } catch (const std::exception& e) {
    err << "numerical abort: " << e.what() << '\n';
    return kExitNumericalAbort;
  }
  return kExitValidationError;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geometric locomotion engine: simulate, sweep, optimize and verify scenarios.", "locomo"};
  app.require_subcommand(1);
  std::string scenario;
  Overrides o;
  std::string out_dir;
  double step = 0;
  int cycles = 0;
  std::uint64_t seed = 0;
  const Command commands[] = {Command::Simulate, Command::Sweep, Command::Optimize, Command::Verify};
  const char* help[] = {"Integrate the gait and write the trajectory and a summary",
                        "Sample the connection on a grid and write the field",
                        "Search the gait family and write the report",
                        "Run the selected property suites"};
  std::vector<CLI::App*> subs;
  for (int i = 0; i < 4; ++i) {
    CLI::App* sub = app.add_subcommand(to_string(commands[i]), help[i]);
    sub->add_option("scenario", scenario, "Scenario file")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    sub->add_option("--step", step, "Integrator step (overrides integrator.step)");
    sub->add_option("--cycles", cycles, "Gait cycles (overrides integrator.cycles)");
    sub->add_option("--seed", seed, "Random seed (overrides seed)");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidationError;
  }
  for (int i = 0; i < 4; ++i) {
    if (!subs[i]->parsed()) continue;
    if (subs[i]->count("--out")) o.out = out_dir;
    if (subs[i]->count("--step")) o.step = step;
    if (subs[i]->count("--cycles")) o.cycles = cycles;
    if (subs[i]->count("--seed")) o.seed = seed;
    return run_command(commands[i], scenario, o, out, err);
  }
  return kExitValidationError;
}

}  // namespace locomo::cli

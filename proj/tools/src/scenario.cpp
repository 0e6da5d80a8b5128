#include "locomo/cli/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace locomo::cli {

ValidationError::ValidationError(const std::string& where, const std::string& field,
                                 const std::string& reason)
    : std::runtime_error(where + ": " + field + ": " + reason), field_(field) {}

const char* to_string(ModelSpec::Type type) {
  switch (type) {
    case ModelSpec::Type::Jacobian: return "jacobian";
    case ModelSpec::Type::Swimmer: return "swimmer";
    case ModelSpec::Type::Crawler: return "crawler";
    case ModelSpec::Type::Slip: return "slip";
    case ModelSpec::Type::ManyLegged: return "many_legged";
    case ModelSpec::Type::Constant: return "constant";
  }
  return "?";
}

namespace {

LeggedModel legged_geometry(const ModelSpec& spec) {
  LeggedModel legs = crawler(spec.half_width, spec.leg_length);
  if (!spec.selector_offsets.empty()) legs.selector_offsets = spec.selector_offsets;
  legs.validate();
  return legs;
}

DragModel drag_geometry(const ModelSpec& spec) {
  return purcell_swimmer(spec.link_length, spec.c_t, spec.c_n, spec.quadrature);
}

}  // namespace

BuiltModel build_model(const ModelSpec& spec) {
  switch (spec.type) {
    case ModelSpec::Type::Jacobian: {
      const PoseMap f = spec.map == "arm" ? arm_map(spec.arm_lengths) : testbed_map(spec.map);
      return {ConnectionProvider::jacobian(f, spec.h), std::nullopt, false};
    }
    case ModelSpec::Type::Swimmer:
      return {drag_provider(drag_geometry(spec)), std::nullopt, false};
    case ModelSpec::Type::ManyLegged:
      return {many_legged_provider({drag_geometry(spec), spec.feet_per_link}), std::nullopt, false};
    case ModelSpec::Type::Crawler: {
      const LeggedModel legs = legged_geometry(spec);
      return {legged_provider(legs, spec.h), legs, true};
    }
    case ModelSpec::Type::Slip: {
      const LeggedModel legs = legged_geometry(spec);
      return {slip_provider(slip_crawler(legs, spec.stance.scaled(spec.slip_scale), spec.swing)),
              legs, false};
    }
    case ModelSpec::Type::Constant:
      return {ConnectionProvider::constant(spec.constant), std::nullopt, false};
  }
  throw std::logic_error("unhandled model type");
}

const char* to_string(Suite suite) {
  switch (suite) {
    case Suite::LoopClosure: return "loop_closure";
    case Suite::SinglePiece: return "single_piece";
    case Suite::Continuity: return "continuity";
    case Suite::Reversal: return "reversal";
    case Suite::Pacing: return "pacing";
    case Suite::Residual: return "residual";
    case Suite::Stance: return "stance";
  }
  return "?";
}

const std::vector<Suite>& all_suites() {
  static const std::vector<Suite> suites = {Suite::LoopClosure, Suite::SinglePiece,
                                            Suite::Continuity,  Suite::Reversal,
                                            Suite::Pacing,      Suite::Residual,
                                            Suite::Stance};
  return suites;
}

Suite parse_suite(const std::string& text) {
  for (Suite s : all_suites()) {
    if (text == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown suite '" + text + "'");
}

double default_tolerance(Suite suite) {
  switch (suite) {
    case Suite::LoopClosure: return 1e-8;
    case Suite::SinglePiece: return 1e-8;
    case Suite::Continuity: return 1.0;  // ratio to the Lipschitz bound
    case Suite::Reversal: return 1e-8;
    case Suite::Pacing: return 1e-7;
    case Suite::Residual: return 1e-10;
    case Suite::Stance: return 1e-8;
  }
  return 0.0;
}

std::string Overrides::canonical() const {
  std::ostringstream s;
  char buf[32];
  if (step) {
    std::snprintf(buf, sizeof buf, "%.17g", *step);
    s << "step=" << buf << ';';
  }
  if (cycles) s << "cycles=" << *cycles << ';';
  if (seed) s << "seed=" << *seed << ';';
  return s.str();
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_hash(std::uint64_t hash) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

namespace {

// Typed access to one YAML mapping with strict key checking and positioned
// diagnostics.
class Block {
 public:
  Block(const YAML::Node& node, std::string path, const std::string& source)
      : node_(node), path_(std::move(path)), source_(source) {
    if (!node_.IsMap()) fail(node_, path_, "expected a block of key: value entries");
  }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        std::string known;
        for (const auto& k : allowed) known += (known.empty() ? "" : ", ") + k;
        fail(kv.first, field(key), "unknown key (expected one of: " + known + ")");
      }
    }
  }

  bool has(const char* key) const { return static_cast<bool>(node_[key]); }
  YAML::Node get(const char* key) const { return node_[key]; }
  const YAML::Node& node() const { return node_; }
  const std::string& path() const { return path_; }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::string& source() const { return source_; }

  YAML::Node require(const char* key) const {
    if (!has(key)) fail(node_, field(key), "missing required key");
    return node_[key];
  }

  Block child(const char* key) const { return Block(require(key), field(key), source_); }

  std::string text(const char* key) const { return scalar_text(require(key), field(key)); }
  std::string text(const char* key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  double number(const char* key) const { return to_number(require(key), field(key)); }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }
  double positive(const char* key, double fallback) const {
    const double v = number(key, fallback);
    if (!(v > 0.0)) fail(get(key), field(key), "must be positive");
    return v;
  }

  long long integer(const char* key, long long lo, long long hi) const {
    return to_integer(require(key), field(key), lo, hi);
  }
  long long integer(const char* key, long long fallback, long long lo, long long hi) const {
    return has(key) ? integer(key, lo, hi) : fallback;
  }

  bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string t = scalar_text(get(key), field(key));
    if (t == "true") return true;
    if (t == "false") return false;
    fail(get(key), field(key), "expected true or false");
  }

  std::vector<double> numbers(const char* key) const {
    const YAML::Node n = require(key);
    if (!n.IsSequence()) fail(n, field(key), "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
      out.push_back(to_number(n[i], field(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  Eigen::VectorXd vector(const char* key) const {
    const std::vector<double> v = numbers(key);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  /// List of equally long number lists, one per row.
  Eigen::MatrixXd matrix(const char* key) const {
    const YAML::Node n = require(key);
    if (!n.IsSequence() || n.size() == 0) fail(n, field(key), "expected a list of rows");
    Eigen::MatrixXd m;
    for (std::size_t i = 0; i < n.size(); ++i) {
      const std::string f = field(key) + "[" + std::to_string(i) + "]";
      if (!n[i].IsSequence()) fail(n[i], f, "expected a list of numbers");
      if (i == 0) m.resize(static_cast<Eigen::Index>(n.size()), static_cast<Eigen::Index>(n[0].size()));
      if (static_cast<Eigen::Index>(n[i].size()) != m.cols()) fail(n[i], f, "rows differ in length");
      for (std::size_t j = 0; j < n[i].size(); ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            to_number(n[i][j], f + "[" + std::to_string(j) + "]");
      }
    }
    return m;
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& field, const std::string& why) const {
    throw ValidationError(where(at), field, why);
  }

  std::string where(const YAML::Node& at) const {
    const YAML::Mark m = at.Mark();
    if (m.is_null()) return source_;
    return source_ + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
  }

 private:
  std::string scalar_text(const YAML::Node& n, const std::string& f) const {
    if (!n.IsScalar()) fail(n, f, "expected a single value");
    return n.Scalar();
  }

  double to_number(const YAML::Node& n, const std::string& f) const {
    const std::string t = scalar_text(n, f);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size()) fail(n, f, "expected a number, got '" + t + "'");
    if (!std::isfinite(v)) fail(n, f, "must be finite");
    return v;
  }

  long long to_integer(const YAML::Node& n, const std::string& f, long long lo, long long hi) const {
    const std::string t = scalar_text(n, f);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno != 0) {
      fail(n, f, "expected an integer, got '" + t + "'");
    }
    if (v < lo || v > hi) {
      fail(n, f, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
  }

  YAML::Node node_;
  std::string path_;
  const std::string& source_;
};

constexpr long long kMaxInt = std::numeric_limits<int>::max();

SlipCoefficients parse_slip(const Block& b) {
  b.allow({"k_t", "k_n", "k_omega"});
  SlipCoefficients k;
  k.k_t = b.number("k_t");
  k.k_n = b.number("k_n");
  k.k_omega = b.number("k_omega");
  return k;
}

ModelSpec parse_model(const Block& b) {
  ModelSpec m;
  const std::string type = b.text("type");
  if (type == "jacobian") {
    m.type = ModelSpec::Type::Jacobian;
    b.allow({"type", "map", "lengths", "h"});
    m.map = b.text("map", "synthetic");
    if (m.map == "arm") {
      m.arm_lengths = b.numbers("lengths");
    } else if (m.map != "synthetic" && m.map != "arm2" && m.map != "arm3") {
      b.fail(b.get("map"), b.field("map"), "expected synthetic, arm2, arm3 or arm");
    } else if (b.has("lengths")) {
      b.fail(b.get("lengths"), b.field("lengths"), "only used with map: arm");
    }
    m.h = b.positive("h", kDefaultJacobianStep);
  } else if (type == "swimmer" || type == "many_legged") {
    const bool many = type == "many_legged";
    m.type = many ? ModelSpec::Type::ManyLegged : ModelSpec::Type::Swimmer;
    if (many) {
      b.allow({"type", "link_length", "c_t", "c_n", "quadrature", "feet_per_link"});
      m.feet_per_link = static_cast<int>(b.integer("feet_per_link", 8, 2, 1 << 20));
    } else {
      b.allow({"type", "link_length", "c_t", "c_n", "quadrature"});
    }
    m.link_length = b.positive("link_length", 1.0);
    m.c_t = b.positive("c_t", 1.0);
    m.c_n = b.positive("c_n", 2.0);
    m.quadrature = static_cast<int>(b.integer("quadrature", 8, 1, 64));
  } else if (type == "crawler" || type == "slip") {
    const bool slip = type == "slip";
    m.type = slip ? ModelSpec::Type::Slip : ModelSpec::Type::Crawler;
    if (slip) {
      b.allow({"type", "half_width", "leg_length", "selector_offsets", "stance", "swing", "scale"});
      if (b.has("stance")) m.stance = parse_slip(b.child("stance"));
      if (b.has("swing")) m.swing = parse_slip(b.child("swing"));
      m.slip_scale = b.positive("scale", 1.0);
    } else {
      b.allow({"type", "half_width", "leg_length", "selector_offsets", "h"});
      m.h = b.positive("h", kDefaultJacobianStep);
    }
    m.half_width = b.positive("half_width", 0.5);
    m.leg_length = b.positive("leg_length", 1.0);
    if (b.has("selector_offsets")) m.selector_offsets = b.numbers("selector_offsets");
  } else if (type == "constant") {
    m.type = ModelSpec::Type::Constant;
    b.allow({"type", "matrix"});
    const Eigen::MatrixXd a = b.matrix("matrix");
    if (a.rows() != 3) b.fail(b.get("matrix"), b.field("matrix"), "needs exactly 3 rows (vx, vy, omega)");
    m.constant = a;
  } else {
    b.fail(b.get("type"), b.field("type"),
           "unknown model '" + type + "' (expected jacobian, swimmer, crawler, slip, many_legged or constant)");
  }
  return m;
}

Gait parse_gait(const Block& b) {
  const std::string type = b.text("type");
  try {
    if (type == "sinusoid") {
      b.allow({"type", "period", "offset", "amplitude", "phase"});
      const Eigen::VectorXd amplitude = b.vector("amplitude");
      const Eigen::VectorXd offset =
          b.has("offset") ? b.vector("offset") : Eigen::VectorXd::Zero(amplitude.size());
      const Eigen::VectorXd phase =
          b.has("phase") ? b.vector("phase") : Eigen::VectorXd::Zero(amplitude.size());
      return Gait::sinusoid(offset, amplitude, phase, b.number("period", 1.0));
    }
    if (type == "fourier") {
      b.allow({"type", "period", "mean", "cos", "sin"});
      FourierGait g;
      g.period = b.number("period", 1.0);
      g.mean = b.vector("mean");
      if (!b.has("cos") && !b.has("sin")) b.fail(b.node(), b.field("cos"), "need cos or sin coefficients");
      if (b.has("cos")) g.cos_coeffs = b.matrix("cos");
      if (b.has("sin")) g.sin_coeffs = b.matrix("sin");
      if (!b.has("cos")) g.cos_coeffs = Eigen::MatrixXd::Zero(g.sin_coeffs.rows(), g.sin_coeffs.cols());
      if (!b.has("sin")) g.sin_coeffs = Eigen::MatrixXd::Zero(g.cos_coeffs.rows(), g.cos_coeffs.cols());
      return Gait(g);
    }
    if (type == "waypoints") {
      b.allow({"type", "period", "points", "times"});
      const Eigen::MatrixXd pts = b.matrix("points");
      std::vector<Shape> points;
      for (Eigen::Index i = 0; i < pts.rows(); ++i) points.push_back(pts.row(i).transpose());
      const double period = b.number("period", 1.0);
      if (b.has("times")) return Gait::waypoints(points, b.numbers("times"), period);
      return Gait::waypoints(points, period);
    }
  } catch (const std::invalid_argument& e) {
    b.fail(b.node(), b.path(), e.what());
  }
  b.fail(b.get("type"), b.field("type"),
         "unknown gait '" + type + "' (expected sinusoid, fourier or waypoints)");
}

IntegratorSettings parse_integrator(const Block& b) {
  b.allow({"step", "event_tol", "cycles", "record_samples"});
  IntegratorSettings s;
  s.step = b.positive("step", s.step);
  s.event_tol = b.positive("event_tol", s.event_tol);
  s.cycles = static_cast<int>(b.integer("cycles", 1, 1, kMaxInt));
  s.record_samples = b.flag("record_samples", true);
  return s;
}

GridAxis parse_axis(const Block& b) {
  b.allow({"lo", "hi", "count"});
  GridAxis a;
  a.lo = b.number("lo");
  a.hi = b.number("hi");
  a.count = static_cast<int>(b.integer("count", 2, 1 << 16));
  if (!(a.hi > a.lo)) b.fail(b.get("hi"), b.field("hi"), "must exceed lo");
  return a;
}

SweepSpec parse_sweep(const Block& b, Eigen::Index dim) {
  b.allow({"axis1", "axis2", "coordinates", "base", "curvature"});
  SweepSpec s;
  s.grid.axis1 = parse_axis(b.child("axis1"));
  s.grid.axis2 = parse_axis(b.child("axis2"));
  if (b.has("coordinates")) {
    const std::vector<double> c = b.numbers("coordinates");
    if (c.size() != 2) b.fail(b.get("coordinates"), b.field("coordinates"), "expected two coordinates");
    for (int k = 0; k < 2; ++k) {
      if (c[k] != std::floor(c[k]) || c[k] < 1 || c[k] > static_cast<double>(dim)) {
        b.fail(b.get("coordinates"), b.field("coordinates"),
               "coordinates are 1-based indices up to " + std::to_string(dim));
      }
    }
    s.grid.coord1 = static_cast<Eigen::Index>(c[0]) - 1;
    s.grid.coord2 = static_cast<Eigen::Index>(c[1]) - 1;
    if (s.grid.coord1 == s.grid.coord2) {
      b.fail(b.get("coordinates"), b.field("coordinates"), "coordinates must differ");
    }
  } else if (dim < 2) {
    b.fail(b.node(), b.field("coordinates"), "the model has fewer than two shape coordinates");
  }
  if (b.has("base")) {
    s.grid.base = b.vector("base");
    if (s.grid.base.size() != dim) {
      b.fail(b.get("base"), b.field("base"), "needs one value per shape coordinate (" + std::to_string(dim) + ")");
    }
  } else {
    s.grid.base = Eigen::VectorXd::Zero(dim);
  }
  s.curvature = b.flag("curvature", true);
  if (s.curvature && (s.grid.axis1.count < 3 || s.grid.axis2.count < 3)) {
    b.fail(b.node(), b.field("curvature"), "curvature needs at least 3 nodes per axis");
  }
  return s;
}

FamilyParameter parse_parameter(const Block& b, Eigen::Index dim) {
  b.allow({"name", "kind", "harmonic", "coordinates", "lower", "upper"});
  FamilyParameter p;
  const std::string kind = b.text("kind");
  if (kind == "mean") {
    p.kind = FamilyParameter::Kind::Mean;
  } else if (kind == "cos") {
    p.kind = FamilyParameter::Kind::Cos;
  } else if (kind == "sin") {
    p.kind = FamilyParameter::Kind::Sin;
  } else if (kind == "amplitude") {
    p.kind = FamilyParameter::Kind::Amplitude;
  } else if (kind == "phase") {
    p.kind = FamilyParameter::Kind::Phase;
  } else {
    b.fail(b.get("kind"), b.field("kind"), "expected mean, cos, sin, amplitude or phase");
  }
  p.name = b.text("name", kind);
  p.harmonic = static_cast<int>(b.integer("harmonic", 1, 1, 1024));
  for (double c : b.numbers("coordinates")) {
    if (c != std::floor(c) || c < 1 || c > static_cast<double>(dim)) {
      b.fail(b.get("coordinates"), b.field("coordinates"),
             "coordinates are 1-based indices up to " + std::to_string(dim));
    }
    p.coordinates.push_back(static_cast<int>(c) - 1);
  }
  p.lower = b.number("lower");
  p.upper = b.number("upper");
  if (!(p.upper > p.lower)) b.fail(b.get("upper"), b.field("upper"), "must exceed lower");
  return p;
}

OptimizeSpec parse_optimize(const Block& b, Eigen::Index dim) {
  b.allow({"objective", "budget", "seeds", "initial_step", "ftol", "xtol", "threads", "family"});
  OptimizeSpec o;
  const std::string objective = b.text("objective", "x");
  try {
    o.objective = DisplacementObjective::parse(objective);
  } catch (const std::invalid_argument&) {
    b.fail(b.get("objective"), b.field("objective"),
           "expected x, -x, y, -y, theta, -theta or planar");
  }
  o.settings.budget = static_cast<int>(b.integer("budget", 500, 1, kMaxInt));
  o.settings.seeds = static_cast<int>(b.integer("seeds", 4, 1, 1024));
  o.settings.initial_step = b.positive("initial_step", 0.1);
  o.settings.ftol = b.positive("ftol", 1e-12);
  o.settings.xtol = b.positive("xtol", 1e-9);
  o.settings.threads = static_cast<int>(b.integer("threads", 1, 1, 256));

  const Block family = b.child("family");
  family.allow({"base", "parameters"});
  const Block base = family.child("base");
  const Gait g = parse_gait(base);
  if (!g.is_fourier()) base.fail(base.get("type"), base.field("type"), "family base must be a sinusoid or fourier gait");
  if (g.dim() != dim) {
    base.fail(base.node(), base.field("type"),
              "gait has " + std::to_string(g.dim()) + " coordinates, model has " + std::to_string(dim));
  }
  o.family.base = *g.fourier();
  const YAML::Node params = family.require("parameters");
  if (!params.IsSequence() || params.size() == 0) {
    family.fail(params, family.field("parameters"), "expected a non-empty list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    o.family.parameters.push_back(
        parse_parameter(Block(params[i], family.field("parameters") + "[" + std::to_string(i) + "]",
                              family.source()),
                        dim));
  }
  try {
    o.family.validate();
  } catch (const std::invalid_argument& e) {
    family.fail(params, family.field("parameters"), e.what());
  }
  return o;
}

VerifySpec parse_verify(const Block& b) {
  b.allow({"suites", "tolerances", "samples", "shape_range", "events_per_cycle"});
  VerifySpec v;
  const YAML::Node list = b.require("suites");
  if (!list.IsSequence() || list.size() == 0) b.fail(list, b.field("suites"), "expected a non-empty list");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string f = b.field("suites") + "[" + std::to_string(i) + "]";
    if (!list[i].IsScalar()) b.fail(list[i], f, "expected a suite name");
    try {
      v.suites.push_back(parse_suite(list[i].Scalar()));
    } catch (const std::invalid_argument& e) {
      b.fail(list[i], f, e.what());
    }
    v.tolerances.push_back(default_tolerance(v.suites.back()));
  }
  if (b.has("tolerances")) {
    const Block t = b.child("tolerances");
    for (const auto& kv : t.node()) {
      const auto key = kv.first.as<std::string>();
      const auto it = std::find_if(v.suites.begin(), v.suites.end(),
                                   [&](Suite s) { return key == to_string(s); });
      if (it == v.suites.end()) t.fail(kv.first, t.field(key), "not one of the selected suites");
      v.tolerances[static_cast<std::size_t>(it - v.suites.begin())] = t.positive(key.c_str(), 1.0);
    }
  }
  v.samples = static_cast<int>(b.integer("samples", 100, 1, 1 << 24));
  v.shape_range = b.positive("shape_range", 1.5);
  if (b.has("events_per_cycle")) v.events_per_cycle = static_cast<int>(b.integer("events_per_cycle", 0, 1 << 20));
  return v;
}

// Which suites make sense for which model.
void check_suites(const Block& b, const VerifySpec& v, const ModelSpec& m, const BuiltModel& built) {
  const YAML::Node list = b.get("suites");
  for (std::size_t i = 0; i < v.suites.size(); ++i) {
    const Suite s = v.suites[i];
    std::string why;
    if (s == Suite::LoopClosure && m.type != ModelSpec::Type::Jacobian) {
      why = "needs a holonomic (jacobian) model";
    } else if ((s == Suite::SinglePiece || s == Suite::Continuity) && !built.provider.switching()) {
      why = "needs a contact-switching model (crawler or slip)";
    } else if (s == Suite::Stance && !built.pinned_feet) {
      why = "needs a model with pinned stance feet (crawler)";
    } else if (s == Suite::Residual && built.provider.kind() != ConnectionProvider::Kind::Constraint) {
      why = "needs a constraint model (swimmer, many_legged or slip)";
    }
    if (!why.empty()) b.fail(list[i], b.field("suites") + "[" + std::to_string(i) + "]", why);
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ValidationError(source + ":" + std::to_string(e.mark.line + 1) + ":" +
                              std::to_string(e.mark.column + 1),
                          "<syntax>", e.msg);
  }
  Scenario sc;
  sc.source = source;
  sc.text = text;
  const Block top(root, "", sc.source);
  top.allow({"name", "description", "seed", "model", "gait", "integrator", "sweep", "optimize",
             "verify", "output"});
  sc.name = top.text("name", "");
  sc.description = top.text("description", "");
  if (top.has("seed")) {
    const std::string t = top.text("seed");
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno != 0) {
      top.fail(top.get("seed"), "seed", "expected a non-negative integer");
    }
    sc.seed = v;
  }

  const Block model = top.child("model");
  sc.model = parse_model(model);
  BuiltModel built;
  try {
    built = build_model(sc.model);
  } catch (const std::invalid_argument& e) {
    model.fail(model.node(), "model", e.what());
  }
  const Eigen::Index dim = built.provider.dim();

  if (top.has("gait")) {
    const Block g = top.child("gait");
    sc.gait = parse_gait(g);
    if (sc.gait->dim() != dim) {
      g.fail(g.node(), "gait",
             "gait has " + std::to_string(sc.gait->dim()) + " coordinates, model has " + std::to_string(dim));
    }
  }
  if (top.has("integrator")) sc.integrator = parse_integrator(top.child("integrator"));
  if (top.has("sweep")) sc.sweep = parse_sweep(top.child("sweep"), dim);
  if (top.has("optimize")) sc.optimize = parse_optimize(top.child("optimize"), dim);
  if (top.has("verify")) {
    const Block v = top.child("verify");
    sc.verify = parse_verify(v);
    check_suites(v, *sc.verify, sc.model, built);
  }
  if (top.has("output")) {
    const Block out = top.child("output");
    out.allow({"dir"});
    sc.output_dir = out.text("dir");
  }
  sc.hash = fnv1a(text);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path, "<file>", "cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

void apply_overrides(Scenario& sc, const Overrides& o) {
  if (o.step) {
    if (!(*o.step > 0.0) || !std::isfinite(*o.step)) throw ValidationError("--step", "integrator.step", "must be positive");
    sc.integrator.step = *o.step;
  }
  if (o.cycles) {
    if (*o.cycles < 1) throw ValidationError("--cycles", "integrator.cycles", "must be at least 1");
    sc.integrator.cycles = *o.cycles;
  }
  if (o.seed) sc.seed = *o.seed;
  if (o.out) sc.output_dir = *o.out;
  sc.hash = fnv1a(o.canonical(), fnv1a(sc.text));
}

}  // namespace locomo::cli

#include "locomo/cli/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace locomo::cli {

using Json = nlohmann::ordered_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw FormatError("not a number: '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw FormatError("unterminated quote in CSV line");
  out.push_back(cur);
  return out;
}

std::string quote_csv(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string format_contacts(const std::optional<ContactSet>& c) {
  return c ? c->to_string() : "-";
}

std::optional<ContactSet> parse_contacts(const std::string& text) {
  if (text == "-") return std::nullopt;
  try {
    return ContactSet::parse(text);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("bad contact set: ") + e.what());
  }
}

namespace {

void write_metadata(std::ostream& out, const std::string& kind, const Metadata& meta) {
  out << "# locomo " << kind << '\n';
  out << "# schema_version: " << kSchemaVersion << '\n';
  for (const auto& [k, v] : meta) {
    if (k != "schema_version") out << "# " << k << ": " << v << '\n';
  }
}

// Reads the comment block and the header line.
std::vector<std::string> read_preamble(std::istream& in, const std::string& kind, Metadata& meta) {
  std::string line;
  if (!std::getline(in, line) || line != "# locomo " + kind) {
    throw FormatError("not a locomo " + kind + " file");
  }
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0) return split_csv(line);
    const auto colon = line.find(": ", 2);
    if (colon == std::string::npos) throw FormatError("bad metadata line: " + line);
    meta[line.substr(2, colon - 2)] = line.substr(colon + 2);
  }
  throw FormatError("missing header line");
}

const std::string& lookup(const Metadata& meta, const std::string& key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("missing metadata key '" + key + "'");
  return it->second;
}

int lookup_int(const Metadata& meta, const std::string& key) {
  return static_cast<int>(parse_double(lookup(meta, key)));
}

void check_schema(const Metadata& meta) {
  if (lookup_int(meta, "schema_version") != kSchemaVersion) {
    throw FormatError("unsupported schema version " + lookup(meta, "schema_version"));
  }
}

std::string join_vector(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_double(v[i]);
  return out;
}

Eigen::VectorXd split_vector(const std::string& text) {
  std::istringstream s(text);
  std::vector<double> v;
  std::string tok;
  while (s >> tok) v.push_back(parse_double(tok));
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

const char* const kRows[3] = {"vx", "vy", "omega"};

}  // namespace

// ---------------------------------------------------------------------------

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const Metadata& meta) {
  const Eigen::Index d = traj.shapes.empty() ? 0 : traj.shapes.front().size();
  Metadata m = meta;
  m["schema_version"] = std::to_string(kSchemaVersion);
  m["dim"] = std::to_string(d);
  m["period"] = format_double(traj.period);
  m["cycles"] = std::to_string(traj.cycles);
  m["step"] = format_double(traj.step);
  m["event_tol"] = format_double(traj.event_tol);
  m["scheme_order"] = std::to_string(traj.scheme_order);
  m["has_contacts"] = traj.has_contacts ? "true" : "false";
  m["max_twist_norm"] = format_double(traj.max_twist_norm);
  write_metadata(out, "trajectory", m);

  out << "t,x,y,theta";
  for (Eigen::Index i = 1; i <= d; ++i) out << ",r" << i;
  out << ",xi_vx,xi_vy,xi_omega,contact_set\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Pose& g = traj.poses[k];
    out << format_double(traj.times[k]) << ',' << format_double(g.x) << ',' << format_double(g.y)
        << ',' << format_double(g.theta);
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(traj.shapes[k][i]);
    const Twist& xi = traj.twists[k];
    out << ',' << format_double(xi.vx) << ',' << format_double(xi.vy) << ','
        << format_double(xi.omega) << ','
        << format_contacts(traj.has_contacts ? std::optional(traj.contacts[k]) : std::nullopt)
        << '\n';
  }
}

TrajectoryTable read_trajectory_csv(std::istream& in) {
  TrajectoryTable t;
  const std::vector<std::string> header = read_preamble(in, "trajectory", t.meta);
  check_schema(t.meta);
  const Metadata& m = t.meta;
  const int d = lookup_int(m, "dim");
  if (header.size() != static_cast<std::size_t>(8 + d)) throw FormatError("trajectory header has wrong width");
  Trajectory& tr = t.traj;
  tr.period = parse_double(lookup(m, "period"));
  tr.cycles = lookup_int(m, "cycles");
  tr.step = parse_double(lookup(m, "step"));
  tr.event_tol = parse_double(lookup(m, "event_tol"));
  tr.scheme_order = lookup_int(m, "scheme_order");
  tr.has_contacts = lookup(m, "has_contacts") == "true";
  tr.max_twist_norm = parse_double(lookup(m, "max_twist_norm"));

  std::string line;
  while (std::getline(in, line)) {
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != header.size()) throw FormatError("trajectory row has wrong width");
    tr.times.push_back(parse_double(f[0]));
    tr.poses.push_back({parse_double(f[1]), parse_double(f[2]), parse_double(f[3])});
    Shape r(d);
    for (int i = 0; i < d; ++i) r[i] = parse_double(f[4 + i]);
    tr.shapes.push_back(r);
    tr.twists.push_back({parse_double(f[4 + d]), parse_double(f[5 + d]), parse_double(f[6 + d])});
    tr.contacts.push_back(parse_contacts(f[7 + d]).value_or(ContactSet()));
  }
  return t;
}

// ---------------------------------------------------------------------------

void write_field_csv(std::ostream& out, const FieldGrid& field, const CurvatureField* curvature,
                     const Metadata& meta) {
  const Eigen::Index d = field.dim;
  const GridSpec& s = field.spec;
  Metadata m = meta;
  m["schema_version"] = std::to_string(kSchemaVersion);
  m["dim"] = std::to_string(d);
  m["axis1"] = format_double(s.axis1.lo) + " " + format_double(s.axis1.hi) + " " + std::to_string(s.axis1.count);
  m["axis2"] = format_double(s.axis2.lo) + " " + format_double(s.axis2.hi) + " " + std::to_string(s.axis2.count);
  m["coordinates"] = std::to_string(s.coord1 + 1) + " " + std::to_string(s.coord2 + 1);
  m["base"] = join_vector(s.base);
  m["nodes"] = std::to_string(field.nodes.size());
  m["curvature"] = curvature ? "true" : "false";
  write_metadata(out, "field", m);

  out << "i,j,r1,r2";
  for (const char* row : kRows) {
    for (Eigen::Index c = 1; c <= d; ++c) out << ",A_" << row << '_' << c;
  }
  out << ",contact_set,singular_flag";
  if (curvature) out << ",D_vx,D_vy,D_omega,D_status";
  out << '\n';
  for (int i = 0; i < field.rows(); ++i) {
    for (int j = 0; j < field.cols(); ++j) {
      const FieldNode& n = field.at(i, j);
      out << i << ',' << j << ',' << format_double(s.axis1.value(i)) << ','
          << format_double(s.axis2.value(j));
      for (int row = 0; row < 3; ++row) {
        for (Eigen::Index c = 0; c < d; ++c) out << ',' << format_double(n.a(row, c));
      }
      out << ',' << format_contacts(n.contacts) << ',' << (n.singular ? 1 : 0);
      if (curvature) {
        const std::size_t k = curvature->index(i, j);
        const bool ok = curvature->valid(i, j);
        const Twist& v = curvature->values[k];
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out << ',' << format_double(ok ? v.vx : nan) << ',' << format_double(ok ? v.vy : nan) << ','
            << format_double(ok ? v.omega : nan) << ',' << to_string(curvature->status[k]);
      }
      out << '\n';
    }
  }
}

namespace {

GridAxis parse_axis(const std::string& text) {
  std::istringstream s(text);
  std::string lo, hi;
  int count = 0;
  if (!(s >> lo >> hi >> count)) throw FormatError("bad axis metadata: " + text);
  return {parse_double(lo), parse_double(hi), count};
}

StencilStatus parse_status(const std::string& text) {
  for (StencilStatus s : {StencilStatus::Interior, StencilStatus::Boundary, StencilStatus::Switching,
                          StencilStatus::Singular}) {
    if (text == to_string(s)) return s;
  }
  throw FormatError("bad stencil status: " + text);
}

}  // namespace

FieldTable read_field_csv(std::istream& in) {
  FieldTable t;
  const std::vector<std::string> header = read_preamble(in, "field", t.meta);
  check_schema(t.meta);
  const Metadata& m = t.meta;
  FieldGrid& f = t.field;
  f.dim = lookup_int(m, "dim");
  f.spec.axis1 = parse_axis(lookup(m, "axis1"));
  f.spec.axis2 = parse_axis(lookup(m, "axis2"));
  {
    std::istringstream s(lookup(m, "coordinates"));
    if (!(s >> f.spec.coord1 >> f.spec.coord2)) throw FormatError("bad coordinates metadata");
    --f.spec.coord1;
    --f.spec.coord2;
  }
  f.spec.base = split_vector(lookup(m, "base"));
  const bool has_curvature = lookup(m, "curvature") == "true";
  const std::size_t width = 6 + 3 * static_cast<std::size_t>(f.dim) + (has_curvature ? 4 : 0);
  if (header.size() != width) throw FormatError("field header has wrong width");
  if (has_curvature) {
    t.curvature.emplace();
    t.curvature->spec = f.spec;
  }
  f.nodes.resize(static_cast<std::size_t>(f.rows()) * f.cols());
  std::vector<bool> seen(f.nodes.size(), false);
  std::string line;
  while (std::getline(in, line)) {
    const std::vector<std::string> c = split_csv(line);
    if (c.size() != width) throw FormatError("field row has wrong width");
    const int i = static_cast<int>(parse_double(c[0]));
    const int j = static_cast<int>(parse_double(c[1]));
    if (i < 0 || j < 0 || i >= f.rows() || j >= f.cols()) throw FormatError("node index out of range");
    const std::size_t k = f.index(i, j);
    seen[k] = true;
    FieldNode& n = f.nodes[k];
    n.a.resize(3, f.dim);
    std::size_t col = 4;
    for (int row = 0; row < 3; ++row) {
      for (Eigen::Index q = 0; q < f.dim; ++q) n.a(row, q) = parse_double(c[col++]);
    }
    n.contacts = parse_contacts(c[col++]);
    n.singular = c[col++] == "1";
    if (has_curvature) {
      CurvatureField& cf = *t.curvature;
      cf.values.resize(f.nodes.size());
      cf.status.resize(f.nodes.size(), StencilStatus::Singular);
      cf.values[k] = {parse_double(c[col]), parse_double(c[col + 1]), parse_double(c[col + 2])};
      cf.status[k] = parse_status(c[col + 3]);
    }
  }
  for (bool s : seen) {
    if (!s) throw FormatError("field file is missing nodes");
  }
  return t;
}

// ---------------------------------------------------------------------------

namespace {

// Non-finite values are stored as strings so the JSON stays standard.
Json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double number(const Json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  if (!j.is_number()) throw FormatError("expected a number in JSON");
  return j.get<double>();
}

Json twist_json(const Twist& t) {
  return Json{{"vx", number(t.vx)}, {"vy", number(t.vy)}, {"omega", number(t.omega)}};
}

Twist twist_from(const Json& j) { return {number(j.at("vx")), number(j.at("vy")), number(j.at("omega"))}; }

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

Eigen::VectorXd vector_from(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i]);
  return v;
}

Json meta_json(const Metadata& meta) {
  Json m = Json::object();
  m["schema_version"] = kSchemaVersion;
  for (const auto& [k, v] : meta) {
    if (k != "schema_version") m[k] = v;
  }
  return m;
}

Metadata meta_from(const Json& j) {
  Metadata m;
  for (const auto& [k, v] : j.items()) m[k] = v.is_string() ? v.get<std::string>() : v.dump();
  check_schema(m);
  return m;
}

Json parse_json(std::istream& in) {
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad JSON: ") + e.what());
  }
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("unexpected JSON layout: ") + e.what());
  }
}

}  // namespace

void write_summary_json(std::ostream& out, const SimulationSummary& s) {
  Json j;
  j["meta"] = meta_json(s.meta);
  j["samples"] = s.samples;
  j["max_twist_norm"] = number(s.max_twist_norm);
  Json net;
  net["total"] = twist_json(s.net.total);
  net["per_cycle"] = Json::array();
  for (const Twist& t : s.net.per_cycle) net["per_cycle"].push_back(twist_json(t));
  j["net_displacement"] = net;
  j["event_count"] = s.events.size();
  j["events"] = Json::array();
  for (const EventRecord& e : s.events) {
    j["events"].push_back(Json{{"time", number(e.time)},
                               {"bracket_lo", number(e.bracket_lo)},
                               {"bracket_hi", number(e.bracket_hi)},
                               {"before", e.before.to_string()},
                               {"after", e.after.to_string()},
                               {"shape", vector_json(e.shape)}});
  }
  j["warnings"] = s.warnings;
  out << j.dump(2) << '\n';
}

SimulationSummary read_summary_json(std::istream& in) {
  const Json j = parse_json(in);
  return guarded([&] {
    SimulationSummary s;
    s.meta = meta_from(j.at("meta"));
    s.samples = j.at("samples").get<std::size_t>();
    s.max_twist_norm = number(j.at("max_twist_norm"));
    s.net.total = twist_from(j.at("net_displacement").at("total"));
    for (const Json& t : j.at("net_displacement").at("per_cycle")) s.net.per_cycle.push_back(twist_from(t));
    for (const Json& e : j.at("events")) {
      EventRecord r;
      r.time = number(e.at("time"));
      r.bracket_lo = number(e.at("bracket_lo"));
      r.bracket_hi = number(e.at("bracket_hi"));
      r.before = *parse_contacts(e.at("before").get<std::string>());
      r.after = *parse_contacts(e.at("after").get<std::string>());
      r.shape = vector_from(e.at("shape"));
      s.events.push_back(r);
    }
    if (j.at("event_count").get<std::size_t>() != s.events.size()) throw FormatError("event count mismatch");
    s.warnings = j.at("warnings").get<std::vector<std::string>>();
    return s;
  });
}

void write_report_json(std::ostream& out, const ReportFile& r) {
  Json j;
  j["meta"] = meta_json(r.meta);
  j["parameters"] = r.parameter_names;
  j["best_params"] = vector_json(r.report.best_params);
  j["best_objective"] = number(r.report.best_objective);
  j["evaluations"] = r.report.evaluations;
  j["termination"] = r.report.termination;
  Json history = Json::array();
  for (const EvaluationRecord& e : r.report.history) {
    history.push_back(Json{{"seed", e.seed}, {"params", vector_json(e.params)}, {"objective", number(e.objective)}});
  }
  j["history"] = history;
  out << j.dump(2) << '\n';
}

ReportFile read_report_json(std::istream& in) {
  const Json j = parse_json(in);
  return guarded([&] {
    ReportFile r;
    r.meta = meta_from(j.at("meta"));
    r.parameter_names = j.at("parameters").get<std::vector<std::string>>();
    r.report.best_params = vector_from(j.at("best_params"));
    r.report.best_objective = number(j.at("best_objective"));
    r.report.evaluations = j.at("evaluations").get<int>();
    r.report.termination = j.at("termination").get<std::string>();
    for (const Json& e : j.at("history")) {
      r.report.history.push_back({vector_from(e.at("params")), number(e.at("objective")), e.at("seed").get<int>()});
    }
    return r;
  });
}

// ---------------------------------------------------------------------------

void write_verify_csv(std::ostream& out, const std::vector<SuiteResult>& results, const Metadata& meta) {
  Metadata m = meta;
  m["schema_version"] = std::to_string(kSchemaVersion);
  write_metadata(out, "verify", m);
  out << "suite,status,metric,tolerance,detail\n";
  for (const SuiteResult& r : results) {
    out << r.suite << ',' << (r.passed ? "PASS" : "FAIL") << ',' << format_double(r.metric) << ','
        << format_double(r.tolerance) << ',' << quote_csv(r.detail) << '\n';
  }
}

VerifyTable read_verify_csv(std::istream& in) {
  VerifyTable t;
  const std::vector<std::string> header = read_preamble(in, "verify", t.meta);
  check_schema(t.meta);
  if (header.size() != 5) throw FormatError("verify header has wrong width");
  std::string line;
  while (std::getline(in, line)) {
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 5) throw FormatError("verify row has wrong width");
    if (f[1] != "PASS" && f[1] != "FAIL") throw FormatError("bad status: " + f[1]);
    t.results.push_back({f[0], f[1] == "PASS", parse_double(f[2]), parse_double(f[3]), f[4]});
  }
  return t;
}

}  // namespace locomo::cli

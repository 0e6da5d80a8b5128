#include "locomo/analysis.hpp"

#include <cmath>
#include <limits>

#include "locomo/models.hpp"

namespace locomo {

namespace {

void validate_axis(const GridAxis& axis, const char* name) {
  if (axis.count < 2 || !(axis.hi > axis.lo)) {
    throw std::invalid_argument(std::string("grid axis ") + name +
                                " needs hi > lo and at least 2 nodes");
  }
}

Shape base_shape(const GridSpec& spec, Eigen::Index dim) {
  if (spec.base.size() == 0) return Shape::Zero(dim);
  check_dimension(spec.base.size(), dim, "grid base shape");
  return spec.base;
}

// Loop polygon projected onto the grid coordinates; Fourier loops are sampled.
std::vector<Eigen::Vector2d> loop_polygon(const Gait& loop, const GridSpec& spec, const Shape& base) {
  const Gait poly = to_waypoints(loop, 2000);
  std::vector<Eigen::Vector2d> out;
  for (const Shape& p : poly.waypoint()->points) {
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      if (k == spec.coord1 || k == spec.coord2) continue;
      if (std::abs(p[k] - base[k]) > 1e-12) throw LoopExitsGrid("loop leaves the grid slice");
    }
    out.emplace_back(p[spec.coord1], p[spec.coord2]);
  }
  return out;
}

}  // namespace

Shape FieldGrid::shape_at(int i, int j) const {
  Shape r = base_shape(spec, dim);
  r[spec.coord1] = spec.axis1.value(i);
  r[spec.coord2] = spec.axis2.value(j);
  return r;
}

FieldGrid sample_field(const ConnectionProvider& provider, const GridSpec& spec) {
  validate_axis(spec.axis1, "1");
  validate_axis(spec.axis2, "2");
  const Eigen::Index d = provider.dim();
  if (spec.coord1 < 0 || spec.coord1 >= d || spec.coord2 < 0 || spec.coord2 >= d ||
      spec.coord1 == spec.coord2) {
    throw std::invalid_argument("grid coordinates must be two distinct shape coordinates");
  }
  FieldGrid field;
  field.spec = spec;
  field.spec.base = base_shape(spec, d);
  field.dim = d;
  field.nodes.resize(static_cast<std::size_t>(spec.axis1.count) * spec.axis2.count);
  for (int i = 0; i < field.rows(); ++i) {
    for (int j = 0; j < field.cols(); ++j) {
      FieldNode& node = field.nodes[field.index(i, j)];
      const Shape r = field.shape_at(i, j);
      if (provider.switching()) node.contacts = provider.select(r);
      try {
        node.a = provider.evaluate_piece(r, provider.select(r));
      } catch (const SingularConstraint&) {
        node.singular = true;
      } catch (const DegenerateStance&) {
        node.singular = true;
      }
      if (node.singular) {
        node.a = ConnectionMatrix::Constant(3, d, std::numeric_limits<double>::quiet_NaN());
      }
    }
  }
  return field;
}

const char* to_string(StencilStatus s) {
  switch (s) {
    case StencilStatus::Interior: return "interior";
    case StencilStatus::Boundary: return "boundary";
    case StencilStatus::Switching: return "switching";
    case StencilStatus::Singular: return "singular";
  }
  return "unknown";
}

bool CurvatureField::valid(int i, int j) const {
  const StencilStatus s = status[index(i, j)];
  return s == StencilStatus::Interior || s == StencilStatus::Boundary;
}

const Twist& CurvatureField::at(int i, int j) const {
  if (!valid(i, j)) {
    throw SingularStencil("curvature stencil at node (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") is " + to_string(status[index(i, j)]));
  }
  return values[index(i, j)];
}

CurvatureField curvature(const FieldGrid& field) {
  if (field.rows() < 3 || field.cols() < 3) {
    throw std::invalid_argument("curvature needs at least 3 nodes per axis");
  }
  const Eigen::Index c1 = field.spec.coord1;
  const Eigen::Index c2 = field.spec.coord2;
  const double h1 = field.spec.axis1.spacing();
  const double h2 = field.spec.axis2.spacing();

  CurvatureField out;
  out.spec = field.spec;
  out.values.assign(field.nodes.size(), Twist{});
  out.status.assign(field.nodes.size(), StencilStatus::Interior);

  for (int i = 0; i < field.rows(); ++i) {
    for (int j = 0; j < field.cols(); ++j) {
      const int i0 = i == 0 ? 0 : i - 1;
      const int i1 = i + 1 == field.rows() ? i : i + 1;
      const int j0 = j == 0 ? 0 : j - 1;
      const int j1 = j + 1 == field.cols() ? j : j + 1;
      const FieldNode* stencil[] = {&field.at(i, j), &field.at(i0, j), &field.at(i1, j),
                                    &field.at(i, j0), &field.at(i, j1)};
      StencilStatus& status = out.status[out.index(i, j)];
      bool singular = false;
      bool switching = false;
      for (const FieldNode* n : stencil) {
        singular = singular || n->singular;
        switching = switching || n->contacts != stencil[0]->contacts;
      }
      if (singular) {
        status = StencilStatus::Singular;
        continue;
      }
      if (switching) {
        status = StencilStatus::Switching;
        continue;
      }
      if (i1 - i0 < 2 || j1 - j0 < 2) status = StencilStatus::Boundary;

      const double dr1 = h1 * (i1 - i0);
      const double dr2 = h2 * (j1 - j0);
      const Eigen::Vector3d d_a2_d_r1 = (field.at(i1, j).a.col(c2) - field.at(i0, j).a.col(c2)) / dr1;
      const Eigen::Vector3d d_a1_d_r2 = (field.at(i, j1).a.col(c1) - field.at(i, j0).a.col(c1)) / dr2;
      const ConnectionMatrix& a = field.at(i, j).a;
      out.values[out.index(i, j)] = Twist::from_vector(d_a2_d_r1 - d_a1_d_r2) +
                                    bracket(column(a, c1), column(a, c2));
    }
  }
  return out;
}

int winding_number(const std::vector<Eigen::Vector2d>& loop, const Eigen::Vector2d& p) {
  int wn = 0;
  const std::size_t n = loop.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Vector2d& a = loop[k];
    const Eigen::Vector2d& b = loop[(k + 1) % n];
    const double side = (b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y());
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && side > 0.0) ++wn;
    } else if (b.y() <= p.y() && side < 0.0) {
      --wn;
    }
  }
  return wn;
}

HolonomyReport holonomy_vs_area(const ConnectionProvider& provider, const Gait& loop,
                                const FieldGrid& field, const IntegratorSettings& settings,
                                int subdivisions) {
  if (subdivisions < 1) throw std::invalid_argument("subdivisions must be positive");
  check_dimension(loop.dim(), field.dim, "loop gait");
  const auto& spec = field.spec;
  const std::vector<Eigen::Vector2d> polygon = loop_polygon(loop, spec, spec.base);
  for (const auto& p : polygon) {
    if (p.x() < spec.axis1.lo || p.x() > spec.axis1.hi || p.y() < spec.axis2.lo ||
        p.y() > spec.axis2.hi) {
      throw LoopExitsGrid("loop leaves the sampled grid");
    }
  }

  const CurvatureField curv = curvature(field);
  const double h1 = spec.axis1.spacing();
  const double h2 = spec.axis2.spacing();
  const double sub_area = h1 * h2 / (subdivisions * subdivisions);
  Eigen::Vector3d area = Eigen::Vector3d::Zero();
  for (int i = 0; i + 1 < field.rows(); ++i) {
    for (int j = 0; j + 1 < field.cols(); ++j) {
      Eigen::Vector3d cell = Eigen::Vector3d::Zero();
      bool touched = false;
      for (int a = 0; a < subdivisions; ++a) {
        for (int b = 0; b < subdivisions; ++b) {
          const double u = (a + 0.5) / subdivisions;
          const double v = (b + 0.5) / subdivisions;
          const Eigen::Vector2d p(spec.axis1.value(i) + u * h1, spec.axis2.value(j) + v * h2);
          const int wn = winding_number(polygon, p);
          if (wn == 0) continue;
          if (!touched) {
            // Throws on invalid corners.
            curv.at(i, j);
            curv.at(i + 1, j);
            curv.at(i, j + 1);
            curv.at(i + 1, j + 1);
            touched = true;
          }
          const Eigen::Vector3d d = (1 - u) * (1 - v) * curv.at(i, j).vector() +
                                    u * (1 - v) * curv.at(i + 1, j).vector() +
                                    (1 - u) * v * curv.at(i, j + 1).vector() +
                                    u * v * curv.at(i + 1, j + 1).vector();
          cell += wn * sub_area * d;
        }
      }
      area += cell;
    }
  }

  IntegratorSettings run = settings;
  run.cycles = 1;
  run.record_samples = false;
  HolonomyReport report;
  report.net_displacement = net_displacement(integrate_gait(provider, loop, run)).total;
  report.area_integral = Twist::from_vector(area);
  report.gap = report.net_displacement - report.area_integral;
  report.gap_norm = report.gap.norm();
  report.caveat =
      "area integral matches net displacement only to leading order in loop size; "
      "rotation-coupled components carry higher-order terms";
  return report;
}

}  // namespace locomo

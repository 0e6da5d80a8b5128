#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "locomo/connection.hpp"
#include "locomo/integrator.hpp"
#include "locomo/liegroup.hpp"
#include "locomo/shapespace.hpp"

namespace locomo {

class SingularStencil : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LoopExitsGrid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GridAxis {
  double lo = -1.0;
  double hi = 1.0;
  int count = 3;

  double spacing() const { return (hi - lo) / (count - 1); }
  double value(int i) const { return i + 1 == count ? hi : lo + spacing() * i; }
};

/// Rectangular grid over two shape coordinates; the remaining coordinates
/// are held at `base` (which may be left empty for 2-dof providers).
struct GridSpec {
  GridAxis axis1;
  GridAxis axis2;
  Eigen::Index coord1 = 0;
  Eigen::Index coord2 = 1;
  Shape base;
};

struct FieldNode {
  ConnectionMatrix a;
  std::optional<ContactSet> contacts;
  bool singular = false;
};

/// Sampled A(r); node (i, j) sits at axis1.value(i), axis2.value(j).
struct FieldGrid {
  GridSpec spec;
  Eigen::Index dim = 0;
  std::vector<FieldNode> nodes;

  int rows() const { return spec.axis1.count; }
  int cols() const { return spec.axis2.count; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * cols() + j; }
  const FieldNode& at(int i, int j) const { return nodes[index(i, j)]; }
  Shape shape_at(int i, int j) const;
};

FieldGrid sample_field(const ConnectionProvider& provider, const GridSpec& spec);

enum class StencilStatus {
  Interior,  // second-order central differences
  Boundary,  // one-sided, first order
  Switching, // stencil straddles a contact switch; no value
  Singular,  // stencil touches a singular node; no value
};

const char* to_string(StencilStatus s);

/// D = dA_2/dr_1 - dA_1/dr_2 + [A_1, A_2] per node, where A_k is the column
/// of the grid's k-th coordinate.
struct CurvatureField {
  GridSpec spec;
  std::vector<Twist> values;
  std::vector<StencilStatus> status;

  int rows() const { return spec.axis1.count; }
  int cols() const { return spec.axis2.count; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * cols() + j; }
  bool valid(int i, int j) const;
  /// Throws SingularStencil at nodes without a value.
  const Twist& at(int i, int j) const;
};

CurvatureField curvature(const FieldGrid& field);

struct HolonomyReport {
  Twist net_displacement;
  Twist area_integral;
  Twist gap;
  double gap_norm = 0.0;
  std::string caveat;
};

/// Compares one integrated loop against the curvature integrated over the
/// region it encloses (winding-number weighted, bilinear D on sub-cells).
/// Agreement is exact only for commuting components.
HolonomyReport holonomy_vs_area(const ConnectionProvider& provider, const Gait& loop,
                                const FieldGrid& field, const IntegratorSettings& settings,
                                int subdivisions = 4);

/// Winding number of the closed polygon `loop` around p.
int winding_number(const std::vector<Eigen::Vector2d>& loop, const Eigen::Vector2d& p);

}  // namespace locomo

#include "locomo/connection.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <bit>
#include <sstream>

namespace locomo {

Twist apply(const ConnectionMatrix& a, const ShapeVelocity& rdot) {
  check_dimension(rdot.size(), a.cols(), "shape velocity");
  return Twist::from_vector(a * rdot);
}

int ContactSet::size() const { return std::popcount(mask_); }

std::string ContactSet::to_string() const {
  if (mask_ == 0) return "none";
  std::string out;
  for (int i = 0; i < 32; ++i) {
    if (!contains(i)) continue;
    if (!out.empty()) out += '+';
    out += std::to_string(i + 1);
  }
  return out;
}

ContactSet ContactSet::parse(const std::string& text) {
  if (text == "none") return {};
  ContactSet out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, '+')) {
    std::size_t used = 0;
    int foot = 0;
    try {
      foot = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || foot < 1 || foot > 32) {
      throw std::invalid_argument("malformed contact set '" + text + "'");
    }
    out = out.with(foot - 1);
  }
  if (out.empty()) throw std::invalid_argument("malformed contact set '" + text + "'");
  return out;
}

ConnectionMatrix jacobian_connection_eval(const PoseMap& f, const Shape& r, double h) {
  check_dimension(r.size(), f.dim, "shape");
  if (!(h > 0.0)) throw std::invalid_argument("Jacobian step must be positive");
  ConnectionMatrix a(3, f.dim);
  Shape lo = r;
  Shape hi = r;
  for (Eigen::Index i = 0; i < f.dim; ++i) {
    lo[i] = r[i] - h;
    hi[i] = r[i] + h;
    const Twist d = log(compose(inverse(f(lo)), f(hi)));
    a.col(i) = d.vector() / (2.0 * h);
    lo[i] = r[i];
    hi[i] = r[i];
  }
  return a;
}

ConnectionMatrix linear_constraint_connection(const ConstraintSystem& sys) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(sys.m);
  const auto& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || !(sv(2) > 0.0) || sv(0) / sv(2) > kMaxConstraintCondition) {
    std::ostringstream msg;
    msg << "constraint matrix M is singular (singular values " << sv.transpose() << ")";
    throw SingularConstraint(msg.str());
  }
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(sys.m);
  ConnectionMatrix a = lu.solve(-sys.n);
  return a;
}

double constraint_residual(const ConstraintSystem& sys, const ConnectionMatrix& a) {
  if (a.cols() == 0) return 0.0;
  return (sys.m * a + sys.n).cwiseAbs().maxCoeff();
}

ConnectionProvider ConnectionProvider::jacobian(PoseMap f, double h) {
  ConnectionProvider p;
  p.kind_ = Kind::Jacobian;
  p.dim_ = f.dim;
  p.h_ = h;
  p.pieces_ = [f = std::move(f)](const ContactSet&) { return f; };
  return p;
}

ConnectionProvider ConnectionProvider::piecewise(Eigen::Index dim, Selector selector,
                                                 PieceMap pieces, double h) {
  ConnectionProvider p;
  p.kind_ = Kind::Piecewise;
  p.dim_ = dim;
  p.h_ = h;
  p.selector_ = std::move(selector);
  p.pieces_ = std::move(pieces);
  return p;
}

ConnectionProvider ConnectionProvider::constraint(Eigen::Index dim, ConstraintBuilder builder,
                                                  Selector selector) {
  ConnectionProvider p;
  p.kind_ = Kind::Constraint;
  p.dim_ = dim;
  p.selector_ = std::move(selector);
  p.builder_ = std::move(builder);
  return p;
}

ConnectionProvider ConnectionProvider::constant(ConnectionMatrix a) {
  const Eigen::Index d = a.cols();
  // M = I, N = -A solves to exactly A.
  return constraint(d, [a = std::move(a)](const Shape& r, const ContactSet&) {
    check_dimension(r.size(), a.cols(), "shape");
    return ConstraintSystem{Eigen::Matrix3d::Identity(), -a};
  });
}

ContactSet ConnectionProvider::select(const Shape& r) const {
  return selector_ ? selector_(r) : ContactSet{};
}

ConnectionEval ConnectionProvider::evaluate(const Shape& r) const {
  const ContactSet c = select(r);
  ConnectionEval out{evaluate_piece(r, c), std::nullopt};
  if (switching()) out.contacts = c;
  return out;
}

ConnectionMatrix ConnectionProvider::evaluate_piece(const Shape& r, const ContactSet& c) const {
  check_dimension(r.size(), dim_, "shape");
  if (kind_ == Kind::Constraint) return linear_constraint_connection(builder_(r, c));
  return jacobian_connection_eval(pieces_(c), r, h_);
}

ConstraintSystem ConnectionProvider::constraint_system(const Shape& r, const ContactSet& c) const {
  if (kind_ != Kind::Constraint) {
    throw std::logic_error("provider is not constraint-based");
  }
  check_dimension(r.size(), dim_, "shape");
  return builder_(r, c);
}

ConnectionEval piecewise_connection_eval(const ConnectionProvider& provider, const Shape& r) {
  return provider.evaluate(r);
}

}  // namespace locomo

#include "locomo/shapespace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace locomo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate(const FourierGait& g) {
  if (!(g.period > 0.0) || !std::isfinite(g.period)) {
    throw InvalidGait("gait period must be positive and finite");
  }
  const auto d = g.mean.size();
  if (d < 1) throw InvalidGait("gait needs at least one shape coordinate");
  if (g.cos_coeffs.rows() != d || g.sin_coeffs.rows() != d ||
      g.cos_coeffs.cols() != g.sin_coeffs.cols()) {
    throw InvalidGait("Fourier coefficient blocks must be d x K with matching K");
  }
  if (!g.mean.allFinite() || !g.cos_coeffs.allFinite() || !g.sin_coeffs.allFinite()) {
    throw InvalidGait("Fourier coefficients must be finite");
  }
}

void validate(const WaypointGait& g) {
  if (!(g.period > 0.0) || !std::isfinite(g.period)) {
    throw InvalidGait("gait period must be positive and finite");
  }
  if (g.points.size() < 2) throw InvalidGait("waypoint loop needs at least two points");
  if (g.times.size() != g.points.size()) {
    throw InvalidGait("waypoint loop needs one time per point");
  }
  if (g.times.front() != 0.0) throw InvalidGait("first waypoint time must be 0");
  for (std::size_t i = 1; i < g.times.size(); ++i) {
    if (!(g.times[i] > g.times[i - 1])) {
      throw InvalidGait("waypoint times must be strictly increasing");
    }
  }
  if (!(g.period > g.times.back())) {
    throw InvalidGait("period must exceed the last waypoint time");
  }
  const auto d = g.points.front().size();
  if (d < 1) throw InvalidGait("gait needs at least one shape coordinate");
  for (const auto& p : g.points) {
    if (p.size() != d) throw DimensionMismatch("waypoints must share one dimension");
    if (!p.allFinite()) throw InvalidGait("waypoints must be finite");
  }
}

// Reduces t into [0, T); with Left, an exact multiple of T maps to T instead.
double reduce(double t, double period, KnotSide side) {
  double tau = t - period * std::floor(t / period);
  if (tau < 0.0) tau += period;
  if (tau >= period) tau = 0.0;
  if (side == KnotSide::Left && tau == 0.0) tau = period;
  return tau;
}

GaitSample eval_fourier(const FourierGait& g, double t) {
  const double tau = reduce(t, g.period, KnotSide::Right);
  const double base = kTwoPi * tau / g.period;
  GaitSample out{g.mean, Eigen::VectorXd::Zero(g.mean.size())};
  for (Eigen::Index k = 0; k < g.cos_coeffs.cols(); ++k) {
    const double freq = kTwoPi * static_cast<double>(k + 1) / g.period;
    const double phase = static_cast<double>(k + 1) * base;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    out.r += c * g.cos_coeffs.col(k) + s * g.sin_coeffs.col(k);
    out.rdot += freq * (c * g.sin_coeffs.col(k) - s * g.cos_coeffs.col(k));
  }
  return out;
}

GaitSample eval_waypoints(const WaypointGait& g, double t, KnotSide side) {
  const double tau = reduce(t, g.period, side);
  const auto n = g.times.size();
  // Segment i runs from times[i] to times[i+1] (or to the period for the last).
  std::size_t i;
  if (side == KnotSide::Right) {
    i = static_cast<std::size_t>(std::upper_bound(g.times.begin(), g.times.end(), tau) -
                                 g.times.begin()) - 1;
  } else {
    i = static_cast<std::size_t>(std::lower_bound(g.times.begin(), g.times.end(), tau) -
                                 g.times.begin()) - 1;
  }
  const double t0 = g.times[i];
  const double t1 = i + 1 < n ? g.times[i + 1] : g.period;
  const Shape& p0 = g.points[i];
  const Shape& p1 = g.points[(i + 1) % n];
  const double span = t1 - t0;
  const double lambda = (tau - t0) / span;
  GaitSample out;
  out.rdot = (p1 - p0) / span;
  // Exact endpoints keep r(0) == r(T) bit-for-bit.
  if (lambda == 0.0) {
    out.r = p0;
  } else if (lambda == 1.0) {
    out.r = p1;
  } else {
    out.r = p0 + lambda * (p1 - p0);
  }
  return out;
}

}  // namespace

void check_dimension(Eigen::Index actual, Eigen::Index expected, const char* what) {
  if (actual != expected) {
    throw DimensionMismatch(std::string(what) + ": expected dimension " +
                            std::to_string(expected) + ", got " + std::to_string(actual));
  }
}

Gait::Gait(FourierGait fourier) : rep_(std::move(fourier)) {
  validate(std::get<FourierGait>(rep_));
}

Gait::Gait(WaypointGait waypoints) : rep_(std::move(waypoints)) {
  validate(std::get<WaypointGait>(rep_));
}

Gait Gait::waypoints(std::vector<Shape> points, double period) {
  if (points.size() >= 2 && points.back().size() == points.front().size() &&
      points.back() == points.front()) {
    points.pop_back();
  }
  std::vector<double> times(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    times[i] = period * static_cast<double>(i) / static_cast<double>(points.size());
  }
  return Gait(WaypointGait{period, std::move(points), std::move(times)});
}

Gait Gait::waypoints(std::vector<Shape> points, std::vector<double> times, double period) {
  if (points.size() == times.size() + 1 && points.size() >= 2 &&
      points.back().size() == points.front().size() && points.back() == points.front()) {
    points.pop_back();
  }
  return Gait(WaypointGait{period, std::move(points), std::move(times)});
}

Gait Gait::sinusoid(const Eigen::VectorXd& offset, const Eigen::VectorXd& amplitude,
                    const Eigen::VectorXd& phase, double period) {
  const auto d = offset.size();
  if (amplitude.size() != d || phase.size() != d) {
    throw DimensionMismatch("sinusoid offset, amplitude and phase must share one dimension");
  }
  FourierGait g;
  g.period = period;
  g.mean = offset;
  // a sin(u + phi) = a cos(phi) sin(u) + a sin(phi) cos(u)
  g.sin_coeffs = (amplitude.array() * phase.array().cos()).matrix();
  g.cos_coeffs = (amplitude.array() * phase.array().sin()).matrix();
  return Gait(std::move(g));
}

double Gait::period() const {
  return std::visit([](const auto& g) { return g.period; }, rep_);
}

Eigen::Index Gait::dim() const {
  if (const auto* f = fourier()) return f->mean.size();
  return waypoint()->points.front().size();
}

std::vector<double> Gait::breakpoints() const {
  if (const auto* w = waypoint()) return w->times;
  return {};
}

GaitSample Gait::evaluate(double t, KnotSide side) const {
  if (!std::isfinite(t)) throw InvalidGait("gait evaluated at a non-finite time");
  if (const auto* f = fourier()) return eval_fourier(*f, t);
  return eval_waypoints(*waypoint(), t, side);
}

GaitSample gait_eval(const Gait& gait, double t) { return gait.evaluate(t); }

Gait to_waypoints(const Gait& gait, int resolution) {
  if (gait.waypoint() != nullptr) return gait;
  if (resolution < 2) throw InvalidGait("resampling resolution must be at least 2");
  std::vector<Shape> points;
  std::vector<double> times;
  points.reserve(static_cast<std::size_t>(resolution));
  for (int i = 0; i < resolution; ++i) {
    const double t = gait.period() * static_cast<double>(i) / resolution;
    points.push_back(gait.shape_at(t));
    times.push_back(t);
  }
  return Gait(WaypointGait{gait.period(), std::move(points), std::move(times)});
}

Gait reparameterize(const Gait& gait, const TimeWarp& warp, int resolution) {
  const Gait base = to_waypoints(gait, resolution);
  const WaypointGait& w = *base.waypoint();
  const double start = warp(0.0);
  if (std::abs(start) > 1e-12 * w.period) throw InvalidGait("time warp must map 0 to 0");

  // Monotonicity is checked on the knots and on a dense sample of [0, T].
  constexpr int kChecks = 1000;
  double prev = 0.0;
  for (int i = 1; i <= kChecks; ++i) {
    const double v = warp(w.period * static_cast<double>(i) / kChecks);
    if (!(v > prev) || !std::isfinite(v)) throw InvalidGait("time warp must be strictly increasing");
    prev = v;
  }
  std::vector<double> times(w.times.size());
  times[0] = 0.0;
  for (std::size_t i = 1; i < w.times.size(); ++i) times[i] = warp(w.times[i]);
  const double period = warp(w.period);
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InvalidGait("time warp must be strictly increasing");
  }
  if (!(period > times.back())) throw InvalidGait("time warp must be strictly increasing");
  return Gait(WaypointGait{period, w.points, std::move(times)});
}

Gait retrace(const Gait& gait, int resolution) {
  const Gait base = to_waypoints(gait, resolution);
  const WaypointGait& w = *base.waypoint();
  const auto n = w.points.size();
  std::vector<Shape> points = w.points;
  std::vector<double> times = w.times;
  // Back from points[0] (reached at T) through points[n-1] ... points[1].
  points.push_back(w.points.front());
  times.push_back(w.period);
  for (std::size_t k = n - 1; k >= 1; --k) {
    points.push_back(w.points[k]);
    times.push_back(2.0 * w.period - w.times[k]);
  }
  return Gait(WaypointGait{2.0 * w.period, std::move(points), std::move(times)});
}

}  // namespace locomo

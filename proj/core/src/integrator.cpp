#include "locomo/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace locomo {

Twist dexp_inv(const Twist& u, const Twist& xi) {
  const Twist first = bracket(u, xi);
  return xi + 0.5 * first + (1.0 / 12.0) * bracket(u, first);
}

namespace {

class Stepper {
 public:
  Stepper(const ConnectionProvider& provider, const Gait& gait, const IntegratorSettings& settings,
          const Pose& start, Trajectory& out)
      : provider_(provider), gait_(gait), settings_(settings), g_(start), out_(out) {}

  void run() {
    const double period = gait_.period();
    const GaitSample s0 = gait_.evaluate(0.0);
    push_sample(0.0, s0.r);

    std::vector<double> knots = gait_.breakpoints();
    if (knots.empty()) knots.push_back(0.0);
    knots.push_back(period);

    for (int cycle = 0; cycle < settings_.cycles; ++cycle) {
      offset_ = cycle * period;
      for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double a = knots[k];
        const double b = knots[k + 1];
        const auto n = std::max<long>(1, static_cast<long>(std::ceil((b - a) / settings_.step - 1e-9)));
        for (long j = 0; j < n; ++j) {
          const double t0 = a + (b - a) * static_cast<double>(j) / static_cast<double>(n);
          const double t1 = j + 1 == n ? b : a + (b - a) * static_cast<double>(j + 1) / static_cast<double>(n);
          const std::size_t events_before = out_.events.size();
          advance(t0, t1);
          if (out_.events.size() > events_before + 1) {
            std::ostringstream msg;
            msg << "multiple contact switches within the step starting at t="
                << offset_ + t0 << "; step was split recursively";
            out_.warnings.push_back(msg.str());
          }
          const bool boundary = j + 1 == n && k + 2 == knots.size();
          if (settings_.record_samples || boundary) push_sample(offset_ + t1, current_shape_);
        }
      }
    }
    finish();
  }

 private:
  ContactSet select(const Shape& r) const { return provider_.select(r); }

  // Integrates the local interval [t0, t1], splitting at contact switches.
  void advance(double t0, double t1) {
    while (t1 > t0) {
      const Shape r0 = gait_.evaluate(t0).r;
      const ContactSet c0 = select(r0);
      if (!provider_.switching()) {
        rk_step(t0, t1, c0);
        return;
      }
      const double mid = 0.5 * (t0 + t1);
      double lo = t0;
      double hi = t1;
      bool found = false;
      if (!(select(gait_.evaluate(mid).r) == c0)) {
        hi = mid;
        found = true;
      } else if (!(select(gait_.evaluate(t1, KnotSide::Left).r) == c0)) {
        lo = mid;
        found = true;
      }
      if (!found) {
        rk_step(t0, t1, c0);
        return;
      }
      while (hi - lo > settings_.event_tol) {
        const double m = 0.5 * (lo + hi);
        if (m <= lo || m >= hi) break;
        if (select(gait_.evaluate(m).r) == c0) {
          lo = m;
        } else {
          hi = m;
        }
      }
      rk_step(t0, hi, c0);
      const Shape r_switch = gait_.evaluate(hi).r;
      out_.events.push_back({offset_ + 0.5 * (lo + hi), offset_ + lo, offset_ + hi, c0,
                             select(r_switch), r_switch});
      // The switch point becomes a sample so every recorded interval runs on
      // one piece; a switch on the step end is covered by the regular sample.
      if (settings_.record_samples && hi < t1) push_sample(offset_ + hi, current_shape_);
      t0 = hi;
    }
  }

  Twist stage_twist(const GaitSample& s, const ContactSet& c) {
    const Twist xi = apply(provider_.evaluate_piece(s.r, c), s.rdot);
    out_.max_twist_norm = std::max(out_.max_twist_norm, xi.norm());
    return xi;
  }

  void rk_step(double t0, double t1, const ContactSet& c) {
    const double h = t1 - t0;
    const GaitSample s0 = gait_.evaluate(t0, KnotSide::Right);
    const GaitSample sm = gait_.evaluate(t0 + 0.5 * h, KnotSide::Right);
    const GaitSample s1 = gait_.evaluate(t1, KnotSide::Left);

    const Twist xi0 = stage_twist(s0, c);
    const Twist xim = stage_twist(sm, c);
    const Twist xi1 = stage_twist(s1, c);

    const Twist k1 = xi0;
    const Twist k2 = dexp_inv(0.5 * h * k1, xim);
    const Twist k3 = dexp_inv(0.5 * h * k2, xim);
    const Twist k4 = dexp_inv(h * k3, xi1);
    const Twist u = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    g_ = compose(g_, exp(u));
    current_shape_ = s1.r;

    // The step leaving the last recorded sample is described by its start.
    if (pending_twist_) {
      out_.twists.back() = xi0;
      out_.contacts.back() = c;
      pending_twist_ = false;
    }
  }

  void push_sample(double t, const Shape& r) {
    out_.times.push_back(t);
    out_.poses.push_back(g_);
    out_.shapes.push_back(r);
    out_.twists.push_back({});
    out_.contacts.push_back({});
    pending_twist_ = true;
  }

  void finish() {
    // Final sample: active piece and right-hand derivative at the cycle end.
    const GaitSample s = gait_.evaluate(0.0);
    const ContactSet c = select(s.r);
    out_.twists.back() = apply(provider_.evaluate_piece(s.r, c), s.rdot);
    out_.contacts.back() = c;
    pending_twist_ = false;
  }

  const ConnectionProvider& provider_;
  const Gait& gait_;
  const IntegratorSettings& settings_;
  Pose g_;
  Trajectory& out_;
  double offset_ = 0.0;
  Shape current_shape_;
  bool pending_twist_ = false;
};

}  // namespace

Trajectory integrate_gait(const ConnectionProvider& provider, const Gait& gait,
                          const IntegratorSettings& settings, const Pose& start) {
  if (!(settings.step > 0.0) || !std::isfinite(settings.step)) {
    throw std::invalid_argument("integrator step must be positive");
  }
  if (!(settings.event_tol > 0.0)) throw std::invalid_argument("event tolerance must be positive");
  if (settings.cycles < 1) throw std::invalid_argument("at least one gait cycle is required");
  check_dimension(gait.dim(), provider.dim(), "gait");

  Trajectory traj;
  traj.period = gait.period();
  traj.cycles = settings.cycles;
  traj.step = settings.step;
  traj.event_tol = settings.event_tol;
  traj.has_contacts = provider.switching();
  Stepper(provider, gait, settings, start, traj).run();
  return traj;
}

NetDisplacement net_displacement(const Trajectory& traj) {
  if (traj.times.empty() || !(traj.period > 0.0)) {
    throw std::invalid_argument("trajectory has no samples or no period");
  }
  const double t0 = traj.times.front();
  const double span = (traj.times.back() - t0) / traj.period;
  const double cycles = std::round(span);
  const double tol = 1e-9;
  if (cycles < 1.0 || std::abs(span - cycles) > tol) {
    throw std::invalid_argument("trajectory does not span an integer number of cycles");
  }
  std::vector<std::size_t> boundaries;
  std::size_t k = 0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double target = t0 + static_cast<double>(k) * traj.period;
    if (std::abs(traj.times[i] - target) <= tol * traj.period) {
      boundaries.push_back(i);
      ++k;
    }
  }
  if (boundaries.size() != static_cast<std::size_t>(cycles) + 1) {
    throw std::invalid_argument("trajectory is missing cycle-boundary samples");
  }
  NetDisplacement out;
  out.total = log(compose(inverse(traj.poses.front()), traj.poses.back()));
  for (std::size_t c = 0; c + 1 < boundaries.size(); ++c) {
    out.per_cycle.push_back(
        log(compose(inverse(traj.poses[boundaries[c]]), traj.poses[boundaries[c + 1]])));
  }
  return out;
}

}  // namespace locomo

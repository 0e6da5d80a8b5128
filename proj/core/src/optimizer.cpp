#include "locomo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>

#include "locomo/models.hpp"

namespace locomo {

namespace {

constexpr double kAlpha = 1.0;  // reflection
constexpr double kGamma = 2.0;  // expansion
constexpr double kRho = 0.5;    // contraction
constexpr double kSigma = 0.5;  // shrink

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::VectorXd project(Eigen::VectorXd x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

// One seed's search. Minimizes cost = -objective internally.
class SimplexSearch {
 public:
  SimplexSearch(const ScalarObjective& f, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                const OptimizerSettings& settings, int seed_index, int budget)
      : f_(f), lo_(lo), hi_(hi), settings_(settings), seed_(seed_index), budget_(budget) {}

  std::vector<EvaluationRecord> run(std::string& termination) {
    const auto n = lo_.size();
    Eigen::VectorXd start = 0.5 * (lo_ + hi_);
    if (seed_ > 0) {
      std::seed_seq seq{static_cast<std::uint64_t>(settings_.seed),
                        static_cast<std::uint64_t>(seed_)};
      std::mt19937_64 rng(seq);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (Eigen::Index i = 0; i < n; ++i) start[i] = lo_[i] + unit(rng) * (hi_[i] - lo_[i]);
    }
    termination = "budget";
    double best_before_restart = std::numeric_limits<double>::infinity();
    while (remaining() >= n + 1) {
      if (!init_simplex(start)) break;
      if (!iterate()) break;
      // Converged with budget left: restart around the best point unless the
      // previous restart already failed to improve it.
      const double best = cost_[0];
      if (!(best < best_before_restart)) {
        termination = "converged";
        break;
      }
      best_before_restart = best;
      start = simplex_[0];
    }
    return std::move(history_);
  }

 private:
  int remaining() const { return budget_ - static_cast<int>(history_.size()); }

  // Returns false when the budget is exhausted.
  bool evaluate(const Eigen::VectorXd& x, double& cost) {
    if (remaining() <= 0) return false;
    double value = f_(x);
    if (std::isnan(value)) value = kNegInf;
    history_.push_back({x, value, seed_});
    cost = -value;
    return true;
  }

  bool init_simplex(const Eigen::VectorXd& start) {
    const auto n = lo_.size();
    simplex_.assign(static_cast<std::size_t>(n + 1), project(start, lo_, hi_));
    cost_.assign(static_cast<std::size_t>(n + 1), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double delta = settings_.initial_step * (hi_[i] - lo_[i]);
      Eigen::VectorXd& v = simplex_[static_cast<std::size_t>(i + 1)];
      v[i] = v[i] + delta <= hi_[i] ? v[i] + delta : v[i] - delta;
      v = project(v, lo_, hi_);
    }
    for (std::size_t k = 0; k < simplex_.size(); ++k) {
      if (!evaluate(simplex_[k], cost_[k])) return false;
    }
    return true;
  }

  void order() {
    std::vector<std::size_t> idx(simplex_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return cost_[a] < cost_[b]; });
    std::vector<Eigen::VectorXd> s;
    std::vector<double> c;
    for (std::size_t k : idx) {
      s.push_back(simplex_[k]);
      c.push_back(cost_[k]);
    }
    simplex_ = std::move(s);
    cost_ = std::move(c);
  }

  bool converged() const {
    double fspread = 0.0;
    double xspread = 0.0;
    for (std::size_t k = 1; k < simplex_.size(); ++k) {
      fspread = std::max(fspread, std::abs(cost_[k] - cost_[0]));
      xspread = std::max(xspread, (simplex_[k] - simplex_[0]).cwiseAbs().maxCoeff());
    }
    if (!std::isfinite(cost_[0])) return false;
    return fspread <= settings_.ftol && xspread <= settings_.xtol;
  }

  // Runs until convergence (true) or budget exhaustion (false).
  bool iterate() {
    const std::size_t n = simplex_.size() - 1;
    while (true) {
      order();
      if (converged()) return true;
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(lo_.size());
      for (std::size_t k = 0; k < n; ++k) centroid += simplex_[k];
      centroid /= static_cast<double>(n);
      const Eigen::VectorXd& worst = simplex_[n];

      const Eigen::VectorXd xr = project(centroid + kAlpha * (centroid - worst), lo_, hi_);
      double fr;
      if (!evaluate(xr, fr)) return false;

      if (fr < cost_[0]) {
        const Eigen::VectorXd xe = project(centroid + kGamma * (xr - centroid), lo_, hi_);
        double fe;
        if (!evaluate(xe, fe)) return false;
        if (fe < fr) {
          replace_worst(xe, fe);
        } else {
          replace_worst(xr, fr);
        }
        continue;
      }
      if (fr < cost_[n - 1]) {
        replace_worst(xr, fr);
        continue;
      }
      if (fr < cost_[n]) {
        const Eigen::VectorXd xc = project(centroid + kRho * (xr - centroid), lo_, hi_);
        double fc;
        if (!evaluate(xc, fc)) return false;
        if (fc <= fr) {
          replace_worst(xc, fc);
          continue;
        }
      } else {
        const Eigen::VectorXd xc = project(centroid + kRho * (worst - centroid), lo_, hi_);
        double fc;
        if (!evaluate(xc, fc)) return false;
        if (fc < cost_[n]) {
          replace_worst(xc, fc);
          continue;
        }
      }
      for (std::size_t k = 1; k <= n; ++k) {
        simplex_[k] = project(simplex_[0] + kSigma * (simplex_[k] - simplex_[0]), lo_, hi_);
        if (!evaluate(simplex_[k], cost_[k])) return false;
      }
    }
  }

  void replace_worst(const Eigen::VectorXd& x, double cost) {
    simplex_.back() = x;
    cost_.back() = cost;
  }

  const ScalarObjective& f_;
  const Eigen::VectorXd& lo_;
  const Eigen::VectorXd& hi_;
  const OptimizerSettings& settings_;
  int seed_;
  int budget_;
  std::vector<Eigen::VectorXd> simplex_;
  std::vector<double> cost_;
  std::vector<EvaluationRecord> history_;
};

}  // namespace

DisplacementObjective DisplacementObjective::parse(const std::string& text) {
  DisplacementObjective out;
  std::string body = text;
  if (!body.empty() && body.front() == '-') {
    out.sign = -1.0;
    body.erase(0, 1);
  }
  if (body == "x") {
    out.component = Component::X;
  } else if (body == "y") {
    out.component = Component::Y;
  } else if (body == "theta") {
    out.component = Component::Theta;
  } else if (body == "planar" && out.sign > 0.0) {
    out.component = Component::Planar;
  } else {
    throw std::invalid_argument("unknown objective '" + text +
                                "' (expected x, y, theta, their negations, or planar)");
  }
  return out;
}

std::string DisplacementObjective::to_string() const {
  std::string name;
  switch (component) {
    case Component::X: name = "x"; break;
    case Component::Y: name = "y"; break;
    case Component::Theta: name = "theta"; break;
    case Component::Planar: name = "planar"; break;
  }
  return sign < 0.0 ? "-" + name : name;
}

double objective_displacement(const ConnectionProvider& provider, const Gait& gait,
                              const DisplacementObjective& objective,
                              const IntegratorSettings& settings) {
  IntegratorSettings run = settings;
  run.record_samples = false;
  Twist total;
  try {
    total = net_displacement(integrate_gait(provider, gait, run)).total;
  } catch (const SingularConstraint&) {
    return kNegInf;
  } catch (const DegenerateStance&) {
    return kNegInf;
  }
  const double cycles = static_cast<double>(run.cycles);
  double value = 0.0;
  switch (objective.component) {
    case DisplacementObjective::Component::X: value = total.vx; break;
    case DisplacementObjective::Component::Y: value = total.vy; break;
    case DisplacementObjective::Component::Theta: value = total.omega; break;
    case DisplacementObjective::Component::Planar: value = std::hypot(total.vx, total.vy); break;
  }
  return objective.sign * value / cycles;
}

Eigen::VectorXd GaitFamily::lower() const {
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) v[i] = parameters[static_cast<std::size_t>(i)].lower;
  return v;
}

Eigen::VectorXd GaitFamily::upper() const {
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) v[i] = parameters[static_cast<std::size_t>(i)].upper;
  return v;
}

void GaitFamily::validate() const {
  Gait check(base);
  if (parameters.empty()) throw std::invalid_argument("gait family has no free parameters");
  const auto d = base.mean.size();
  const auto harmonics = base.cos_coeffs.cols();
  for (const auto& p : parameters) {
    if (!(p.upper > p.lower) || !std::isfinite(p.lower) || !std::isfinite(p.upper)) {
      throw std::invalid_argument("parameter '" + p.name + "' needs finite bounds with upper > lower");
    }
    if (p.coordinates.empty()) {
      throw std::invalid_argument("parameter '" + p.name + "' targets no coordinate");
    }
    for (int c : p.coordinates) {
      if (c < 0 || c >= d) {
        throw std::invalid_argument("parameter '" + p.name + "' targets a missing coordinate");
      }
    }
    if (p.kind != FamilyParameter::Kind::Mean && (p.harmonic < 1 || p.harmonic > harmonics)) {
      throw std::invalid_argument("parameter '" + p.name + "' targets a missing harmonic");
    }
  }
}

Gait GaitFamily::instantiate(const Eigen::VectorXd& p) const {
  if (p.size() != size()) {
    throw DimensionMismatch("gait family expects " + std::to_string(size()) + " parameters");
  }
  FourierGait g = base;
  // Polar edits are collected per (coordinate, harmonic) and applied last.
  std::map<std::pair<int, int>, std::pair<double, double>> polar;
  auto polar_entry = [&](int c, int k) -> std::pair<double, double>& {
    auto it = polar.find({c, k});
    if (it == polar.end()) {
      const double a = g.cos_coeffs(c, k - 1);
      const double b = g.sin_coeffs(c, k - 1);
      it = polar.emplace(std::make_pair(c, k), std::make_pair(std::hypot(a, b), std::atan2(a, b)))
               .first;
    }
    return it->second;
  };
  for (int i = 0; i < size(); ++i) {
    const FamilyParameter& fp = parameters[static_cast<std::size_t>(i)];
    for (int c : fp.coordinates) {
      switch (fp.kind) {
        case FamilyParameter::Kind::Mean: g.mean[c] = p[i]; break;
        case FamilyParameter::Kind::Cos: g.cos_coeffs(c, fp.harmonic - 1) = p[i]; break;
        case FamilyParameter::Kind::Sin: g.sin_coeffs(c, fp.harmonic - 1) = p[i]; break;
        case FamilyParameter::Kind::Amplitude: polar_entry(c, fp.harmonic).first = p[i]; break;
        case FamilyParameter::Kind::Phase: polar_entry(c, fp.harmonic).second = p[i]; break;
      }
    }
  }
  for (const auto& [key, value] : polar) {
    const auto [c, k] = key;
    g.sin_coeffs(c, k - 1) = value.first * std::cos(value.second);
    g.cos_coeffs(c, k - 1) = value.first * std::sin(value.second);
  }
  return Gait(std::move(g));
}

OptimizationReport nelder_mead_maximize(const ScalarObjective& f, const Eigen::VectorXd& lower,
                                        const Eigen::VectorXd& upper,
                                        const OptimizerSettings& settings) {
  const auto n = lower.size();
  if (n < 1 || upper.size() != n) throw std::invalid_argument("bounds must be nonempty and match");
  if (!((upper - lower).array() > 0.0).all()) {
    throw std::invalid_argument("every upper bound must exceed its lower bound");
  }
  if (settings.budget < n + 2) {
    throw std::invalid_argument("optimizer budget must be at least dimension + 2");
  }
  if (settings.seeds < 1) throw std::invalid_argument("optimizer needs at least one seed");

  const int seeds = std::max(1, std::min<int>(settings.seeds, settings.budget / static_cast<int>(n + 2)));
  std::vector<int> budgets(static_cast<std::size_t>(seeds), settings.budget / seeds);
  for (int s = 0; s < settings.budget % seeds; ++s) ++budgets[static_cast<std::size_t>(s)];

  std::vector<std::vector<EvaluationRecord>> histories(static_cast<std::size_t>(seeds));
  std::vector<std::string> reasons(static_cast<std::size_t>(seeds));
  auto run_seed = [&](int s) {
    const auto k = static_cast<std::size_t>(s);
    histories[k] = SimplexSearch(f, lower, upper, settings, s, budgets[k]).run(reasons[k]);
  };
  if (settings.threads > 1) {
    std::vector<std::future<void>> jobs;
    for (int s = 0; s < seeds; ++s) jobs.push_back(std::async(std::launch::async, run_seed, s));
    for (auto& j : jobs) j.get();
  } else {
    for (int s = 0; s < seeds; ++s) run_seed(s);
  }

  OptimizationReport report;
  report.best_objective = kNegInf;
  for (auto& h : histories) {
    for (auto& rec : h) report.history.push_back(std::move(rec));
  }
  for (const auto& rec : report.history) {
    if (rec.objective > report.best_objective || report.best_params.size() == 0) {
      report.best_objective = rec.objective;
      report.best_params = rec.params;
    }
  }
  report.evaluations = static_cast<int>(report.history.size());
  const bool all_converged =
      std::all_of(reasons.begin(), reasons.end(), [](const auto& r) { return r == "converged"; });
  report.termination = all_converged ? "converged" : "budget";
  return report;
}

OptimizationReport optimize(const ConnectionProvider& provider, const GaitFamily& family,
                            const DisplacementObjective& objective,
                            const IntegratorSettings& integrator, const OptimizerSettings& settings) {
  family.validate();
  check_dimension(family.base.mean.size(), provider.dim(), "gait family");
  const ScalarObjective f = [&](const Eigen::VectorXd& p) {
    return objective_displacement(provider, family.instantiate(p), objective, integrator);
  };
  return nelder_mead_maximize(f, family.lower(), family.upper(), settings);
}

}  // namespace locomo

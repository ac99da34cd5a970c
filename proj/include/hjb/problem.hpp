#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "hjb/types.hpp"

namespace hjb {

using DynamicsFn = std::function<Vec(const Vec& x, const Vec& u, double t)>;
using RunningCostFn = std::function<double(const Vec& x, const Vec& u, double t)>;
using TerminalCostFn = std::function<double(const Vec& x)>;
using LevelFn = std::function<double(const Vec& x)>;

/// Optional sup/Lipschitz bounds of the problem data, used by diagnostics.
struct ProblemBounds {
  std::optional<double> max_dynamics;       // sup |f|
  std::optional<double> max_running_cost;   // sup |running cost|
  std::optional<double> max_terminal_cost;  // sup |terminal cost|
  std::optional<double> lip_dynamics;
  std::optional<double> lip_running_cost;
  std::optional<double> lip_terminal_cost;

  void validate() const {
    for (const auto& b : {max_dynamics, max_running_cost, max_terminal_cost, lip_dynamics,
                          lip_running_cost, lip_terminal_cost})
      if (b && !(*b >= 0.0))
        throw std::invalid_argument("ProblemBounds: bounds must be nonnegative");
  }
};

/// The continuous control problem: dynamics, costs, discount and horizon.
struct ProblemSpec {
  int dim_state = 0;
  int dim_control = 0;
  DynamicsFn dynamics;
  RunningCostFn running_cost;
  TerminalCostFn terminal_cost;
  double discount = 0.0;  // lambda >= 0
  double t_start = 0.0;
  double t_end = 0.0;
  std::optional<ProblemBounds> bounds;

  void validate() const {
    if (dim_state < 1) throw std::invalid_argument("ProblemSpec: dim_state must be >= 1");
    if (dim_control < 1) throw std::invalid_argument("ProblemSpec: dim_control must be >= 1");
    if (dim_state > kMaxDim)
      throw std::invalid_argument("ProblemSpec: dim_state exceeds compiled-in maximum");
    if (!(t_end > t_start)) throw std::invalid_argument("ProblemSpec: requires t_end > t_start");
    if (!(discount >= 0.0)) throw std::invalid_argument("ProblemSpec: discount must be >= 0");
    if (!dynamics || !running_cost || !terminal_cost)
      throw std::invalid_argument("ProblemSpec: dynamics and costs must be set");
    if (bounds) bounds->validate();
  }
};

/// Obstacle region described by a scalar level function. The excluded region
/// is {phi <= 0} (Leq) or {phi >= 0} (Geq); its boundary stays admissible.
struct Obstacle {
  enum class Sense { Leq, Geq };

  LevelFn level_fn;
  Sense sense = Sense::Leq;

  /// True iff x lies strictly inside the obstacle region.
  bool strictly_inside(const Vec& x) const {
    const double phi = level_fn(x);
    return sense == Sense::Leq ? phi < 0.0 : phi > 0.0;
  }
};

/// Admissible region: a closed coordinate box minus a list of open obstacle
/// interiors. Box entries may be +-infinity.
struct ConstraintSet {
  Vec domain_lo;
  Vec domain_hi;
  std::vector<Obstacle> obstacles;

  static ConstraintSet unbounded(int dim) {
    ConstraintSet c;
    c.domain_lo = Vec::Constant(dim, -std::numeric_limits<double>::infinity());
    c.domain_hi = Vec::Constant(dim, std::numeric_limits<double>::infinity());
    return c;
  }

  static ConstraintSet box(const Vec& lo, const Vec& hi) {
    if (lo.size() != hi.size())
      throw std::invalid_argument("ConstraintSet: lo/hi dimension mismatch");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      if (!(lo[i] <= hi[i])) throw std::invalid_argument("ConstraintSet: requires lo <= hi");
    ConstraintSet c;
    c.domain_lo = lo;
    c.domain_hi = hi;
    return c;
  }

  int dim() const { return static_cast<int>(domain_lo.size()); }
};

/// Finite discretized control set u_1..u_M. Order is significant: ties in
/// every argmin are broken toward the lowest index.
class ControlGrid {
 public:
  explicit ControlGrid(std::vector<Vec> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("ControlGrid: needs at least one control");
    const Eigen::Index m = points_[0].size();
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i].size() != m)
        throw std::invalid_argument("ControlGrid: inconsistent control dimensions");
      for (std::size_t j = 0; j < i; ++j)
        if (points_[i] == points_[j])
          throw std::invalid_argument("ControlGrid: duplicate control point");
    }
  }

  int size() const { return static_cast<int>(points_.size()); }
  int dim() const { return static_cast<int>(points_[0].size()); }
  const Vec& operator[](int j) const { return points_[static_cast<std::size_t>(j)]; }
  const std::vector<Vec>& points() const { return points_; }

 private:
  std::vector<Vec> points_;
};

/// Uniform time grid t_n = t_start + n*h covering [t_start, t_end].
struct TimeGrid {
  double t_start = 0.0;
  double t_end = 0.0;
  double step = 0.0;
  int n_steps = 0;

  static TimeGrid from_step(double t_start, double t_end, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("TimeGrid: step must be positive");
    const double span = t_end - t_start;
    if (!(span > 0.0)) throw std::invalid_argument("TimeGrid: empty horizon");
    const int n = static_cast<int>(std::llround(span / h));
    TimeGrid tg{t_start, t_end, h, n};
    tg.validate();
    return tg;
  }

  static TimeGrid from_steps(double t_start, double t_end, int n) {
    if (n < 1) throw std::invalid_argument("TimeGrid: n_steps must be positive");
    return TimeGrid{t_start, t_end, (t_end - t_start) / n, n};
  }

  double time_at(int n) const { return t_start + n * step; }

  void validate() const {
    if (n_steps < 1 || !(step > 0.0)) throw std::invalid_argument("TimeGrid: invalid grid");
    const double span = t_end - t_start;
    if (std::abs(step * n_steps - span) > 1e-12 * std::max(1.0, std::abs(span)))
      throw std::invalid_argument("TimeGrid: step*n_steps does not match the horizon");
  }
};

/// True iff x is inside the box and not strictly inside any obstacle.
inline bool is_admissible(const ConstraintSet& c, const Vec& x) {
  if (x.size() != c.domain_lo.size()) {
    std::ostringstream os;
    os << "is_admissible: state dimension " << x.size() << " != constraint dimension "
       << c.domain_lo.size();
    throw std::invalid_argument(os.str());
  }
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!(x[i] >= c.domain_lo[i]) || !(x[i] <= c.domain_hi[i])) return false;
  for (const Obstacle& o : c.obstacles)
    if (o.strictly_inside(x)) return false;
  return true;
}

/// One explicit Euler step x + h*f(x,u,t_n).
inline Vec euler_step(const ProblemSpec& p, const Vec& x, const Vec& u, double t_n, double h) {
  Vec v = p.dynamics(x, u, t_n);
  if (!v.allFinite()) {
    std::ostringstream os;
    os << "euler_step: non-finite dynamics at t=" << t_n << ", x=[" << x.transpose() << "], u=["
       << u.transpose() << "]";
    throw SolverError(os.str());
  }
  return x + h * v;
}

/// Indices of controls whose one-step Euler image stays admissible.
inline std::vector<int> admissible_controls(const ProblemSpec& p, const ConstraintSet& c,
                                            const ControlGrid& grid, const Vec& x, double t_n,
                                            double h) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(grid.size()));
  for (int j = 0; j < grid.size(); ++j)
    if (is_admissible(c, euler_step(p, x, grid[j], t_n, h))) out.push_back(j);
  return out;
}

/// Largest step in the geometric sweep {h_max, h_max/2, ..., h_max/2^20} that
/// leaves every sample with at least one admissible control; nullopt if the
/// sweep exhausts.
inline std::optional<double> find_viable_step(const ProblemSpec& p, const ConstraintSet& c,
                                              const ControlGrid& grid,
                                              const std::vector<Vec>& samples, double h_max) {
  if (samples.empty()) throw std::invalid_argument("find_viable_step: empty sample list");
  if (!(h_max > 0.0)) throw std::invalid_argument("find_viable_step: h_max must be positive");
  double h = h_max;
  for (int k = 0; k <= 20; ++k, h *= 0.5) {
    bool ok = true;
    for (const Vec& x : samples) {
      if (admissible_controls(p, c, grid, x, p.t_start, h).empty()) {
        ok = false;
        break;
      }
    }
    if (ok) return h;
  }
  return std::nullopt;
}

/// Distinguished "stop" control: every entry NaN. Dynamics wrappers produced
/// by with_stopping intercept it before user code sees it.
inline Vec stop_control(int dim_control) {
  return Vec::Constant(dim_control, std::numeric_limits<double>::quiet_NaN());
}

inline bool is_stop_control(const Vec& u) {
  return u.size() > 0 && std::isnan(u[0]);
}

/// Reformulates an optimal stopping problem as an infinite horizon one by
/// appending a control with zero drift and running cost g(x)/lambda.
inline std::pair<ProblemSpec, ControlGrid> with_stopping(const ProblemSpec& p,
                                                         const ControlGrid& grid) {
  if (!(p.discount > 0.0))
    throw std::invalid_argument("with_stopping: requires a positive discount");
  ProblemSpec q = p;
  const double lambda = p.discount;
  const int d = p.dim_state;
  q.dynamics = [f = p.dynamics, d](const Vec& x, const Vec& u, double t) -> Vec {
    if (is_stop_control(u)) return Vec::Zero(d);
    return f(x, u, t);
  };
  q.running_cost = [ell = p.running_cost, g = p.terminal_cost, lambda](const Vec& x, const Vec& u,
                                                                       double t) -> double {
    if (is_stop_control(u)) return g(x) / lambda;
    return ell(x, u, t);
  };
  std::vector<Vec> pts = grid.points();
  pts.push_back(stop_control(grid.dim()));
  return {std::move(q), ControlGrid(std::move(pts))};
}

}  // namespace hjb

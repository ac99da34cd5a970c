#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "hjb/detail/parallel.hpp"
#include "hjb/feedback.hpp"
#include "hjb/problem.hpp"

namespace hjb {

/// Uniform node-centered grid over a box, with a per-node admissibility
/// mask. Values are stored compactly over the admissible nodes only; masked
/// nodes read as +inf.
class UniformGrid {
 public:
  UniformGrid(const ConstraintSet& c, const Vec& lo, const Vec& hi, double dx) : lo_(lo), dx_(dx) {
    const int d = static_cast<int>(lo.size());
    if (hi.size() != d) throw std::invalid_argument("UniformGrid: lo/hi dimension mismatch");
    if (!(dx > 0.0)) throw std::invalid_argument("UniformGrid: dx must be positive");
    strides_.resize(static_cast<std::size_t>(d));
    points_.resize(static_cast<std::size_t>(d));
    hi_eff_.resize(d);
    std::int64_t total = 1;
    for (int a = 0; a < d; ++a) {
      if (!std::isfinite(lo[a]) || !std::isfinite(hi[a]))
        throw std::invalid_argument("UniformGrid: box must be finite");
      const auto p = static_cast<int>(std::llround((hi[a] - lo[a]) / dx)) + 1;
      if (p < 2) throw std::invalid_argument("UniformGrid: fewer than 2 points on an axis");
      points_[static_cast<std::size_t>(a)] = p;
      total *= p;
      // The last node sits on hi when the extent divides evenly; pinning it
      // there keeps boundary nodes from rounding a hair outside the box.
      const double reach = lo[a] + static_cast<double>(p - 1) * dx;
      hi_eff_[a] = (std::abs(reach - hi[a]) <= 1e-9 * dx) ? hi[a] : reach;
    }
    for (int a = d - 1; a >= 0; --a) {
      strides_[static_cast<std::size_t>(a)] = (a == d - 1) ? 1 : strides_[static_cast<std::size_t>(a) + 1] * points_[static_cast<std::size_t>(a) + 1];
    }
    compact_.assign(static_cast<std::size_t>(total), -1);
    Vec x(d);
    for (std::int64_t node = 0; node < total; ++node) {
      node_state(node, x);
      if (is_admissible(c, x)) {
        compact_[static_cast<std::size_t>(node)] =
            static_cast<std::int64_t>(nodes_of_compact_.size());
        nodes_of_compact_.push_back(node);
      }
    }
    if (nodes_of_compact_.empty())
      throw SolverError("UniformGrid: no admissible node inside the box");
  }

  /// Grid over the (finite) constraint box itself.
  static UniformGrid from_constraints(const ConstraintSet& c, double dx) {
    return UniformGrid(c, c.domain_lo, c.domain_hi, dx);
  }

  int dim() const { return static_cast<int>(points_.size()); }
  double dx() const { return dx_; }
  const std::vector<int>& points_per_axis() const { return points_; }
  std::int64_t n_nodes() const { return static_cast<std::int64_t>(compact_.size()); }
  std::int64_t n_admissible() const { return static_cast<std::int64_t>(nodes_of_compact_.size()); }
  std::int64_t compact_of(std::int64_t node) const {
    return compact_[static_cast<std::size_t>(node)];
  }
  std::int64_t node_of_compact(std::int64_t k) const {
    return nodes_of_compact_[static_cast<std::size_t>(k)];
  }

  void node_state(std::int64_t node, Vec& out) const {
    const int d = dim();
    out.resize(d);
    for (int a = 0; a < d; ++a) {
      const std::int64_t i = (node / strides_[static_cast<std::size_t>(a)]) %
                             points_[static_cast<std::size_t>(a)];
      out[a] = (i == points_[static_cast<std::size_t>(a)] - 1)
                   ? hi_eff_[a]
                   : lo_[a] + static_cast<double>(i) * dx_;
    }
  }

  Vec state_of_compact(std::int64_t k) const {
    Vec x(dim());
    node_state(node_of_compact(k), x);
    return x;
  }

  void axis_indices(std::int64_t node, int* idx) const {
    for (int a = 0; a < dim(); ++a)
      idx[a] = static_cast<int>((node / strides_[static_cast<std::size_t>(a)]) %
                                points_[static_cast<std::size_t>(a)]);
  }

  bool in_box(const Vec& x) const {
    for (int a = 0; a < dim(); ++a)
      if (!(x[a] >= lo_[a]) || !(x[a] <= hi_eff_[a])) return false;
    return true;
  }

  /// Multilinear interpolation of a compact value array at x (must be inside
  /// the box). Any +inf corner with positive weight makes the result +inf;
  /// zero-weight corners are ignored, so exact node reads never touch the
  /// mask of their neighbors.
  double interpolate(const std::vector<double>& values, const Vec& x) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const int d = dim();
    std::int64_t base = 0;
    double frac[kMaxDim];
    for (int a = 0; a < d; ++a) {
      const int p = points_[static_cast<std::size_t>(a)];
      double s = (x[a] - lo_[a]) / dx_;
      auto cell = static_cast<std::int64_t>(std::floor(s));
      if (cell > p - 2) cell = p - 2;
      if (cell < 0) cell = 0;
      double f = s - static_cast<double>(cell);
      // snap roundoff-sized weights to the node itself; a stray 1e-14
      // weight on a masked neighbor must not poison a node-aligned query
      if (f < 1e-12) f = 0.0;
      if (f > 1.0 - 1e-12) f = 1.0;
      frac[a] = f;
      base += cell * strides_[static_cast<std::size_t>(a)];
    }
    double acc = 0.0;
    for (unsigned corner = 0; corner < (1u << d); ++corner) {
      double w = 1.0;
      std::int64_t node = base;
      for (int a = 0; a < d; ++a) {
        if (corner & (1u << a)) {
          w *= frac[a];
          node += strides_[static_cast<std::size_t>(a)];
        } else {
          w *= 1.0 - frac[a];
        }
      }
      if (w == 0.0) continue;
      const std::int64_t k = compact_[static_cast<std::size_t>(node)];
      if (k < 0) return inf;
      const double v = values[static_cast<std::size_t>(k)];
      if (std::isinf(v)) return inf;
      acc += w * v;
    }
    return acc;
  }

 private:
  Vec lo_;
  Vec hi_eff_;
  double dx_;
  std::vector<int> points_;
  std::vector<std::int64_t> strides_;
  std::vector<std::int64_t> compact_;           // node -> compact id or -1
  std::vector<std::int64_t> nodes_of_compact_;  // compact id -> node
};

/// Value arrays per time level, compact over admissible nodes.
struct GridValue {
  std::vector<std::vector<double>> levels;

  const std::vector<double>& level(int n) const { return levels[static_cast<std::size_t>(n)]; }
};

/// Backward semi-Lagrangian sweep on the masked grid. Controls whose Euler
/// foot point leaves the admissible set or the grid box are excluded.
inline GridValue solve_grid(const ProblemSpec& p, const ConstraintSet& c,
                            const ControlGrid& controls, const TimeGrid& tg,
                            const UniformGrid& ug, int n_threads = 1) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  p.validate();
  tg.validate();
  if (p.discount > 0.0 && !(p.discount * tg.step < 1.0))
    throw std::invalid_argument("solve_grid: requires discount*step < 1");
  const double h = tg.step;
  const double decay = std::exp(-p.discount * h);
  const std::int64_t K = ug.n_admissible();
  const int M = controls.size();

  GridValue gv;
  gv.levels.resize(static_cast<std::size_t>(tg.n_steps) + 1);
  auto& last = gv.levels[static_cast<std::size_t>(tg.n_steps)];
  last.resize(static_cast<std::size_t>(K));
  detail::parallel_for(K, n_threads, [&](std::int64_t k) {
    last[static_cast<std::size_t>(k)] = p.terminal_cost(ug.state_of_compact(k));
  });

  for (int n = tg.n_steps - 1; n >= 0; --n) {
    const double t_n = tg.time_at(n);
    auto& cur = gv.levels[static_cast<std::size_t>(n)];
    const auto& next = gv.levels[static_cast<std::size_t>(n) + 1];
    cur.resize(static_cast<std::size_t>(K));
    detail::parallel_for(K, n_threads, [&](std::int64_t k) {
      const Vec x = ug.state_of_compact(k);
      double best = inf;
      for (int j = 0; j < M; ++j) {
        const Vec foot = euler_step(p, x, controls[j], t_n, h);
        if (!ug.in_box(foot) || !is_admissible(c, foot)) continue;
        const double vnext = ug.interpolate(next, foot);
        if (std::isinf(vnext)) continue;
        const double score = h * p.running_cost(x, controls[j], t_n) + decay * vnext;
        if (score < best) best = score;
      }
      cur[static_cast<std::size_t>(k)] = best;
    });
  }
  return gv;
}

/// Multilinear read-out of one stored level.
inline double query_grid_value(const GridValue& gv, const UniformGrid& ug, const Vec& x, int n) {
  if (!ug.in_box(x)) throw std::out_of_range("query_grid_value: point outside the grid box");
  return ug.interpolate(gv.level(n), x);
}

/// Same stepping contract as synthesize_extended, with grid interpolation in
/// place of the scattered interpolant. gamma > 0 adds the control-inertia
/// penalty from the second step on.
inline Trajectory synthesize_grid_feedback(const ProblemSpec& p, const ConstraintSet& c,
                                           const ControlGrid& controls, const TimeGrid& tg,
                                           const UniformGrid& ug, const GridValue& gv,
                                           const Vec& x0, double gamma = 0.0) {
  if (!ug.in_box(x0))
    throw SolverError("synthesize_grid_feedback: initial state outside the grid box");
  if (!is_admissible(c, x0))
    throw SolverError("synthesize_grid_feedback: initial state inadmissible");
  const double h = tg.step;
  const double decay = std::exp(-p.discount * h);

  Trajectory out;
  Vec x = x0;
  std::optional<Vec> u_prev;
  for (int n = 0; n < tg.n_steps; ++n) {
    const double t_n = tg.time_at(n);
    const auto& next = gv.level(n + 1);
    double best = std::numeric_limits<double>::infinity();
    int best_j = -1;
    Vec best_image;
    for (int j = 0; j < controls.size(); ++j) {
      const Vec image = euler_step(p, x, controls[j], t_n, h);
      if (!ug.in_box(image) || !is_admissible(c, image)) continue;
      const double vnext = ug.interpolate(next, image);
      if (std::isinf(vnext)) continue;
      double score = h * p.running_cost(x, controls[j], t_n) + decay * vnext;
      if (u_prev && gamma > 0.0) score += h * gamma * (controls[j] - *u_prev).squaredNorm();
      if (score < best) {
        best = score;
        best_j = j;
        best_image = image;
      }
    }
    if (best_j < 0 || std::isinf(best)) throw StuckError(n);
    const Vec& u = controls[best_j];
    out.times.push_back(t_n);
    out.states.push_back(x);
    out.controls.push_back(u);
    out.running_cost_terms.push_back(h_term(p, x, u, t_n, tg));
    u_prev = u;
    x = best_image;
  }
  out.times.push_back(tg.t_end);
  out.states.push_back(x);
  detail::finish_trajectory(out, p, c, tg);
  return out;
}

}  // namespace hjb

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "hjb/scattered_interp.hpp"
#include "hjb/tree.hpp"
#include "hjb/tree_dp.hpp"

namespace hjb {

enum class FeedbackMode { TreePath, Extended, ExtendedInertia };

struct FeedbackParams {
  FeedbackMode mode = FeedbackMode::TreePath;
  std::optional<ControlGrid> extended_controls;  // required by Extended*
  double inertia_gamma = 0.0;

  void validate() const {
    if (mode != FeedbackMode::TreePath && !extended_controls)
      throw std::invalid_argument("FeedbackParams: extended modes need a control set");
    if (inertia_gamma < 0.0)
      throw std::invalid_argument("FeedbackParams: inertia_gamma must be >= 0");
  }
};

/// A synthesized or replayed discrete trajectory with its discounted cost
/// decomposition: total_cost = sum(running_cost_terms) + terminal_cost_term.
struct Trajectory {
  std::vector<double> times;               // n_steps + 1
  std::vector<Vec> states;                 // n_steps + 1
  std::vector<Vec> controls;               // n_steps
  std::vector<double> running_cost_terms;  // h * running_cost * exp(-lambda*n*h)
  double terminal_cost_term = 0.0;
  double total_cost = 0.0;
  std::vector<std::uint8_t> state_admissible;  // per state, 1 = admissible
  bool all_admissible = true;

  int n_steps() const { return static_cast<int>(controls.size()); }
};

inline int count_control_switches(const Trajectory& tr) {
  int switches = 0;
  for (std::size_t n = 1; n < tr.controls.size(); ++n)
    if (tr.controls[n] != tr.controls[n - 1]) ++switches;
  return switches;
}

namespace detail {

inline void finish_trajectory(Trajectory& tr, const ProblemSpec& p, const ConstraintSet& c,
                              const TimeGrid& tg) {
  tr.terminal_cost_term =
      std::exp(-p.discount * (tg.t_end - tg.t_start)) * p.terminal_cost(tr.states.back());
  double total = 0.0;
  for (double term : tr.running_cost_terms) total += term;
  tr.total_cost = total + tr.terminal_cost_term;
  tr.state_admissible.resize(tr.states.size());
  tr.all_admissible = true;
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const bool ok = is_admissible(c, tr.states[i]);
    tr.state_admissible[i] = ok ? 1 : 0;
    tr.all_admissible = tr.all_admissible && ok;
  }
}

}  // namespace detail

/// Follows the stored argmin controls through the tree edges; states are the
/// (merged) tree nodes themselves.
inline Trajectory synthesize_tree_path(const Tree& tr, const ValueTable& vt) {
  if (std::isinf(value_at_root(vt))) throw NoAdmissiblePolicyError();
  const auto& meta = tr.meta();
  const ProblemSpec& p = meta.problem;
  const TimeGrid& tg = meta.time;
  const double h = tg.step;

  Trajectory out;
  std::int64_t node = 0;
  for (int n = 0; n < tg.n_steps; ++n) {
    const std::int32_t j = vt.argmin_control(n, node);
    if (j == kNoControl)
      throw SolverError("synthesize_tree_path: argmin missing on a finite-value path");
    const Vec x = tr.state(n, node);
    const Vec& u = meta.controls[j];
    out.times.push_back(tg.time_at(n));
    out.states.push_back(x);
    out.controls.push_back(u);
    out.running_cost_terms.push_back(h * p.running_cost(x, u, tg.time_at(n)) *
                                     std::exp(-p.discount * (tg.time_at(n) - tg.t_start)));
    node = tr.successor(n, node, j);
  }
  out.times.push_back(tg.t_end);
  out.states.push_back(tr.state(tg.n_steps, node));
  detail::finish_trajectory(out, p, meta.constraints, tg);
  return out;
}

/// Per-level interpolants over the finite-valued nodes, built on demand.
class LevelInterpolants {
 public:
  LevelInterpolants(const Tree& tr, const ValueTable& vt) : tree_(tr), table_(vt) {
    cache_.resize(static_cast<std::size_t>(tr.n_levels()));
  }

  const ScatteredInterpolant& level(int n) {
    auto& slot = cache_[static_cast<std::size_t>(n)];
    if (!slot) {
      const int d = tree_.dim();
      const auto& coords = tree_.level_coords(n);
      const auto& vals = table_.values[static_cast<std::size_t>(n)];
      std::vector<double> sites;
      std::vector<double> values;
      sites.reserve(coords.size());
      values.reserve(vals.size());
      for (std::size_t i = 0; i < vals.size(); ++i) {
        if (std::isinf(vals[i])) continue;  // +inf sites would poison the weights
        sites.insert(sites.end(), coords.begin() + static_cast<std::ptrdiff_t>(i * d),
                     coords.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
        values.push_back(vals[i]);
      }
      if (values.empty())
        throw SolverError("feedback: level " + std::to_string(n) + " has no finite values");
      slot = make_interpolant(sites, d, values);
    }
    return *slot;
  }

 private:
  const Tree& tree_;
  const ValueTable& table_;
  std::vector<std::optional<ScatteredInterpolant>> cache_;
};

/// Feedback over an enlarged control set: each step scores every candidate
/// control by h*running_cost + exp(-lambda*h) * I[V^{n+1}](Euler image),
/// dropping candidates whose image violates the constraint. The trajectory
/// advances from its actual state, which may drift off the tree.
inline Trajectory synthesize_extended(const Tree& tr, const ValueTable& vt,
                                      const FeedbackParams& fp) {
  fp.validate();
  if (fp.mode == FeedbackMode::TreePath)
    throw std::invalid_argument("synthesize_extended: mode must be Extended or ExtendedInertia");
  if (std::isinf(value_at_root(vt))) throw NoAdmissiblePolicyError();

  const auto& meta = tr.meta();
  const ProblemSpec& p = meta.problem;
  const ConstraintSet& c = meta.constraints;
  const TimeGrid& tg = meta.time;
  const ControlGrid& controls = *fp.extended_controls;
  const double h = tg.step;
  const double decay = std::exp(-p.discount * h);
  const bool inertia = fp.mode == FeedbackMode::ExtendedInertia;

  LevelInterpolants interp(tr, vt);
  Trajectory out;
  Vec x = meta.x0;
  std::optional<Vec> u_prev;

  for (int n = 0; n < tg.n_steps; ++n) {
    const double t_n = tg.time_at(n);
    const ScatteredInterpolant& next_values = interp.level(n + 1);
    double best = std::numeric_limits<double>::infinity();
    int best_j = -1;
    Vec best_image;
    for (int j = 0; j < controls.size(); ++j) {
      const Vec image = euler_step(p, x, controls[j], t_n, h);
      if (!is_admissible(c, image)) continue;
      double score = h * p.running_cost(x, controls[j], t_n) + decay * next_values.eval(image);
      if (inertia && u_prev) score += h * fp.inertia_gamma * (controls[j] - *u_prev).squaredNorm();
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
    out.running_cost_terms.push_back(h * p.running_cost(x, u, t_n) *
                                     std::exp(-p.discount * (t_n - tg.t_start)));
    u_prev = u;
    x = best_image;
  }
  out.times.push_back(tg.t_end);
  out.states.push_back(x);
  detail::finish_trajectory(out, p, c, tg);
  return out;
}

inline double h_term(const ProblemSpec& p, const Vec& x, const Vec& u, double t_n,
                     const TimeGrid& tg) {
  return tg.step * p.running_cost(x, u, t_n) * std::exp(-p.discount * (t_n - tg.t_start));
}

/// Rolls the dynamics forward under a fixed control word and accumulates the
/// discounted cost. Admissibility is not enforced, only flagged.
inline Trajectory evaluate_cost(const ProblemSpec& p, const ConstraintSet& c, const TimeGrid& tg,
                                const Vec& x0, const std::vector<Vec>& controls) {
  if (static_cast<int>(controls.size()) != tg.n_steps)
    throw std::invalid_argument("evaluate_cost: control word length must equal n_steps");
  Trajectory out;
  Vec x = x0;
  for (int n = 0; n < tg.n_steps; ++n) {
    const double t_n = tg.time_at(n);
    out.times.push_back(t_n);
    out.states.push_back(x);
    out.controls.push_back(controls[static_cast<std::size_t>(n)]);
    out.running_cost_terms.push_back(
        h_term(p, x, controls[static_cast<std::size_t>(n)], t_n, tg));
    x = euler_step(p, x, controls[static_cast<std::size_t>(n)], t_n, tg.step);
    if (!x.allFinite()) throw SolverError("evaluate_cost: non-finite state after step " +
                                          std::to_string(n));
  }
  out.times.push_back(tg.t_end);
  out.states.push_back(x);
  detail::finish_trajectory(out, p, c, tg);
  return out;
}

}  // namespace hjb

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "hjb/detail/parallel.hpp"
#include "hjb/grid_sl.hpp"
#include "hjb/problem.hpp"

namespace hjb {

struct VIParams {
  double h = 0.0;
  double tol = 1e-8;
  int max_iters = 10000;

  /// beta = 1 - lambda*h, the contraction factor of the Bellman operator.
  double beta(const ProblemSpec& p) const { return 1.0 - p.discount * h; }

  void validate(const ProblemSpec& p) const {
    if (!(p.discount > 0.0)) throw std::invalid_argument("VIParams: requires lambda > 0");
    if (!(h > 0.0) || !(p.discount * h <= 1.0))
      throw std::invalid_argument("VIParams: requires 0 < lambda*h <= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("VIParams: tol must be positive");
    if (max_iters < 1) throw std::invalid_argument("VIParams: max_iters must be positive");
  }
};

struct VIResult {
  std::vector<double> values;  // compact over admissible nodes
  int iterations = 0;
  std::vector<double> residuals;
  bool converged = false;
};

/// One application of the discrete Bellman operator
///   (Tv)(x) = min_u { beta * v(x + h f(x,u)) + h * running_cost(x,u) }
/// over controls whose Euler image is admissible and inside the grid box;
/// empty admissible sets give +inf. Evaluated at t_start (stationary data).
inline std::vector<double> apply_T(const ProblemSpec& p, const ConstraintSet& c,
                                   const ControlGrid& controls, const UniformGrid& ug,
                                   const std::vector<double>& v, double h, int n_threads = 1) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double beta = 1.0 - p.discount * h;
  const std::int64_t K = ug.n_admissible();
  const double t0 = p.t_start;
  std::vector<double> out(static_cast<std::size_t>(K));
  detail::parallel_for(K, n_threads, [&](std::int64_t k) {
    const Vec x = ug.state_of_compact(k);
    double best = inf;
    for (int j = 0; j < controls.size(); ++j) {
      const Vec foot = euler_step(p, x, controls[j], t0, h);
      if (!ug.in_box(foot) || !is_admissible(c, foot)) continue;
      const double vv = ug.interpolate(v, foot);
      if (std::isinf(vv)) continue;
      const double score = beta * vv + h * p.running_cost(x, controls[j], t0);
      if (score < best) best = score;
    }
    out[static_cast<std::size_t>(k)] = best;
  });
  return out;
}

/// Fixed-point iteration v_{k+1} = T v_k from v_0 = 0, stopping when the sup
/// norm of the update over mutually finite nodes drops below tol.
inline VIResult value_iterate(const ProblemSpec& p, const ConstraintSet& c,
                              const ControlGrid& controls, const UniformGrid& ug,
                              const VIParams& params, int n_threads = 1) {
  params.validate(p);
  VIResult res;
  res.values.assign(static_cast<std::size_t>(ug.n_admissible()), 0.0);
  for (int it = 0; it < params.max_iters; ++it) {
    std::vector<double> next = apply_T(p, c, controls, ug, res.values, params.h, n_threads);
    double resid = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) {
      if (std::isinf(next[k]) || std::isinf(res.values[k])) continue;
      resid = std::max(resid, std::abs(next[k] - res.values[k]));
    }
    res.values = std::move(next);
    res.residuals.push_back(resid);
    res.iterations = it + 1;
    if (resid <= params.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

/// Empirical modulus of continuity: sup |v(x)-v(y)| over sampled admissible
/// node pairs with |x-y| <= delta. Requires lambda > lip_dynamics, the
/// hypothesis under which the theoretical modulus bound holds.
inline double estimate_modulus(const ProblemSpec& p, const UniformGrid& ug,
                               const std::vector<double>& v, double delta,
                               std::int64_t max_samples = 4096, std::uint64_t seed = 1) {
  if (!p.bounds || !p.bounds->lip_dynamics)
    throw std::invalid_argument("estimate_modulus: lip_dynamics bound is required");
  if (!(p.discount > *p.bounds->lip_dynamics))
    throw HypothesisViolatedError("estimate_modulus needs lambda > lip_dynamics");
  if (delta < 0.0) throw std::invalid_argument("estimate_modulus: delta must be >= 0");

  const std::int64_t K = ug.n_admissible();
  const int d = ug.dim();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> pick(0, K - 1);
  const std::int64_t n_samples = std::min<std::int64_t>(max_samples, K);
  const int radius = static_cast<int>(std::ceil(delta / ug.dx()));

  double sup = 0.0;
  int idx[kMaxDim];
  int probe[kMaxDim];
  Vec x(d), y(d);
  for (std::int64_t s = 0; s < n_samples; ++s) {
    const std::int64_t k = (n_samples == K) ? s : pick(rng);
    if (std::isinf(v[static_cast<std::size_t>(k)])) continue;
    const std::int64_t node = ug.node_of_compact(k);
    ug.node_state(node, x);
    ug.axis_indices(node, idx);
    // scan the delta-ball neighborhood on the grid
    std::int64_t count = 1;
    for (int a = 0; a < d; ++a) count *= 2 * radius + 1;
    for (std::int64_t off = 0; off < count; ++off) {
      std::int64_t rem = off;
      bool in_range = true;
      std::int64_t other = 0;
      std::int64_t stride = 1;
      for (int a = d - 1; a >= 0; --a) {
        const int shift = static_cast<int>(rem % (2 * radius + 1)) - radius;
        rem /= 2 * radius + 1;
        probe[a] = idx[a] + shift;
        if (probe[a] < 0 || probe[a] >= ug.points_per_axis()[static_cast<std::size_t>(a)]) {
          in_range = false;
          break;
        }
        other += static_cast<std::int64_t>(probe[a]) * stride;
        stride *= ug.points_per_axis()[static_cast<std::size_t>(a)];
      }
      if (!in_range) continue;
      const std::int64_t ko = ug.compact_of(other);
      if (ko < 0 || std::isinf(v[static_cast<std::size_t>(ko)])) continue;
      ug.node_state(other, y);
      if ((x - y).norm() > delta) continue;
      sup = std::max(sup, std::abs(v[static_cast<std::size_t>(k)] -
                                   v[static_cast<std::size_t>(ko)]));
    }
  }
  return sup;
}

}  // namespace hjb

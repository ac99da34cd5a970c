#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "hjb/detail/parallel.hpp"
#include "hjb/tree.hpp"

namespace hjb {

/// Node values V^n and the minimizing control index per node from the
/// backward sweep. Dead-end nodes carry +inf and kNoControl.
struct ValueTable {
  std::vector<std::vector<double>> values;           // one array per level
  std::vector<std::vector<std::int32_t>> argmin;     // per level n < n_steps

  double value(int n, std::int64_t i) const {
    return values[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)];
  }
  std::int32_t argmin_control(int n, std::int64_t i) const {
    return argmin[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)];
  }
};

/// Backward dynamic programming on the tree: terminal values from the
/// terminal cost, then per node the minimum of
///   h * running_cost + exp(-lambda*h) * V^{n+1}(successor)
/// over controls whose branch survived pruning. Ties go to the smallest
/// control index; nodes with no finite candidate get +inf.
inline ValueTable backward_sweep(const Tree& tr, int n_threads = 1) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto& meta = tr.meta();
  const ProblemSpec& p = meta.problem;
  const double h = meta.time.step;
  const double decay = std::exp(-p.discount * h);
  const int M = tr.n_controls();
  const int L = tr.n_levels();

  ValueTable vt;
  vt.values.resize(static_cast<std::size_t>(L));
  vt.argmin.resize(static_cast<std::size_t>(L) - 1);

  {
    auto& last = vt.values[static_cast<std::size_t>(L) - 1];
    const std::int64_t sz = tr.level_size(L - 1);
    last.resize(static_cast<std::size_t>(sz));
    detail::parallel_for(sz, n_threads, [&](std::int64_t i) {
      last[static_cast<std::size_t>(i)] = p.terminal_cost(tr.state(L - 1, i));
    });
  }

  for (int n = L - 2; n >= 0; --n) {
    const std::int64_t sz = tr.level_size(n);
    const double t_n = meta.time.time_at(n);
    auto& vals = vt.values[static_cast<std::size_t>(n)];
    auto& args = vt.argmin[static_cast<std::size_t>(n)];
    vals.resize(static_cast<std::size_t>(sz));
    args.resize(static_cast<std::size_t>(sz));
    const auto& succ = tr.level_successors(n);
    const auto& next_vals = vt.values[static_cast<std::size_t>(n) + 1];

    detail::parallel_for(sz, n_threads, [&](std::int64_t i) {
      const Vec x = tr.state(n, i);
      double best = inf;
      std::int32_t best_j = kNoControl;
      for (int j = 0; j < M; ++j) {
        const std::int32_t s =
            succ[static_cast<std::size_t>(i) * static_cast<std::size_t>(M) +
                 static_cast<std::size_t>(j)];
        if (s == kInadmissible) continue;
        const double score = h * p.running_cost(x, meta.controls[j], t_n) +
                             decay * next_vals[static_cast<std::size_t>(s)];
        if (score < best) {
          best = score;
          best_j = j;
        }
      }
      vals[static_cast<std::size_t>(i)] = best;
      args[static_cast<std::size_t>(i)] = best_j;
    });
  }

  if (std::isinf(vt.values[0][0])) throw NoAdmissiblePolicyError();
  return vt;
}

inline double value_at_root(const ValueTable& vt) { return vt.values[0][0]; }

}  // namespace hjb

#pragma once

#include <chrono>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "hjb/problem.hpp"
#include "hjb/spatial_hash.hpp"

namespace hjb {

struct TreeBuildParams {
  double eps_merge = 0.0;
  MergeNorm merge_norm = MergeNorm::Euclidean;
};

struct TreeStats {
  std::vector<std::int64_t> nodes_per_level;
  std::int64_t total_nodes = 0;
  std::int64_t edges_total = 0;
  std::int64_t pruned_by_merge = 0;
  std::int64_t pruned_by_constraint = 0;
  double build_wall_time = 0.0;
};

/// Pruned tree of discretely reachable states. Level n holds the states
/// reachable in n Euler steps; succ(n, i, j) is the level-(n+1) node the
/// j-th control leads to, or kInadmissible if that branch was cut by the
/// state constraint.
class Tree {
 public:
  struct Meta {
    ProblemSpec problem;
    ConstraintSet constraints;
    ControlGrid controls;
    TimeGrid time;
    TreeBuildParams params;
    Vec x0;
  };

  Tree(Meta meta, std::vector<std::vector<double>> level_coords,
       std::vector<std::vector<std::int32_t>> successors)
      : meta_(std::move(meta)),
        level_coords_(std::move(level_coords)),
        successors_(std::move(successors)) {}

  int n_levels() const { return static_cast<int>(level_coords_.size()); }
  int dim() const { return meta_.problem.dim_state; }
  int n_controls() const { return meta_.controls.size(); }

  std::int64_t level_size(int n) const {
    return static_cast<std::int64_t>(level_coords_[static_cast<std::size_t>(n)].size()) / dim();
  }

  /// State of node i at level n.
  Vec state(int n, std::int64_t i) const {
    const double* p = state_ptr(n, i);
    Vec v(dim());
    for (int k = 0; k < dim(); ++k) v[k] = p[k];
    return v;
  }

  const double* state_ptr(int n, std::int64_t i) const {
    return level_coords_[static_cast<std::size_t>(n)].data() +
           static_cast<std::size_t>(i) * static_cast<std::size_t>(dim());
  }

  std::int32_t successor(int n, std::int64_t i, int j) const {
    if (n < 0 || n >= n_levels() - 1 || i < 0 || i >= level_size(n) || j < 0 ||
        j >= n_controls())
      throw std::out_of_range("Tree::successor: index out of range");
    return successors_[static_cast<std::size_t>(n)]
                      [static_cast<std::size_t>(i) * static_cast<std::size_t>(n_controls()) +
                       static_cast<std::size_t>(j)];
  }

  const Meta& meta() const { return meta_; }
  const std::vector<double>& level_coords(int n) const {
    return level_coords_[static_cast<std::size_t>(n)];
  }
  const std::vector<std::int32_t>& level_successors(int n) const {
    return successors_[static_cast<std::size_t>(n)];
  }

 private:
  Meta meta_;
  std::vector<std::vector<double>> level_coords_;       // level n: states, d-strided
  std::vector<std::vector<std::int32_t>> successors_;   // level n: size(n)*M entries
};

/// Alias for the table-lookup contract; pure and O(1).
inline std::int32_t query_successor(const Tree& tr, int n, std::int64_t i, int j) {
  return tr.successor(n, i, j);
}

/// Forward construction: expand every node of level n with every control,
/// cut images that violate the constraint, merge images that land within
/// eps_merge of an already inserted level-(n+1) node (lowest-index match),
/// append the rest as new nodes. Serial and deterministic.
inline std::pair<Tree, TreeStats> build_tree(const ProblemSpec& p, const ConstraintSet& c,
                                             const ControlGrid& grid, const TimeGrid& tg,
                                             const TreeBuildParams& params, const Vec& x0) {
  p.validate();
  tg.validate();
  if (params.eps_merge < 0.0) throw std::invalid_argument("build_tree: eps_merge must be >= 0");
  if (p.discount > 0.0 && !(p.discount * tg.step < 1.0))
    throw std::invalid_argument("build_tree: requires discount*step < 1");
  if (!is_admissible(c, x0)) throw SolverError("build_tree: initial state is inadmissible");

  const auto t_begin = std::chrono::steady_clock::now();
  const int d = p.dim_state;
  const int M = grid.size();
  const int n_levels = tg.n_steps + 1;

  std::vector<std::vector<double>> levels(static_cast<std::size_t>(n_levels));
  std::vector<std::vector<std::int32_t>> succ(static_cast<std::size_t>(n_levels - 1));
  levels[0].assign(x0.data(), x0.data() + d);

  TreeStats stats;
  stats.nodes_per_level.assign(static_cast<std::size_t>(n_levels), 0);
  stats.nodes_per_level[0] = 1;

  Vec parent(d);
  for (int n = 0; n < tg.n_steps; ++n) {
    const auto& cur = levels[static_cast<std::size_t>(n)];
    auto& next = levels[static_cast<std::size_t>(n) + 1];
    auto& edges = succ[static_cast<std::size_t>(n)];
    const std::int64_t cur_size = static_cast<std::int64_t>(cur.size()) / d;
    edges.assign(static_cast<std::size_t>(cur_size) * static_cast<std::size_t>(M),
                 kInadmissible);
    const double t_n = tg.time_at(n);
    SpatialHash index(d, params.eps_merge, params.merge_norm, cur_size + 64);
    std::int32_t next_count = 0;

    for (std::int64_t i = 0; i < cur_size; ++i) {
      for (int k = 0; k < d; ++k) parent[k] = cur[static_cast<std::size_t>(i) * d + k];
      for (int j = 0; j < M; ++j) {
        const Vec image = euler_step(p, parent, grid[j], t_n, tg.step);
        if (!is_admissible(c, image)) {
          ++stats.pruned_by_constraint;
          continue;
        }
        std::int32_t target = index.find_first_within(image.data(), next.data());
        if (target >= 0) {
          ++stats.pruned_by_merge;
        } else {
          target = next_count++;
          next.insert(next.end(), image.data(), image.data() + d);
          index.insert(next.data() + static_cast<std::size_t>(target) * d, target);
        }
        edges[static_cast<std::size_t>(i) * static_cast<std::size_t>(M) +
              static_cast<std::size_t>(j)] = target;
      }
    }
    if (next_count == 0) throw EmptyLevelError(n + 1);
    stats.nodes_per_level[static_cast<std::size_t>(n) + 1] = next_count;
  }

  for (const auto& e : succ)
    for (std::int32_t s : e)
      if (s != kInadmissible) ++stats.edges_total;
  stats.total_nodes =
      std::accumulate(stats.nodes_per_level.begin(), stats.nodes_per_level.end(), std::int64_t{0});
  stats.build_wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();

  Tree::Meta meta{p, c, grid, tg, params, x0};
  return {Tree(std::move(meta), std::move(levels), std::move(succ)), stats};
}

/// Recomputes the counters from the structure (wall time is not recoverable
/// and is reported as zero).
inline TreeStats tree_stats(const Tree& tr) {
  TreeStats s;
  const int L = tr.n_levels();
  s.nodes_per_level.resize(static_cast<std::size_t>(L));
  for (int n = 0; n < L; ++n) s.nodes_per_level[static_cast<std::size_t>(n)] = tr.level_size(n);
  s.total_nodes =
      std::accumulate(s.nodes_per_level.begin(), s.nodes_per_level.end(), std::int64_t{0});
  const int M = tr.n_controls();
  std::int64_t expansions = 0;
  for (int n = 0; n < L - 1; ++n) {
    expansions += tr.level_size(n) * M;
    for (std::int32_t e : tr.level_successors(n))
      if (e != kInadmissible) ++s.edges_total;
  }
  s.pruned_by_constraint = expansions - s.edges_total;
  s.pruned_by_merge = s.edges_total - (s.total_nodes - 1);
  return s;
}

}  // namespace hjb

#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "hjb/feedback.hpp"
#include "hjb/grid_sl.hpp"
#include "hjb/tree.hpp"
#include "hjb/tree_dp.hpp"

namespace hjb::io {

/// 17 significant digits; infinities serialize as inf / -inf.
inline std::string format_value(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SolverError("cannot open output file: " + path);
  return out;
}

inline void write_tree_nodes(const std::string& path, const Tree& tr) {
  auto out = open_out(path);
  const int d = tr.dim();
  out << "level,node_index";
  for (int a = 0; a < d; ++a) out << ",x_" << a;
  out << "\n";
  for (int n = 0; n < tr.n_levels(); ++n) {
    const std::int64_t sz = tr.level_size(n);
    for (std::int64_t i = 0; i < sz; ++i) {
      out << n << ',' << i;
      const double* x = tr.state_ptr(n, i);
      for (int a = 0; a < d; ++a) out << ',' << format_value(x[a]);
      out << '\n';
    }
  }
}

inline void write_tree_edges(const std::string& path, const Tree& tr) {
  auto out = open_out(path);
  out << "level,node_index,control_index,succ_index\n";
  const int M = tr.n_controls();
  for (int n = 0; n + 1 < tr.n_levels(); ++n) {
    const std::int64_t sz = tr.level_size(n);
    const auto& succ = tr.level_successors(n);
    for (std::int64_t i = 0; i < sz; ++i)
      for (int j = 0; j < M; ++j)
        out << n << ',' << i << ',' << j << ','
            << succ[static_cast<std::size_t>(i) * static_cast<std::size_t>(M) +
                    static_cast<std::size_t>(j)]
            << '\n';
  }
}

inline void write_tree_values(const std::string& path, const Tree& tr, const ValueTable& vt) {
  auto out = open_out(path);
  out << "level,node_index,value,argmin_control\n";
  for (int n = 0; n < tr.n_levels(); ++n) {
    const auto& vals = vt.values[static_cast<std::size_t>(n)];
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const std::int32_t arg =
          (n + 1 < tr.n_levels()) ? vt.argmin[static_cast<std::size_t>(n)][i] : kNoControl;
      out << n << ',' << i << ',' << format_value(vals[i]) << ',' << arg << '\n';
    }
  }
}

/// One row per step plus a final row holding the terminal state; the last
/// row leaves the control columns empty and reports the discounted terminal
/// cost as its stage cost.
inline void write_trajectory(const std::string& path, const Trajectory& tr) {
  auto out = open_out(path);
  const int d = tr.states.empty() ? 0 : static_cast<int>(tr.states[0].size());
  const int m = tr.controls.empty() ? 0 : static_cast<int>(tr.controls[0].size());
  out << "step,t";
  for (int a = 0; a < d; ++a) out << ",x_" << a;
  for (int a = 0; a < m; ++a) out << ",u_" << a;
  out << ",stage_cost,cumulative_cost,violation\n";
  double cum = 0.0;
  for (std::size_t n = 0; n < tr.states.size(); ++n) {
    out << n << ',' << format_value(tr.times[n]);
    for (int a = 0; a < d; ++a) out << ',' << format_value(tr.states[n][a]);
    const bool last = n + 1 == tr.states.size();
    if (!last) {
      for (int a = 0; a < m; ++a) out << ',' << format_value(tr.controls[n][a]);
      cum += tr.running_cost_terms[n];
      out << ',' << format_value(tr.running_cost_terms[n]);
    } else {
      for (int a = 0; a < m; ++a) out << ',';
      cum += tr.terminal_cost_term;
      out << ',' << format_value(tr.terminal_cost_term);
    }
    out << ',' << format_value(cum) << ',' << (tr.state_admissible[n] ? 0 : 1) << '\n';
  }
}

inline void write_grid_values(const std::string& path, const UniformGrid& ug, const GridValue& gv,
                              int level) {
  auto out = open_out(path);
  const int d = ug.dim();
  out << "level";
  for (int a = 0; a < d; ++a) out << ",i_" << a;
  for (int a = 0; a < d; ++a) out << ",x_" << a;
  out << ",value\n";
  const auto& vals = gv.level(level);
  int idx[kMaxDim];
  Vec x(d);
  for (std::int64_t k = 0; k < ug.n_admissible(); ++k) {
    const std::int64_t node = ug.node_of_compact(k);
    ug.axis_indices(node, idx);
    ug.node_state(node, x);
    out << level;
    for (int a = 0; a < d; ++a) out << ',' << idx[a];
    for (int a = 0; a < d; ++a) out << ',' << format_value(x[a]);
    out << ',' << format_value(vals[static_cast<std::size_t>(k)]) << '\n';
  }
}

inline void write_vi_values(const std::string& path, const UniformGrid& ug,
                            const std::vector<double>& values) {
  auto out = open_out(path);
  const int d = ug.dim();
  for (int a = 0; a < d; ++a) out << (a ? "," : "") << "i_" << a;
  for (int a = 0; a < d; ++a) out << ",x_" << a;
  out << ",value\n";
  int idx[kMaxDim];
  Vec x(d);
  for (std::int64_t k = 0; k < ug.n_admissible(); ++k) {
    const std::int64_t node = ug.node_of_compact(k);
    ug.axis_indices(node, idx);
    ug.node_state(node, x);
    for (int a = 0; a < d; ++a) out << (a ? "," : "") << idx[a];
    for (int a = 0; a < d; ++a) out << ',' << format_value(x[a]);
    out << ',' << format_value(values[static_cast<std::size_t>(k)]) << '\n';
  }
}

inline void write_vi_residuals(const std::string& path, const std::vector<double>& residuals) {
  auto out = open_out(path);
  out << "iteration,residual\n";
  for (std::size_t i = 0; i < residuals.size(); ++i)
    out << (i + 1) << ',' << format_value(residuals[i]) << '\n';
}

}  // namespace hjb::io

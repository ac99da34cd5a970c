// Command-line front end: solve / compare / reproduce on the catalog
// problems, with CSV + JSON artifacts.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "hjb/hjb.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitThreshold = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int line_of_offset(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error at line " +
                      std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
  }
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

struct RunConfig {
  std::string problem_name;
  std::map<std::string, double> overrides;
  bool constrained = true;
  std::string solver = "TREE";
  std::optional<double> eps_merge;  // default: h^2
  hjb::MergeNorm merge_norm = hjb::MergeNorm::Euclidean;
  double dx = 0.0025;
  std::string feedback_mode;  // default: TREE_PATH if trajectory == value controls
  double gamma = 0.0;
  std::optional<int> extended_count;
  double vi_h = 0.1;
  double vi_tol = 1e-8;
  int vi_max_iters = 5000;
  double vi_dx = 0.02;
  std::optional<hjb::Vec> vi_lo, vi_hi;
  bool dump_tree = true;
  bool dump_values = true;
  bool dump_trajectory = true;
  bool dump_grid = true;
  std::string out_dir = "out";
  int threads = 1;
  std::uint64_t seed = 1;
};

hjb::Vec vec_from_json(const json& arr) {
  hjb::Vec v(static_cast<Eigen::Index>(arr.size()));
  Eigen::Index i = 0;
  for (const auto& x : arr) v[i++] = x.get<double>();
  return v;
}

RunConfig parse_config(const json& j) {
  RunConfig cfg;
  check_keys(j, "config root",
             {"problem", "constrained", "solver", "tree", "grid", "vi", "feedback", "dump",
              "out", "threads", "seed"});
  if (!j.contains("problem")) throw ConfigError("config needs a 'problem' section");
  const json& pj = j.at("problem");
  check_keys(pj, "problem", {"name", "overrides"});
  cfg.problem_name = pj.at("name").get<std::string>();
  if (pj.contains("overrides"))
    for (const auto& [key, val] : pj.at("overrides").items())
      cfg.overrides[key] = val.get<double>();
  cfg.constrained = j.value("constrained", true);
  cfg.solver = j.value("solver", std::string("TREE"));
  if (cfg.solver != "TREE" && cfg.solver != "GRID" && cfg.solver != "VI")
    throw ConfigError("unknown solver '" + cfg.solver + "'; valid: TREE, GRID, VI");
  if (j.contains("tree")) {
    const json& t = j.at("tree");
    check_keys(t, "tree", {"eps_merge", "merge_norm"});
    if (t.contains("eps_merge")) cfg.eps_merge = t.at("eps_merge").get<double>();
    if (t.contains("merge_norm")) {
      const auto n = t.at("merge_norm").get<std::string>();
      if (n == "EUCLIDEAN")
        cfg.merge_norm = hjb::MergeNorm::Euclidean;
      else if (n == "MAX")
        cfg.merge_norm = hjb::MergeNorm::Max;
      else
        throw ConfigError("merge_norm must be EUCLIDEAN or MAX");
    }
  }
  if (j.contains("grid")) {
    check_keys(j.at("grid"), "grid", {"dx"});
    cfg.dx = j.at("grid").value("dx", cfg.dx);
  }
  if (j.contains("vi")) {
    const json& v = j.at("vi");
    check_keys(v, "vi", {"h", "tol", "max_iters", "dx", "lo", "hi"});
    cfg.vi_h = v.value("h", cfg.vi_h);
    cfg.vi_tol = v.value("tol", cfg.vi_tol);
    cfg.vi_max_iters = v.value("max_iters", cfg.vi_max_iters);
    cfg.vi_dx = v.value("dx", cfg.vi_dx);
    if (v.contains("lo")) cfg.vi_lo = vec_from_json(v.at("lo"));
    if (v.contains("hi")) cfg.vi_hi = vec_from_json(v.at("hi"));
  }
  if (j.contains("feedback")) {
    const json& f = j.at("feedback");
    check_keys(f, "feedback", {"mode", "gamma", "extended_count"});
    if (f.contains("mode")) {
      cfg.feedback_mode = f.at("mode").get<std::string>();
      if (cfg.feedback_mode != "TREE_PATH" && cfg.feedback_mode != "EXTENDED" &&
          cfg.feedback_mode != "EXTENDED_INERTIA")
        throw ConfigError("feedback mode must be TREE_PATH, EXTENDED or EXTENDED_INERTIA");
    }
    cfg.gamma = f.value("gamma", 0.0);
    if (f.contains("extended_count")) cfg.extended_count = f.at("extended_count").get<int>();
  }
  if (j.contains("dump")) {
    const json& d = j.at("dump");
    check_keys(d, "dump", {"tree", "values", "trajectory", "grid"});
    cfg.dump_tree = d.value("tree", true);
    cfg.dump_values = d.value("values", true);
    cfg.dump_trajectory = d.value("trajectory", true);
    cfg.dump_grid = d.value("grid", true);
  }
  cfg.out_dir = j.value("out", cfg.out_dir);
  cfg.threads = j.value("threads", 1);
  cfg.seed = j.value("seed", std::uint64_t{1});
  return cfg;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

json trajectory_summary(const hjb::Trajectory& tr) {
  return json{{"cost", tr.total_cost},
              {"switches", hjb::count_control_switches(tr)},
              {"all_admissible", tr.all_admissible}};
}

hjb::ControlGrid reconstruction_controls(const RunConfig& cfg, const hjb::CatalogProblem& cp) {
  if (cfg.extended_count) {
    if (cp.name != "eikonal_channel" && cp.name != "eikonal_obstacles")
      throw ConfigError("feedback.extended_count is only meaningful for the eikonal problems");
    return hjb::ControlGrid(hjb::detail::ball_controls(*cfg.extended_count));
  }
  return cp.trajectory_controls;
}

hjb::FeedbackMode default_mode(const RunConfig& cfg, const hjb::CatalogProblem& cp,
                               const hjb::ControlGrid& traj_controls) {
  if (!cfg.feedback_mode.empty()) {
    if (cfg.feedback_mode == "TREE_PATH") return hjb::FeedbackMode::TreePath;
    if (cfg.feedback_mode == "EXTENDED") return hjb::FeedbackMode::Extended;
    return hjb::FeedbackMode::ExtendedInertia;
  }
  if (cfg.gamma > 0.0) return hjb::FeedbackMode::ExtendedInertia;
  return traj_controls.points() == cp.value_controls.points() ? hjb::FeedbackMode::TreePath
                                                              : hjb::FeedbackMode::Extended;
}

json solve_tree(const RunConfig& cfg, const hjb::CatalogProblem& cp,
                const hjb::ConstraintSet& constraints, const fs::path& out) {
  const double eps = cfg.eps_merge.value_or(cp.time.step * cp.time.step);
  hjb::TreeBuildParams params{eps, cfg.merge_norm};
  Timer t;
  auto [tree, stats] =
      hjb::build_tree(cp.problem, constraints, cp.value_controls, cp.time, params, cp.x0);
  hjb::ValueTable vt = hjb::backward_sweep(tree, cfg.threads);
  const double solve_time = t.seconds();

  const hjb::ControlGrid traj_controls = reconstruction_controls(cfg, cp);
  const hjb::FeedbackMode mode = default_mode(cfg, cp, traj_controls);
  Timer tf;
  hjb::Trajectory traj =
      mode == hjb::FeedbackMode::TreePath
          ? hjb::synthesize_tree_path(tree, vt)
          : hjb::synthesize_extended(tree, vt,
                                     hjb::FeedbackParams{mode, traj_controls, cfg.gamma});
  const double feedback_time = tf.seconds();

  if (cfg.dump_tree) {
    hjb::io::write_tree_nodes((out / "tree_nodes.csv").string(), tree);
    hjb::io::write_tree_edges((out / "tree_edges.csv").string(), tree);
  }
  if (cfg.dump_values) hjb::io::write_tree_values((out / "tree_values.csv").string(), tree, vt);
  if (cfg.dump_trajectory)
    hjb::io::write_trajectory((out / "trajectory.csv").string(), traj);

  json nodes_per_level = json::array();
  for (auto n : stats.nodes_per_level) nodes_per_level.push_back(n);
  return json{{"solver", "TREE"},
              {"v0", hjb::value_at_root(vt)},
              {"cost", traj.total_cost},
              {"nodes_total", stats.total_nodes},
              {"nodes_per_level", nodes_per_level},
              {"wall_time_s", solve_time},
              {"feedback_wall_time_s", feedback_time},
              {"switches", hjb::count_control_switches(traj)},
              {"all_admissible", traj.all_admissible},
              {"eps_merge", eps},
              {"pruned_by_constraint", stats.pruned_by_constraint},
              {"pruned_by_merge", stats.pruned_by_merge}};
}

json solve_grid_cmd(const RunConfig& cfg, const hjb::CatalogProblem& cp,
                    const hjb::ConstraintSet& constraints, const fs::path& out) {
  hjb::UniformGrid ug = hjb::UniformGrid::from_constraints(constraints, cfg.dx);
  if (!ug.in_box(cp.x0)) throw hjb::SolverError("grid does not contain the initial state");
  Timer t;
  hjb::GridValue gv =
      hjb::solve_grid(cp.problem, constraints, cp.classic_controls, cp.time, ug, cfg.threads);
  const double solve_time = t.seconds();
  const double v0 = hjb::query_grid_value(gv, ug, cp.x0, 0);

  const hjb::ControlGrid traj_controls = reconstruction_controls(cfg, cp);
  Timer tf;
  hjb::Trajectory traj = hjb::synthesize_grid_feedback(cp.problem, constraints, traj_controls,
                                                       cp.time, ug, gv, cp.x0, cfg.gamma);
  const double feedback_time = tf.seconds();

  if (cfg.dump_grid) hjb::io::write_grid_values((out / "grid_values.csv").string(), ug, gv, 0);
  if (cfg.dump_trajectory)
    hjb::io::write_trajectory((out / "trajectory.csv").string(), traj);

  return json{{"solver", "GRID"},
              {"v0", v0},
              {"cost", traj.total_cost},
              {"nodes_total", ug.n_admissible()},
              {"nodes_per_level", json::array({ug.n_admissible()})},
              {"wall_time_s", solve_time},
              {"feedback_wall_time_s", feedback_time},
              {"switches", hjb::count_control_switches(traj)},
              {"all_admissible", traj.all_admissible},
              {"dx", cfg.dx}};
}

json solve_vi(const RunConfig& cfg, const hjb::CatalogProblem& cp,
              const hjb::ConstraintSet& constraints, const fs::path& out) {
  if (!(cp.problem.discount > 0.0))
    throw ConfigError("VI needs a positive discount; set problem.overrides.lambda");
  hjb::Vec lo = cfg.vi_lo.value_or(constraints.domain_lo);
  hjb::Vec hi = cfg.vi_hi.value_or(constraints.domain_hi);
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]))
      throw ConfigError("VI grid window is unbounded; set vi.lo / vi.hi");
  hjb::UniformGrid ug(constraints, lo, hi, cfg.vi_dx);
  hjb::VIParams params{cfg.vi_h, cfg.vi_tol, cfg.vi_max_iters};
  Timer t;
  hjb::VIResult res =
      hjb::value_iterate(cp.problem, constraints, cp.value_controls, ug, params, cfg.threads);
  const double solve_time = t.seconds();

  hjb::io::write_vi_values((out / "vi_values.csv").string(), ug, res.values);
  hjb::io::write_vi_residuals((out / "vi_residuals.csv").string(), res.residuals);

  double v0 = std::numeric_limits<double>::quiet_NaN();
  if (ug.in_box(cp.x0)) v0 = ug.interpolate(res.values, cp.x0);
  return json{{"solver", "VI"},
              {"v0", v0},
              {"cost", nullptr},
              {"nodes_total", ug.n_admissible()},
              {"nodes_per_level", json::array({ug.n_admissible()})},
              {"wall_time_s", solve_time},
              {"switches", nullptr},
              {"iterations", res.iterations},
              {"converged", res.converged}};
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << "\n";
}

/// The fully resolved configuration; feeding it back reproduces the run.
json effective_config(const RunConfig& cfg, const std::string& out_dir) {
  json overrides = json::object();
  for (const auto& [k, v] : cfg.overrides) overrides[k] = v;
  json vi{{"h", cfg.vi_h}, {"tol", cfg.vi_tol}, {"max_iters", cfg.vi_max_iters},
          {"dx", cfg.vi_dx}};
  auto vec_to_json = [](const hjb::Vec& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
  };
  if (cfg.vi_lo) vi["lo"] = vec_to_json(*cfg.vi_lo);
  if (cfg.vi_hi) vi["hi"] = vec_to_json(*cfg.vi_hi);
  json j{{"problem", {{"name", cfg.problem_name}, {"overrides", overrides}}},
         {"constrained", cfg.constrained},
         {"solver", cfg.solver},
         {"grid", {{"dx", cfg.dx}}},
         {"vi", vi},
         {"dump",
          {{"tree", cfg.dump_tree},
           {"values", cfg.dump_values},
           {"trajectory", cfg.dump_trajectory},
           {"grid", cfg.dump_grid}}},
         {"out", out_dir},
         {"threads", cfg.threads},
         {"seed", cfg.seed}};
  json tree = json::object();
  if (cfg.eps_merge) tree["eps_merge"] = *cfg.eps_merge;
  tree["merge_norm"] = cfg.merge_norm == hjb::MergeNorm::Euclidean ? "EUCLIDEAN" : "MAX";
  j["tree"] = tree;
  json fb = json::object();
  if (!cfg.feedback_mode.empty()) fb["mode"] = cfg.feedback_mode;
  fb["gamma"] = cfg.gamma;
  if (cfg.extended_count) fb["extended_count"] = *cfg.extended_count;
  j["feedback"] = fb;
  return j;
}

int cmd_solve(const RunConfig& cfg) {
  auto cp = hjb::catalog(cfg.problem_name, cfg.overrides);
  hjb::ConstraintSet constraints =
      cfg.constrained ? cp.constraints : hjb::ConstraintSet::unbounded(cp.problem.dim_state);
  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  json summary;
  if (cfg.solver == "TREE")
    summary = solve_tree(cfg, cp, constraints, out);
  else if (cfg.solver == "GRID")
    summary = solve_grid_cmd(cfg, cp, constraints, out);
  else
    summary = solve_vi(cfg, cp, constraints, out);
  summary["problem"] = cp.name;
  summary["constrained"] = cfg.constrained;
  write_json_file(out / "summary.json", summary);
  write_json_file(out / "effective_config.json", effective_config(cfg, cfg.out_dir));
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_compare(const RunConfig& cfg) {
  auto cp = hjb::catalog(cfg.problem_name, cfg.overrides);
  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  const double gamma = cfg.gamma > 0.0 ? cfg.gamma : 7.0;
  const double eps = cfg.eps_merge.value_or(cp.time.step * cp.time.step);
  const hjb::ControlGrid traj_controls = reconstruction_controls(cfg, cp);

  // tree side
  Timer tt;
  auto [tree, stats] = hjb::build_tree(cp.problem, cp.constraints, cp.value_controls, cp.time,
                                       hjb::TreeBuildParams{eps, cfg.merge_norm}, cp.x0);
  hjb::ValueTable vt = hjb::backward_sweep(tree, cfg.threads);
  const double tree_time = tt.seconds();
  auto tree_plain = hjb::synthesize_extended(
      tree, vt, hjb::FeedbackParams{hjb::FeedbackMode::Extended, traj_controls, 0.0});
  auto tree_inertia = hjb::synthesize_extended(
      tree, vt, hjb::FeedbackParams{hjb::FeedbackMode::ExtendedInertia, traj_controls, gamma});

  // grid side
  hjb::UniformGrid ug = hjb::UniformGrid::from_constraints(cp.constraints, cfg.dx);
  if (!ug.in_box(cp.x0)) throw hjb::SolverError("grid does not contain the initial state");
  Timer tg;
  hjb::GridValue gv =
      hjb::solve_grid(cp.problem, cp.constraints, cp.classic_controls, cp.time, ug, cfg.threads);
  const double grid_time = tg.seconds();
  auto grid_plain = hjb::synthesize_grid_feedback(cp.problem, cp.constraints, traj_controls,
                                                  cp.time, ug, gv, cp.x0, 0.0);
  auto grid_inertia = hjb::synthesize_grid_feedback(cp.problem, cp.constraints, traj_controls,
                                                    cp.time, ug, gv, cp.x0, gamma);

  json report{{"problem", cp.name},
              {"gamma", gamma},
              {"tsa",
               {{"v0", hjb::value_at_root(vt)},
                {"nodes_total", stats.total_nodes},
                {"wall_time_s", tree_time},
                {"plain", trajectory_summary(tree_plain)},
                {"inertia", trajectory_summary(tree_inertia)}}},
              {"classic",
               {{"v0", hjb::query_grid_value(gv, ug, cp.x0, 0)},
                {"nodes_total", ug.n_admissible()},
                {"wall_time_s", grid_time},
                {"plain", trajectory_summary(grid_plain)},
                {"inertia", trajectory_summary(grid_inertia)}}}};

  {
    std::ofstream csv(out / "compare.csv", std::ios::binary);
    csv << "method,v0,cost_plain,switches_plain,cost_inertia,switches_inertia\n";
    csv << "TSA," << hjb::io::format_value(hjb::value_at_root(vt)) << ','
        << hjb::io::format_value(tree_plain.total_cost) << ','
        << hjb::count_control_switches(tree_plain) << ','
        << hjb::io::format_value(tree_inertia.total_cost) << ','
        << hjb::count_control_switches(tree_inertia) << '\n';
    csv << "Classic," << hjb::io::format_value(hjb::query_grid_value(gv, ug, cp.x0, 0)) << ','
        << hjb::io::format_value(grid_plain.total_cost) << ','
        << hjb::count_control_switches(grid_plain) << ','
        << hjb::io::format_value(grid_inertia.total_cost) << ','
        << hjb::count_control_switches(grid_inertia) << '\n';
  }
  write_json_file(out / "compare.json", report);

  std::printf("%-8s %10s %12s %12s\n", "method", "v0", "no inertia", "inertia");
  std::printf("%-8s %10.4f %12.4f %12.4f\n", "TSA", hjb::value_at_root(vt),
              tree_plain.total_cost, tree_inertia.total_cost);
  std::printf("%-8s %10.4f %12.4f %12.4f\n", "Classic",
              hjb::query_grid_value(gv, ug, cp.x0, 0), grid_plain.total_cost,
              grid_inertia.total_cost);
  return 0;
}

struct CheckList {
  json checks = json::array();
  bool all_ok = true;

  void add(const std::string& name, bool ok, double value, const std::string& detail) {
    checks.push_back(json{{"check", name}, {"pass", ok}, {"value", value}, {"detail", detail}});
    all_ok = all_ok && ok;
    std::printf("  [%s] %s = %.6g (%s)\n", ok ? "PASS" : "FAIL", name.c_str(), value,
                detail.c_str());
  }
};

double max_coord(const hjb::Trajectory& tr, int axis) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& s : tr.states) m = std::max(m, s[axis]);
  return m;
}

bool tree_all_admissible(const hjb::Tree& tree) {
  for (int n = 0; n < tree.n_levels(); ++n)
    for (std::int64_t i = 0; i < tree.level_size(n); ++i)
      if (!hjb::is_admissible(tree.meta().constraints, tree.state(n, i))) return false;
  return true;
}

int cmd_reproduce(const std::string& test, const RunConfig& base) {
  RunConfig cfg = base;
  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  CheckList checks;
  json summary;

  if (test == "test1") {
    auto cp = hjb::catalog("oscillator", cfg.overrides);
    const double eps = cfg.eps_merge.value_or(cp.time.step * cp.time.step);
    hjb::TreeBuildParams params{eps, cfg.merge_norm};
    Timer tc;
    auto [tree, stats] =
        hjb::build_tree(cp.problem, cp.constraints, cp.value_controls, cp.time, params, cp.x0);
    auto vt = hjb::backward_sweep(tree, cfg.threads);
    const double constrained_time = tc.seconds();
    auto traj = hjb::synthesize_tree_path(tree, vt);
    hjb::io::write_trajectory((out / "trajectory.csv").string(), traj);

    Timer tu;
    auto [utree, ustats] =
        hjb::build_tree(cp.problem, hjb::ConstraintSet::unbounded(2), cp.value_controls,
                        cp.time, params, cp.x0);
    const double unconstrained_time = tu.seconds();

    const double ratio =
        static_cast<double>(stats.total_nodes) / static_cast<double>(ustats.total_nodes);
    checks.add("node_ratio<=0.30", ratio <= 0.30, ratio,
               std::to_string(stats.total_nodes) + "/" + std::to_string(ustats.total_nodes));
    checks.add("trajectory_max_x1<=2+1e-9", max_coord(traj, 0) <= 2.0 + 1e-9,
               max_coord(traj, 0), "box bound");
    checks.add("tree_nodes_admissible", tree_all_admissible(tree), 1.0, "all levels");
    checks.add("trajectory_admissible", traj.all_admissible, 1.0, "all states");
    checks.add("constrained_build_faster", constrained_time < unconstrained_time,
               constrained_time, "vs " + std::to_string(unconstrained_time) + " s");
    summary = json{{"test", "test1"},
                   {"v0", hjb::value_at_root(vt)},
                   {"cost", traj.total_cost},
                   {"nodes_constrained", stats.total_nodes},
                   {"nodes_unconstrained", ustats.total_nodes},
                   {"wall_time_constrained_s", constrained_time},
                   {"wall_time_unconstrained_s", unconstrained_time}};
  } else if (test == "test2a") {
    auto cp = hjb::catalog("eikonal_channel", cfg.overrides);
    const double eps = cfg.eps_merge.value_or(cp.time.step * cp.time.step);
    Timer tt;
    auto [tree, stats] = hjb::build_tree(cp.problem, cp.constraints, cp.value_controls, cp.time,
                                         hjb::TreeBuildParams{eps, cfg.merge_norm}, cp.x0);
    auto vt = hjb::backward_sweep(tree, cfg.threads);
    const double tree_time = tt.seconds();
    auto tsa_plain = hjb::synthesize_extended(
        tree, vt, hjb::FeedbackParams{hjb::FeedbackMode::Extended, cp.trajectory_controls, 0.0});
    auto tsa_inertia = hjb::synthesize_extended(
        tree, vt,
        hjb::FeedbackParams{hjb::FeedbackMode::ExtendedInertia, cp.trajectory_controls, 7.0});
    hjb::io::write_trajectory((out / "trajectory_tsa.csv").string(), tsa_plain);
    hjb::io::write_trajectory((out / "trajectory_tsa_inertia.csv").string(), tsa_inertia);

    hjb::UniformGrid ug = hjb::UniformGrid::from_constraints(cp.constraints, cfg.dx);
    Timer tg;
    auto gv = hjb::solve_grid(cp.problem, cp.constraints, cp.classic_controls, cp.time, ug,
                              cfg.threads);
    const double grid_time = tg.seconds();
    const double grid_v0 = hjb::query_grid_value(gv, ug, cp.x0, 0);
    auto grid_plain = hjb::synthesize_grid_feedback(cp.problem, cp.constraints,
                                                    cp.trajectory_controls, cp.time, ug, gv,
                                                    cp.x0, 0.0);
    auto grid_inertia = hjb::synthesize_grid_feedback(cp.problem, cp.constraints,
                                                      cp.trajectory_controls, cp.time, ug, gv,
                                                      cp.x0, 7.0);
    hjb::io::write_trajectory((out / "trajectory_classic.csv").string(), grid_plain);

    checks.add("tsa_cost_in[1.515,1.615]",
               tsa_plain.total_cost >= 1.515 && tsa_plain.total_cost <= 1.615,
               tsa_plain.total_cost, "reference bracket");
    checks.add("grid_value_in[1.61,1.71]", grid_v0 >= 1.61 && grid_v0 <= 1.71, grid_v0,
               "reference bracket");
    checks.add("grid_inertia_cost_in[1.55,1.65]",
               grid_inertia.total_cost >= 1.55 && grid_inertia.total_cost <= 1.65,
               grid_inertia.total_cost, "reference bracket, gamma=7");
    checks.add("tsa_switches_decrease",
               hjb::count_control_switches(tsa_inertia) < hjb::count_control_switches(tsa_plain),
               hjb::count_control_switches(tsa_inertia),
               "vs " + std::to_string(hjb::count_control_switches(tsa_plain)));
    checks.add("grid_switches_decrease",
               hjb::count_control_switches(grid_inertia) <
                   hjb::count_control_switches(grid_plain),
               hjb::count_control_switches(grid_inertia),
               "vs " + std::to_string(hjb::count_control_switches(grid_plain)));
    checks.add("tree_nodes_admissible", tree_all_admissible(tree), 1.0, "all levels");
    checks.add("trajectories_admissible",
               tsa_plain.all_admissible && tsa_inertia.all_admissible &&
                   grid_plain.all_admissible && grid_inertia.all_admissible,
               1.0, "all four");
    checks.add("tsa_faster_than_grid", tree_time < grid_time, tree_time,
               "vs " + std::to_string(grid_time) + " s");
    summary = json{{"test", "test2a"},
                   {"tsa_v0", hjb::value_at_root(vt)},
                   {"tsa_cost", tsa_plain.total_cost},
                   {"tsa_cost_inertia", tsa_inertia.total_cost},
                   {"grid_v0", grid_v0},
                   {"grid_cost", grid_plain.total_cost},
                   {"grid_cost_inertia", grid_inertia.total_cost},
                   {"nodes_total", stats.total_nodes},
                   {"tsa_wall_time_s", tree_time},
                   {"grid_wall_time_s", grid_time}};
  } else if (test == "test2b") {
    auto cp = hjb::catalog("eikonal_obstacles", cfg.overrides);
    const double eps = cfg.eps_merge.value_or(cp.time.step * cp.time.step);
    Timer tt;
    auto [tree, stats] = hjb::build_tree(cp.problem, cp.constraints, cp.value_controls, cp.time,
                                         hjb::TreeBuildParams{eps, cfg.merge_norm}, cp.x0);
    auto vt = hjb::backward_sweep(tree, cfg.threads);
    const double tree_time = tt.seconds();
    auto traj = hjb::synthesize_extended(
        tree, vt, hjb::FeedbackParams{hjb::FeedbackMode::Extended, cp.trajectory_controls, 0.0});
    hjb::io::write_trajectory((out / "trajectory.csv").string(), traj);
    checks.add("tree_nodes_admissible", tree_all_admissible(tree), 1.0, "all levels");
    checks.add("trajectory_admissible", traj.all_admissible, 1.0, "all states");
    checks.add("target_reached", traj.states.back().norm() <= 0.2, traj.states.back().norm(),
               "final |x|");
    summary = json{{"test", "test2b"},
                   {"v0", hjb::value_at_root(vt)},
                   {"cost", traj.total_cost},
                   {"nodes_total", stats.total_nodes},
                   {"wall_time_s", tree_time}};
  } else if (test == "test3") {
    auto cp = hjb::catalog("vanderpol", cfg.overrides);
    const double eps = cfg.eps_merge.value_or(cp.time.step * cp.time.step);
    Timer tt;
    auto [tree, stats] = hjb::build_tree(cp.problem, cp.constraints, cp.value_controls, cp.time,
                                         hjb::TreeBuildParams{eps, cfg.merge_norm}, cp.x0);
    auto vt = hjb::backward_sweep(tree, cfg.threads);
    const double tree_time = tt.seconds();
    auto traj = hjb::synthesize_extended(
        tree, vt, hjb::FeedbackParams{hjb::FeedbackMode::Extended, cp.trajectory_controls, 0.0});
    hjb::io::write_trajectory((out / "trajectory.csv").string(), traj);
    checks.add("tree_nodes_admissible", tree_all_admissible(tree), 1.0, "all levels");
    checks.add("trajectory_admissible", traj.all_admissible, 1.0, "all states");
    checks.add("final_norm<=0.2", traj.states.back().norm() <= 0.2, traj.states.back().norm(),
               "reaches the origin");
    summary = json{{"test", "test3"},
                   {"v0", hjb::value_at_root(vt)},
                   {"cost", traj.total_cost},
                   {"nodes_total", stats.total_nodes},
                   {"wall_time_s", tree_time}};
  } else {
    throw ConfigError("unknown test '" + test + "'; valid: test1, test2a, test2b, test3");
  }

  summary["checks"] = checks.checks;
  write_json_file(out / "checks.json", summary);
  if (!checks.all_ok) {
    std::fprintf(stderr, "reproduce %s: threshold failure\n", test.c_str());
    return kExitThreshold;
  }
  std::printf("reproduce %s: all checks passed\n", test.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solvers for state-constrained optimal control: reachable-tree dynamic "
               "programming, a fixed-grid semi-Lagrangian baseline, and constrained value "
               "iteration"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::uint64_t seed = 0;
  bool have_seed = false;

  auto add_common = [&](CLI::App* cmd, bool need_config) {
    auto* opt = cmd->add_option("--config", config_path, "JSON run configuration");
    if (need_config) opt->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--threads", threads, "parallelism cap (overrides config)");
    cmd->add_option("--seed", seed, "rng seed for diagnostics sampling")
        ->each([&](const std::string&) { have_seed = true; });
  };

  auto* solve = app.add_subcommand("solve", "run one solver on a catalog problem");
  add_common(solve, true);
  auto* compare = app.add_subcommand("compare", "run tree and grid solvers side by side");
  add_common(compare, true);
  auto* reproduce = app.add_subcommand("reproduce", "scripted benchmark pipelines");
  std::string test_id;
  reproduce->add_option("test", test_id, "one of test1, test2a, test2b, test3")->required();
  add_common(reproduce, false);
  auto* catalog_cmd = app.add_subcommand("catalog", "catalog utilities");
  catalog_cmd->require_subcommand(1);
  auto* catalog_list = catalog_cmd->add_subcommand("list", "list catalog problem names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (catalog_cmd->parsed() && catalog_list->parsed()) {
      for (const auto& name : hjb::catalog_names()) std::cout << name << "\n";
      return 0;
    }
    RunConfig cfg;
    if (!config_path.empty()) cfg = parse_config(load_json(config_path));
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads > 0) cfg.threads = threads;
    if (have_seed) cfg.seed = seed;

    if (solve->parsed()) return cmd_solve(cfg);
    if (compare->parsed()) return cmd_compare(cfg);
    if (reproduce->parsed()) {
      if (cfg.out_dir == "out") cfg.out_dir = "out/" + test_id;
      return cmd_reproduce(test_id, cfg);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolver;
  }
  return 0;
}

#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hjb/problem.hpp"

namespace hjb {

/// A fully assembled benchmark instance: problem data, constraint geometry,
/// the control set used for the value sweep, a (possibly larger) control set
/// for trajectory reconstruction, the time grid and the initial state.
struct CatalogProblem {
  std::string name;
  ProblemSpec problem;
  ConstraintSet constraints;
  ControlGrid value_controls;       // tree / value sweep
  ControlGrid trajectory_controls;  // feedback reconstruction
  ControlGrid classic_controls;     // fixed-grid value sweep
  TimeGrid time;
  Vec x0;
};

inline const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names = {"oscillator", "eikonal_channel",
                                                 "eikonal_obstacles", "vanderpol"};
  return names;
}

namespace detail {

inline double take_param(std::map<std::string, double>& params, const std::string& key,
                         double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double v = it->second;
  params.erase(it);
  return v;
}

inline std::vector<Vec> scalar_controls(std::initializer_list<double> us) {
  std::vector<Vec> pts;
  for (double u : us) pts.push_back(make_vec({u}));
  return pts;
}

/// n points spread over the closed unit ball, area-weighted onto rings of
/// radius 1, 1/2, 1/4, 1/8 (full-speed ring first), followed by the origin.
/// The interior speeds let a feedback law brake near a target instead of
/// orbiting it at full speed forever.
inline std::vector<Vec> ball_controls(int n) {
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(n) + 1);
  const int angles[4] = {n * 3 / 4, n / 8, n / 16, n - n * 3 / 4 - n / 8 - n / 16};
  const double radius[4] = {1.0, 0.5, 0.25, 0.125};
  for (int r = 0; r < 4; ++r) {
    for (int k = 0; k < angles[r]; ++k) {
      const double a = 2.0 * std::numbers::pi * k / angles[r];
      pts.push_back(make_vec({radius[r] * std::cos(a), radius[r] * std::sin(a)}));
    }
  }
  pts.push_back(make_vec({0.0, 0.0}));
  return pts;
}

/// The nine integer points of the square [-1,1]^2, origin last. Images land
/// on an h-lattice, which is what keeps the reachable tree small.
inline std::vector<Vec> square_controls() {
  return {make_vec({1, 0}),  make_vec({1, 1}),   make_vec({0, 1}),
          make_vec({-1, 1}), make_vec({-1, 0}),  make_vec({-1, -1}),
          make_vec({0, -1}), make_vec({1, -1}),  make_vec({0, 0})};
}

/// The same eight directions scaled onto the unit circle, plus the origin:
/// the speed-1 discretization used by the fixed-grid solver.
inline std::vector<Vec> unit_square_controls() {
  std::vector<Vec> pts = square_controls();
  for (Vec& u : pts)
    if (u.norm() > 0.0) u /= u.norm();
  return pts;
}

inline ProblemSpec eikonal_problem(double lambda, double t_end, double target_radius) {
  ProblemSpec p;
  p.dim_state = 2;
  p.dim_control = 2;
  p.dynamics = [](const Vec& x, const Vec& u, double) -> Vec {
    (void)x;
    return u;
  };
  // Unit cost until the state enters the target ball around the origin.
  p.running_cost = [target_radius](const Vec& x, const Vec&, double) -> double {
    return x.norm() > target_radius ? 1.0 : 0.0;
  };
  p.terminal_cost = [target_radius](const Vec& x) -> double {
    return x.norm() > target_radius ? 1.0 : 0.0;
  };
  p.discount = lambda;
  p.t_start = 0.0;
  p.t_end = t_end;
  ProblemBounds b;
  b.max_dynamics = std::numbers::sqrt2;
  b.lip_dynamics = 0.0;
  b.max_running_cost = 1.0;
  b.max_terminal_cost = 1.0;
  p.bounds = b;
  return p;
}

inline CatalogProblem make_oscillator(std::map<std::string, double> params) {
  // Default spring constant chosen so the box-constrained problem stays
  // viable over the whole horizon (for k >= ~0.52 every branch of the
  // reachable tree leaves [0,2]^2 through the x2=0 edge before t=T).
  const double k = take_param(params, "k", 0.51);
  const double T = take_param(params, "T", 1.5);
  const double h = take_param(params, "h", 0.025);
  const double lambda = take_param(params, "lambda", 0.0);
  const double x0a = take_param(params, "x0_0", 1.0);
  const double x0b = take_param(params, "x0_1", 0.5);
  if (!params.empty())
    throw std::invalid_argument("oscillator: unknown parameter '" + params.begin()->first + "'");

  ProblemSpec p;
  p.dim_state = 2;
  p.dim_control = 1;
  p.dynamics = [k](const Vec& x, const Vec& u, double) -> Vec {
    return make_vec({x[1], -k * x[0] + u[0] * x[1]});
  };
  p.running_cost = [](const Vec& x, const Vec&, double) {
    return (x[0] - 3.0) * (x[0] - 3.0);
  };
  p.terminal_cost = [](const Vec& x) { return (x[0] - 3.0) * (x[0] - 3.0); };
  p.discount = lambda;
  p.t_start = 0.0;
  p.t_end = T;
  ProblemBounds b;
  b.max_dynamics = std::hypot(2.0, 2.0 * k + 2.0);
  b.lip_dynamics = std::sqrt(2.0 + k * k);
  b.max_running_cost = 9.0;
  b.lip_running_cost = 6.0;
  b.max_terminal_cost = 9.0;
  b.lip_terminal_cost = 6.0;
  p.bounds = b;
  ControlGrid controls(scalar_controls({-1.0, 0.0, 1.0}));
  return CatalogProblem{"oscillator",
                        p,
                        ConstraintSet::box(make_vec({0.0, 0.0}), make_vec({2.0, 2.0})),
                        controls,
                        controls,
                        controls,
                        TimeGrid::from_step(0.0, T, h),
                        make_vec({x0a, x0b})};
}

inline CatalogProblem make_eikonal(std::map<std::string, double> params, bool channel) {
  const double T = take_param(params, "T", 2.0);
  const double h = take_param(params, "h", 0.005);
  const double lambda = take_param(params, "lambda", 0.0);
  // Default target size: one Euler step. A feedback trajectory moving at
  // speed <= 1 quantized to finitely many directions parks within one step
  // of the origin, so a smaller ball would never register arrival.
  const double r = take_param(params, "target_radius", h);
  const double x0a = take_param(params, "x0_0", 1.0);
  const double x0b = take_param(params, "x0_1", 1.0);
  if (!params.empty())
    throw std::invalid_argument("eikonal: unknown parameter '" + params.begin()->first + "'");

  ConstraintSet constraints = ConstraintSet::box(make_vec({-h, -h}), make_vec({1.0, 1.0}));
  if (channel) {
    // Circular channel 0.9 <= (x-1)^2 + y^2 <= 1.1.
    constraints.obstacles.push_back(Obstacle{
        [](const Vec& x) {
          const double dx = x[0] - 1.0;
          return dx * dx + x[1] * x[1] - 1.1;
        },
        Obstacle::Sense::Geq});
    constraints.obstacles.push_back(Obstacle{
        [](const Vec& x) {
          const double dx = x[0] - 1.0;
          return 0.9 - (dx * dx + x[1] * x[1]);
        },
        Obstacle::Sense::Geq});
  } else {
    // A small disc and a thin ellipse inside the box.
    constraints.obstacles.push_back(Obstacle{
        [](const Vec& x) {
          const double dx = x[0] - 0.9;
          const double dy = x[1] - 0.9;
          return 0.005 - (dx * dx + dy * dy);
        },
        Obstacle::Sense::Geq});
    constraints.obstacles.push_back(Obstacle{
        [](const Vec& x) {
          const double dx = x[0] - 0.3;
          const double dy = x[1] - 0.05;
          return 0.001 - (dx * dx / 80.0 + dy * dy);
        },
        Obstacle::Sense::Geq});
  }
  return CatalogProblem{channel ? "eikonal_channel" : "eikonal_obstacles",
                        eikonal_problem(lambda, T, r),
                        constraints,
                        ControlGrid(square_controls()),
                        ControlGrid(ball_controls(channel ? 64 : 32)),
                        ControlGrid(unit_square_controls()),
                        TimeGrid::from_step(0.0, T, h),
                        make_vec({x0a, x0b})};
}

inline CatalogProblem make_vanderpol(std::map<std::string, double> params) {
  const double mu = take_param(params, "mu", 0.15);
  const double T = take_param(params, "T", 1.4);
  const double h = take_param(params, "h", 0.025);
  const double lambda = take_param(params, "lambda", 0.0);
  const double x0a = take_param(params, "x0_0", 0.4);
  const double x0b = take_param(params, "x0_1", -0.3);
  if (!params.empty())
    throw std::invalid_argument("vanderpol: unknown parameter '" + params.begin()->first + "'");

  ProblemSpec p;
  p.dim_state = 2;
  p.dim_control = 1;
  p.dynamics = [mu](const Vec& x, const Vec& u, double) -> Vec {
    return make_vec({x[1], mu * (1.0 - x[0] * x[0]) * x[1] - x[0] + u[0]});
  };
  p.running_cost = [](const Vec& x, const Vec&, double) { return x.squaredNorm(); };
  p.terminal_cost = [](const Vec& x) { return x.squaredNorm(); };
  p.discount = lambda;
  p.t_start = 0.0;
  p.t_end = T;
  ConstraintSet constraints = ConstraintSet::box(
      make_vec({-h, -std::numeric_limits<double>::infinity()}), make_vec({0.5, 0.1}));
  // Forbidden rectangle (0.1,0.3) x (-0.5,-0.3); boundary admissible.
  constraints.obstacles.push_back(Obstacle{
      [](const Vec& x) {
        return std::min(std::min(x[0] - 0.1, 0.3 - x[0]), std::min(x[1] + 0.5, -0.3 - x[1]));
      },
      Obstacle::Sense::Geq});
  return CatalogProblem{"vanderpol",
                        p,
                        constraints,
                        ControlGrid(scalar_controls({-1.0, 1.0})),
                        ControlGrid(scalar_controls({-1.0, 0.0, 1.0})),
                        ControlGrid(scalar_controls({-1.0, 1.0})),
                        TimeGrid::from_step(0.0, T, h),
                        make_vec({x0a, x0b})};
}

}  // namespace detail

/// Assembles a named benchmark problem. Recognized overrides (all flat
/// doubles): T, h, lambda, x0_0, x0_1, plus k (oscillator), mu (vanderpol)
/// and target_radius (eikonal variants).
inline CatalogProblem catalog(const std::string& name,
                              const std::map<std::string, double>& params = {}) {
  if (name == "oscillator") return detail::make_oscillator(params);
  if (name == "eikonal_channel") return detail::make_eikonal(params, true);
  if (name == "eikonal_obstacles") return detail::make_eikonal(params, false);
  if (name == "vanderpol") return detail::make_vanderpol(params);
  std::ostringstream os;
  os << "catalog: unknown problem '" << name << "'; valid names:";
  for (const auto& n : catalog_names()) os << " " << n;
  throw std::invalid_argument(os.str());
}

}  // namespace hjb

// Copyright 2026 The ciao-star Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "ciao/dynamics.hpp"
#include "ciao/errors.hpp"
#include "ciao/geometry.hpp"
#include "ciao/initializer.hpp"
#include "ciao/norm.hpp"
#include "ciao/ocp.hpp"
#include "ciao/planner.hpp"

namespace ciao {

enum class ObstacleMix { Disks, Mixed };

inline std::string to_string(ObstacleMix m) { return m == ObstacleMix::Disks ? "disks" : "mixed"; }

inline ObstacleMix parse_mix(const std::string& s) {
  if (s == "disks") return ObstacleMix::Disks;
  if (s == "mixed" || s == "disks+boxes") return ObstacleMix::Mixed;
  throw std::invalid_argument("unknown obstacle mix '" + s + "'");
}

struct ScenarioParams {
  int n_obstacles = 5;
  double r_min = 1.0;
  double r_max = 2.0;
  ObstacleMix mix = ObstacleMix::Disks;
  double moving_fraction = 0.0;
  double max_speed = 0.5;
  // Moving obstacles travel for this long and then stop.
  double motion_duration = 8.0;
  // Clearance on top of rho + robot extent at start and goal.
  double margin = 0.1;

  void validate() const {
    if (n_obstacles < 0) throw std::invalid_argument("n_obstacles must be nonnegative");
    if (!(r_min > 0.0) || r_max < r_min) throw std::invalid_argument("bad radius range");
    if (moving_fraction < 0.0 || moving_fraction > 1.0) {
      throw std::invalid_argument("moving_fraction must lie in [0, 1]");
    }
    if (max_speed < 0.0 || motion_duration < 0.0) throw std::invalid_argument("bad motion params");
  }
};

struct Scenario {
  std::uint64_t seed = 0;
  Scene scene;
  Eigen::VectorXd x_start;
  Eigen::VectorXd x_goal;
};

// Smallest clearance of p over all times, in every norm, against the scene.
inline double worst_clearance(const Scene& scene, const Point& p, double extent_rho,
                              double t_end) {
  const OccupiedSnapshot all = swept_snapshot(scene, 0.0, t_end);
  double worst = std::numeric_limits<double>::infinity();
  for (Norm n : {Norm::L1, Norm::L2, Norm::Linf}) {
    worst = std::min(worst, scene_signed_distance(p, all, n) - extent_rho);
  }
  return worst;
}

// Random scene in a 20 x 20 m workspace: start in the lower-left corner,
// goal in the upper-right corner, both at rest.
inline Scenario generate_scenario(std::uint64_t seed, const ScenarioParams& params,
                                  const DiscreteModel& model) {
  params.validate();
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  Scenario sc;
  sc.seed = seed;
  const Point start(uni(1.5, 3.0), uni(1.5, 3.0));
  const Point goal(uni(17.0, 18.5), uni(17.0, 18.5));
  sc.x_start = rest_state(model, start);
  sc.x_goal = rest_state(model, goal);

  double extent = 0.0;
  for (const Eigen::Vector2d& l : model.vertex_offsets) {
    for (Norm n : {Norm::L1, Norm::L2, Norm::Linf}) extent = std::max(extent, norm_eval(l, n));
  }
  const double need = action_radius(model.bounds, model.dt) + extent + params.margin;
  const int n_moving = static_cast<int>(std::lround(params.moving_fraction * params.n_obstacles));
  const double horizon = params.motion_duration + 1.0;

  int rejections = 0;
  while (static_cast<int>(sc.scene.obstacles.size()) < params.n_obstacles) {
    const int idx = static_cast<int>(sc.scene.obstacles.size());
    MovingObstacle ob;
    const Point c(uni(0.0, 20.0), uni(0.0, 20.0));
    const bool box = params.mix == ObstacleMix::Mixed && uni(0.0, 1.0) < 0.5;
    if (box) {
      const Point half(uni(params.r_min, params.r_max), uni(params.r_min, params.r_max));
      ob.shape = AxisBox{c - half, c + half};
    } else {
      ob.shape = Disk{c, uni(params.r_min, params.r_max)};
    }
    if (idx < n_moving) {
      const double speed = uni(0.0, params.max_speed);
      const double heading = uni(0.0, 2.0 * std::numbers::pi);
      ob.motion.push_back({0.0, speed * Point(std::cos(heading), std::sin(heading))});
      ob.motion.push_back({params.motion_duration, Point::Zero()});
    }
    Scene trial = sc.scene;
    trial.obstacles.push_back(ob);
    Scene single;
    single.obstacles.push_back(ob);
    if (worst_clearance(single, start, need, horizon) >= 0.0 &&
        worst_clearance(single, goal, need, horizon) >= 0.0) {
      sc.scene = std::move(trial);
    } else if (++rejections >= 1000) {
      throw GenerationFailed("obstacle placement rejected 1000 times");
    }
  }
  return sc;
}

struct Metrics {
  bool success = false;
  double time_to_goal = std::numeric_limits<double>::infinity();
  double path_length = 0.0;
  double control_effort = 0.0;
  double clearance = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int iterations_to_feasible = -1;
  int steps = 0;
  double wall_time = 0.0;
  double median_step_time = 0.0;
  double max_step_time = 0.0;
  std::string reason;
};

// First knot after which the trajectory stays at the goal.
inline int goal_arrival_index(const std::vector<Eigen::VectorXd>& states,
                              const Eigen::VectorXd& goal, double tol = 1e-3) {
  int k = static_cast<int>(states.size());
  while (k > 0 && at_goal(states[k - 1], goal, tol)) --k;
  return k == static_cast<int>(states.size()) ? -1 : k;
}

// Metrics of a knot sequence with its controls; the clearance is measured on
// the exact inter-sample motion against the instantaneous obstacles.
inline Metrics evaluate_metrics(const Trajectory& w, const DiscreteModel& model,
                                const Scene& scene, const Eigen::VectorXd& goal,
                                int substeps = 20) {
  Metrics m;
  const int k_goal = goal_arrival_index(w.states, goal);
  m.success = k_goal >= 0;
  const int last = m.success ? k_goal : w.horizon();
  if (m.success) m.time_to_goal = k_goal * w.dt;
  for (int k = 0; k < last; ++k) {
    m.path_length += (model.S_p * (w.states[k + 1] - w.states[k])).norm();
    m.control_effort += w.controls[k].squaredNorm() * w.dt;
  }
  double circum = 0.0;
  for (const Eigen::Vector2d& l : model.vertex_offsets) circum = std::max(circum, l.norm());
  for (const FineSample& s : fine_samples(w, model, substeps)) {
    if (s.interval >= std::max(last, 1)) break;
    const OccupiedSnapshot snap = instant_snapshot(scene, s.t);
    const double d = scene_signed_distance(s.position, snap, Norm::L2);
    m.clearance = std::min(m.clearance, d - circum);
  }
  return m;
}

inline Trajectory trace_trajectory(const MpcTrace& trace, const DiscreteModel& model) {
  Trajectory w;
  w.dt = model.dt;
  w.states = trace.states();
  for (const MpcStep& s : trace.steps) w.controls.push_back(s.u);
  return w;
}

inline Metrics evaluate_metrics(const MpcTrace& trace, const DiscreteModel& model,
                                const Scene& scene, const Eigen::VectorXd& goal,
                                int substeps = 20) {
  if (trace.steps.empty()) {
    Metrics m;
    m.success = trace.reached_goal;
    m.time_to_goal = trace.reached_goal ? 0.0 : m.time_to_goal;
    m.clearance = scene_signed_distance(model.S_p * trace.start, instant_snapshot(scene, 0.0),
                                        Norm::L2);
    return m;
  }
  Metrics m = evaluate_metrics(trace_trajectory(trace, model), model, scene, goal, substeps);
  m.success = trace.reached_goal;
  m.steps = static_cast<int>(trace.steps.size());
  if (trace.reached_goal) m.time_to_goal = m.steps * model.dt;
  std::vector<double> times;
  for (const MpcStep& s : trace.steps) {
    times.push_back(s.wall_time);
    m.wall_time += s.wall_time;
  }
  std::sort(times.begin(), times.end());
  const std::size_t n = times.size();
  m.median_step_time = n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
  m.max_step_time = times.back();
  if (!trace.failure.empty()) {
    m.reason = "solver_failure";
  } else if (trace.budget_exhausted) {
    m.reason = "step_budget";
  }
  return m;
}

// Guess of horizon N along a polyline: the half-bound profile is stretched
// or compressed in time so that it ends exactly at step N.
inline Trajectory retimed_guess(const DiscreteModel& model, const Eigen::VectorXd& x_s,
                                const Eigen::VectorXd& x_g, const std::vector<Point>& path,
                                Norm norm, int N, const InitializerOptions& opt) {
  const PathProfile prof(path, model.bounds, norm, opt.bound_fraction);
  const double scale = N > 0 ? prof.duration() / (N * model.dt) : 1.0;
  std::vector<Eigen::VectorXd> refs;
  for (int k = 0; k <= N; ++k) {
    const auto d = prof.eval(k * model.dt * scale);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(model.nx());
    std::vector<int> seen(8, 0);
    for (int i = 0; i < model.nx(); ++i) {
      const int order = model.derivative_order[i];
      const int axis = seen[order]++;
      if (order < 3 && axis < 2) x[i] = d[order][axis] * std::pow(scale, order);
    }
    refs.push_back(x);
  }
  return fit_rollout(model, x_s, refs, x_g, 0.0);
}

inline std::vector<Point> knot_path(const Trajectory& w, const DiscreteModel& model) {
  std::vector<Point> out;
  for (int k = 0; k <= w.horizon(); ++k) {
    const Point p = model.S_p * w.states[k];
    if (out.empty() || (p - out.back()).norm() > 1e-9) out.push_back(p);
  }
  if (out.size() == 1) out.push_back(out.front());
  return out;
}

struct ReferenceProbe {
  int N;
  bool feasible;
  double wall_time = 0.0;
};

struct Reference {
  int N = 0;
  Trajectory w;
  std::vector<ReferenceProbe> probes;
};

struct ReferenceOptions {
  int max_N = 400;
  // Initial upper bound; the fixed-horizon solution of the planner itself
  // when available.
  std::optional<Trajectory> upper;
  // Per probe and start. Slack recovery stays as configured: it lets a
  // probe climb out of a colliding guess, which strengthens the oracle.
  int max_outer_iterations = 20;
};

// Fixed-horizon trajopt from several starts; returns the first feasible,
// converged result.
inline std::optional<Trajectory> solve_fixed_horizon(const PlanningProblem& P,
                                                     const Scenario& sc, int N,
                                                     const std::vector<std::vector<Point>>& paths) {
  for (const std::vector<Point>& path : paths) {
    Trajectory guess;
    try {
      guess = retimed_guess(P.model, sc.x_start, sc.x_goal, path, P.ocp.norm, N,
                            P.planner.initializer);
      const TrajoptResult r = trajopt(guess, P, sc.x_start);
      if (r.converged && r.feasible.back()) return r.w;
    } catch (const Error&) {
    }
  }
  return std::nullopt;
}

// Smallest horizon admitting a feasible converged trajopt solution, by
// bisection, with a cache keyed on scenario seed and horizon bound.
inline Reference time_optimal_reference(const Scenario& sc, const PlanningProblem& problem,
                                        const ReferenceOptions& opt = {}) {
  PlanningProblem P = problem;
  P.planner.max_outer_iterations = opt.max_outer_iterations;
  Reference ref;
  if (at_goal(sc.x_start, sc.x_goal)) {
    ref.N = 0;
    ref.w = stationary_trajectory(P.model, sc.x_start, 0, 0.0);
    return ref;
  }
  const Point ps = P.model.S_p * sc.x_start;
  const Point pg = P.model.S_p * sc.x_goal;
  std::vector<std::vector<Point>> paths;
  if (opt.upper) paths.push_back(knot_path(*opt.upper, P.model));
  try {
    InitializerOptions io = P.planner.initializer;
    io.kind = Initializer::GridAStar;
    paths.push_back(plan_path(P.scene, P.model, ps, pg, P.ocp.norm, io, 0.0));
  } catch (const NoPath&) {
  }
  paths.push_back({ps, pg});

  auto probe = [&](int n, const std::vector<std::vector<Point>>& starts) {
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<Trajectory> w = solve_fixed_horizon(P, sc, n, starts);
    ref.probes.push_back(
        {n, w.has_value(),
         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
    return w;
  };
  auto with_best = [&](const Trajectory& w) {
    std::vector<std::vector<Point>> starts = paths;
    starts.insert(starts.begin(), knot_path(w, P.model));
    return starts;
  };

  // Lower bound from the speed limit alone.
  int lo = std::max(0, static_cast<int>(std::floor(norm_eval(pg - ps, P.ocp.norm) /
                                                   (P.model.bounds(1) * P.model.dt))) - 1);
  int hi = -1;
  std::optional<Trajectory> best;
  if (opt.upper) {
    const int k = goal_arrival_index(opt.upper->states, sc.x_goal);
    if (k > 0) {
      best = probe(k, paths);
      if (best) hi = k;
    }
  }
  if (hi < 0) {
    int n = std::max(lo + 1, 1);
    while (n <= opt.max_N) {
      if (auto w = probe(n, paths)) {
        hi = n;
        best = w;
        break;
      }
      lo = n;
      n *= 2;
    }
    if (hi < 0) throw NoReference("no feasible horizon up to " + std::to_string(opt.max_N));
  }
  bool lo_tried_from_best = false;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (auto w = probe(mid, with_best(*best))) {
      hi = mid;
      best = w;
      lo_tried_from_best = false;
    } else {
      lo = mid;
      lo_tried_from_best = true;
    }
  }
  // The bisection assumes monotone feasibility; probe N - 1 explicitly
  // unless it already failed from the current best.
  if (hi - 1 >= 1 && !(lo == hi - 1 && lo_tried_from_best)) {
    if (auto w = probe(hi - 1, with_best(*best))) {
      --hi;
      best = w;
    }
  }
  ref.N = hi;
  ref.w = *best;
  return ref;
}

// Memoizes references per (seed, norm, N bound).
class ReferenceCache {
 public:
  Reference get(const Scenario& sc, const PlanningProblem& P, const ReferenceOptions& opt = {}) {
    const auto key = std::make_tuple(sc.seed, static_cast<int>(P.ocp.norm), opt.max_N);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    Reference r = time_optimal_reference(sc, P, opt);
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(key, r);
    return r;
  }
  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::tuple<std::uint64_t, int, int>, Reference> cache_;
};

}  // namespace ciao

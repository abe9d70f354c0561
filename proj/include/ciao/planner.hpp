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

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ciao/conic.hpp"
#include "ciao/dynamics.hpp"
#include "ciao/errors.hpp"
#include "ciao/geometry.hpp"
#include "ciao/initializer.hpp"
#include "ciao/interior_point.hpp"
#include "ciao/ocp.hpp"

namespace ciao {

enum class SolverBackend { InteriorPoint, Admm };

inline std::string to_string(SolverBackend b) {
  return b == SolverBackend::Admm ? "admm" : "ipm";
}

inline SolverBackend parse_backend(const std::string& s) {
  if (s == "ipm" || s == "interior-point") return SolverBackend::InteriorPoint;
  if (s == "admm") return SolverBackend::Admm;
  throw std::invalid_argument("unknown solver backend '" + s + "'");
}

struct PlannerConfig {
  // Relative cost improvement below which the outer loop stops.
  double eps = 1e-4;
  int max_outer_iterations = 50;
  bool warm_start = true;
  // Retry an infeasible solve once with L1-penalized collision slacks, for
  // guesses that start in collision. The iterate is marked slack_used.
  bool slack_recovery = true;
  InitializerOptions initializer;
  GrowthOptions growth;
  SolverBackend backend = SolverBackend::InteriorPoint;
  Tolerances solver{1e-9, 1e-7, 1e-7, 50000};
  AdmmSettings admm;
  InteriorPointSettings ipm;

  void validate() const {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (max_outer_iterations < 1) throw std::invalid_argument("max_outer_iterations must be >= 1");
  }
};

inline std::unique_ptr<ConicSolver> make_solver(const PlannerConfig& cfg) {
  if (cfg.backend == SolverBackend::Admm) return std::make_unique<AdmmSolver>(cfg.admm);
  return std::make_unique<InteriorPointSolver>(cfg.ipm);
}

// Everything one planning session needs.
struct PlanningProblem {
  Scene scene;
  DiscreteModel model;
  PathConstraintSet H_D;  // tightened
  OcpConfig ocp;
  PlannerConfig planner;

  double rho() const { return action_radius(model.bounds, model.dt); }
};

// Tightens the workspace box (and optional extra rows) for the given norm.
inline PlanningProblem make_problem(Scene scene, DiscreteModel model, OcpConfig ocp,
                                    PlannerConfig planner = {},
                                    std::optional<PathConstraintSet> H = std::nullopt) {
  PathConstraintSet base = H ? *H : position_box(model, scene.workspace.lo, scene.workspace.hi);
  TighteningOptions topt;
  topt.norm = ocp.norm;
  PlanningProblem p{std::move(scene), std::move(model), {}, std::move(ocp), planner};
  p.H_D = tighten_path_constraints(base, p.model, topt);
  return p;
}

struct IterationResult {
  Trajectory w;
  RegionSequence regions;
  Solution solution;
  double cost = 0.0;
  bool slack_used = false;
  double max_slack = 0.0;
  int escape_steps = 0;
  double wall_time = 0.0;
};

// Regions grown from the knots of w against the swept obstacles of each
// interval [t_k, t_{k+1}].
inline RegionSequence grow_regions(const Trajectory& w, const PlanningProblem& P,
                                   int* escape_steps = nullptr) {
  std::vector<FreeRegion> regs;
  int steps = 0;
  for (int k = 0; k <= w.horizon(); ++k) {
    const double t = w.t0 + k * w.dt;
    const OccupiedSnapshot snap = swept_snapshot(P.scene, t, t + w.dt);
    const Point c = P.model.S_p * w.states[k];
    const RegionGrowth g = grow_free_region_report(c, snap, P.ocp.norm, P.planner.growth);
    steps += g.escape_steps;
    // Growth keeps the ball around c only up to the line-search tolerance.
    // Knots of an optimal plan sit on their tightened boundary, so that
    // slack can leave the knot itself outside the tightened region; the
    // plain ball is kept then if it does better.
    FreeRegion reg = g.region;
    if (g.escape_steps == 0 && g.seed_sd > 0.0) {
      const FreeRegion ball{c, std::min(g.seed_sd, P.planner.growth.sdf.r_max), P.ocp.norm};
      auto margin = [&](const FreeRegion& f) {
        double m = std::numeric_limits<double>::infinity();
        for (const Eigen::Vector2d& l : P.model.vertex_offsets) {
          m = std::min(m, f.radius - norm_eval(c + l - f.center, f.norm));
        }
        return m;
      };
      const double mg = margin(reg);
      if (mg < P.rho() && margin(ball) > mg) reg = ball;
    }
    regs.push_back(reg);
  }
  if (escape_steps) *escape_steps = steps;
  return RegionSequence::from_regions(std::move(regs), P.rho());
}

namespace detail {

// Primal warm start: w plus exact epigraph values; slacks from the rows.
inline Candidate primal_warm_start(const OcpProblem& prob, const Trajectory& w) {
  Candidate c;
  const ConicProgram& prog = prob.program;
  c.x = Eigen::VectorXd::Zero(prog.num_variables());
  c.x.head(prob.layout.size()) = stack_trajectory(w);
  c.s = prog.h - prog.G * c.x;
  c.y_eq = Eigen::VectorXd::Zero(prog.num_equalities());
  c.y_cone = Eigen::VectorXd::Zero(prog.num_cone_rows());
  return c;
}

inline bool same_shape(const Candidate& c, const ConicProgram& prog) {
  return c.x.size() == prog.num_variables() && c.s.size() == prog.num_cone_rows() &&
         c.y_eq.size() == prog.num_equalities() && c.y_cone.size() == prog.num_cone_rows();
}

}  // namespace detail

// One pass: centres from w, regions grown around them, program solved.
inline IterationResult ciao_iteration(const Trajectory& w, const PlanningProblem& P,
                                      OcpVariant variant, const Eigen::VectorXd& x_s,
                                      const Candidate* warm = nullptr) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  w.validate();
  IterationResult out;
  out.regions = grow_regions(w, P, &out.escape_steps);
  OcpConfig cfg = P.ocp;
  cfg.N = w.horizon();

  const std::unique_ptr<ConicSolver> solver = make_solver(P.planner);
  auto attempt = [&](bool slack) -> std::optional<OcpProblem> {
    OcpConfig c = cfg;
    c.collision_slack = slack;
    try {
      return build_problem(P.model, out.regions, x_s, P.H_D, c, variant);
    } catch (const NegativeRadius&) {
      if (slack || !P.planner.slack_recovery) throw;
      return std::nullopt;
    }
  };

  std::optional<OcpProblem> prob = attempt(false);
  if (prob) {
    const Candidate* ws = nullptr;
    Candidate primal;
    if (P.planner.warm_start) {
      if (warm && detail::same_shape(*warm, prob->program)) {
        ws = warm;
      } else {
        primal = detail::primal_warm_start(*prob, w);
        ws = &primal;
      }
    }
    out.solution = solver->solve(prob->program, P.planner.solver, ws);
  }
  if (!prob || out.solution.status == SolveStatus::Infeasible) {
    if (!P.planner.slack_recovery) {
      throw SolverFailure("conic solve failed: " + to_string(out.solution.status));
    }
    prob = attempt(true);
    out.solution = solver->solve(prob->program, P.planner.solver, nullptr);
    out.slack_used = true;
    for (int idx : prob->slack) out.max_slack = std::max(out.max_slack, out.solution.x[idx]);
  }
  if (out.solution.status != SolveStatus::Optimal) {
    throw SolverFailure("conic solve failed: " + to_string(out.solution.status));
  }
  // Relative residuals can hide an iterate that ran off to infinity.
  const ConicProgram& prog = prob->program;
  const Eigen::VectorXd& z = out.solution.x;
  const double defect = std::max(
      detail::inf_norm(prog.A_eq * z - prog.b_eq),
      cone_distance(prog.h - prog.G * z, prog.cones));
  const double scale = std::max({1.0, detail::inf_norm(prog.b_eq), detail::inf_norm(prog.h)});
  if (!(defect <= 1e-4 * scale)) {
    throw SolverFailure("conic solver reported optimal with constraint violation " +
                        std::to_string(defect));
  }
  out.w = extract_trajectory(*prob, out.solution.x, w.dt, w.t0);
  out.cost = trajectory_cost(out.w, cfg, variant);
  out.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

struct TrajoptResult {
  Trajectory w;
  RegionSequence regions;
  std::vector<double> costs;
  std::vector<bool> feasible;
  std::vector<bool> slack_used;
  int iterations = 0;
  // 1-based index of the first feasible iterate, -1 if none.
  int iterations_to_feasible = -1;
  bool converged = false;
  int solver_iterations = 0;
  double wall_time = 0.0;
};

inline FeasibilityOptions trajopt_feasibility_options(const PlanningProblem& P,
                                                      const Eigen::VectorXd& x_s) {
  FeasibilityOptions f;
  f.variant = OcpVariant::Trajopt;
  f.start = x_s;
  f.goal = P.ocp.goal;
  return f;
}

// Outer loop: repeat the iteration until the relative cost change is at
// most eps. The returned trajectory is the last iterate.
inline TrajoptResult trajopt(const Trajectory& w0, const PlanningProblem& P,
                             const Eigen::VectorXd& x_s) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  TrajoptResult res;
  Trajectory w = w0;
  Candidate warm;
  bool have_warm = false;
  const FeasibilityOptions fopt = trajopt_feasibility_options(P, x_s);
  for (int it = 1; it <= P.planner.max_outer_iterations; ++it) {
    IterationResult r = ciao_iteration(w, P, OcpVariant::Trajopt, x_s, have_warm ? &warm : nullptr);
    const bool ok =
        !r.slack_used &&
        check_feasibility(r.w, P.model, r.regions, P.H_D, P.scene, fopt).feasible();
    res.costs.push_back(r.cost);
    res.feasible.push_back(ok);
    res.slack_used.push_back(r.slack_used);
    res.iterations = it;
    res.solver_iterations += r.solution.iterations;
    if (ok && res.iterations_to_feasible < 0) res.iterations_to_feasible = it;
    w = r.w;
    res.w = r.w;
    res.regions = r.regions;
    if (!r.slack_used) {
      warm = r.solution;
      have_warm = true;
    } else {
      have_warm = false;
    }
    if (it >= 2 && ok && res.feasible[it - 2]) {
      const double prev = res.costs[it - 2];
      if (std::abs(prev - r.cost) <= P.planner.eps * std::max(1.0, std::abs(prev))) {
        res.converged = true;
        break;
      }
    }
  }
  res.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return res;
}

// Receding-horizon shift: drop (x_0, u_0), append u_N = 0 and A_D x_N.
inline Trajectory shift_trajectory(const Trajectory& w, const DiscreteModel& model) {
  Trajectory out;
  out.dt = w.dt;
  out.t0 = w.t0 + w.dt;
  out.states.assign(w.states.begin() + 1, w.states.end());
  out.controls.assign(w.controls.begin() + 1, w.controls.end());
  out.controls.push_back(Eigen::VectorXd::Zero(model.nu()));
  out.states.push_back(model.A_D * w.states.back());
  return out;
}

struct MpcStep {
  Eigen::VectorXd u;
  Eigen::VectorXd state;  // after applying u
  double wall_time = 0.0;
  int solver_iterations = 0;
  bool slack_used = false;
  RegionSequence regions;
  Trajectory plan;
};

struct MpcTrace {
  Eigen::VectorXd start;
  std::vector<MpcStep> steps;
  bool reached_goal = false;
  bool budget_exhausted = false;
  std::string failure;  // non-empty when a solve aborted the run
  int infeasible_solves = 0;
  int slack_activations = 0;
  bool guess_fallback = false;

  std::vector<Eigen::VectorXd> states() const {
    std::vector<Eigen::VectorXd> xs{start};
    for (const MpcStep& s : steps) xs.push_back(s.state);
    return xs;
  }
};

inline bool at_goal(const Eigen::VectorXd& x, const Eigen::VectorXd& goal, double tol = 1e-3) {
  return (x - goal).lpNorm<Eigen::Infinity>() <= tol;
}

// Closed loop against the exact discrete model. Each step runs one
// iteration of the receding-horizon program, applies u_0 and shifts.
inline MpcTrace mpc_run(const PlanningProblem& P, const Eigen::VectorXd& x_start,
                        int step_budget, std::optional<Trajectory> guess = std::nullopt) {
  MpcTrace trace;
  trace.start = x_start;
  const Eigen::VectorXd& goal = P.ocp.goal;
  if (at_goal(x_start, goal)) {
    trace.reached_goal = true;
    return trace;
  }
  const int N = P.ocp.N;
  Trajectory w;
  if (guess) {
    w = *guess;
  } else {
    w = initial_guess(P.scene, P.model, x_start, goal, P.ocp.norm, OcpVariant::Mpc, N,
                      P.planner.initializer, 0.0);
    // A guess outside its own regions would start the loop infeasible;
    // standing still is feasible whenever the start is clear.
    FeasibilityOptions fopt;
    fopt.variant = OcpVariant::Mpc;
    fopt.start = x_start;
    const RegionSequence own = intrinsic_regions(w, P.model, P.scene, P.ocp.norm);
    if (!check_feasibility(w, P.model, own, P.H_D, P.scene, fopt).feasible()) {
      w = stationary_trajectory(P.model, x_start, N, 0.0);
      trace.guess_fallback = true;
    }
  }
  Eigen::VectorXd x = x_start;
  Candidate warm;
  bool have_warm = false;
  for (int step = 0; step < step_budget; ++step) {
    IterationResult r;
    try {
      r = ciao_iteration(w, P, OcpVariant::Mpc, x, have_warm ? &warm : nullptr);
    } catch (const Error& e) {
      trace.failure = e.what();
      ++trace.infeasible_solves;
      return trace;
    }
    if (r.slack_used) {
      ++trace.slack_activations;
      ++trace.infeasible_solves;
    }
    MpcStep s;
    s.u = r.w.controls.front();
    x = P.model.A_D * x + P.model.B_D * s.u;
    s.state = x;
    s.wall_time = r.wall_time;
    s.solver_iterations = r.solution.iterations;
    s.slack_used = r.slack_used;
    s.regions = r.regions;
    s.plan = r.w;
    trace.steps.push_back(std::move(s));
    if (at_goal(x, goal)) {
      trace.reached_goal = true;
      return trace;
    }
    w = shift_trajectory(r.w, P.model);
    w.states.front() = x;
    warm = r.solution;
    have_warm = !r.slack_used;
  }
  trace.budget_exhausted = true;
  return trace;
}

}  // namespace ciao

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
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ciao/conic.hpp"
#include "ciao/dynamics.hpp"
#include "ciao/errors.hpp"
#include "ciao/geometry.hpp"

namespace ciao {

// States x_0..x_N and controls u_0..u_{N-1} on a grid starting at t0.
struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> controls;
  double dt = 0.0;
  double t0 = 0.0;

  int horizon() const { return static_cast<int>(controls.size()); }

  void validate() const {
    if (states.size() != controls.size() + 1) {
      throw std::invalid_argument("trajectory needs one more state than controls");
    }
    if (!(dt > 0.0)) throw std::invalid_argument("trajectory dt must be positive");
  }

  Eigen::Vector2d position(const DiscreteModel& model, int k) const {
    return model.S_p * states.at(k);
  }
};

enum class OcpVariant { Trajopt, Mpc };

struct OcpConfig {
  int N = 50;
  double alpha = 1.05;
  // Terminal weight of the receding-horizon cost; NaN selects 10 alpha^N.
  double alpha_N = std::numeric_limits<double>::quiet_NaN();
  Norm cost_norm = Norm::L1;
  Norm norm = Norm::L2;
  Eigen::VectorXd goal;
  // Components of x entering ||x_k - x_g||; empty means all of them.
  std::vector<int> cost_components;
  bool collision_slack = false;
  double slack_weight = 1e4;

  double terminal_weight() const {
    return std::isnan(alpha_N) ? 10.0 * std::pow(alpha, N) : alpha_N;
  }

  void validate(const DiscreteModel& model, OcpVariant variant) const {
    if (N < 1) throw std::invalid_argument("horizon must be at least 1");
    if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
    if (goal.size() != model.nx()) throw std::invalid_argument("goal has wrong dimension");
    if ((model.A * goal).lpNorm<Eigen::Infinity>() > 1e-12) {
      throw std::invalid_argument("goal must be a steady state (A x_g = 0)");
    }
    if (variant == OcpVariant::Mpc && !(terminal_weight() > std::pow(alpha, N))) {
      throw std::invalid_argument("terminal weight must exceed alpha^N");
    }
    for (int c : cost_components) {
      if (c < 0 || c >= model.nx()) throw std::invalid_argument("bad cost component");
    }
  }
};

// Position and velocity components: the quantities that matter for a
// time-optimal arrival.
inline std::vector<int> position_velocity_components(const DiscreteModel& model) {
  std::vector<int> out;
  for (int i = 0; i < model.nx(); ++i) {
    if (model.derivative_order[i] <= 1) out.push_back(i);
  }
  return out;
}

// One region per knot with the collision radius r_k = radius - rho.
struct RegionSequence {
  std::vector<FreeRegion> regions;
  std::vector<double> radii;

  int size() const { return static_cast<int>(regions.size()); }

  static RegionSequence from_regions(std::vector<FreeRegion> regions, double rho) {
    RegionSequence seq;
    for (const FreeRegion& r : regions) seq.radii.push_back(r.radius - rho);
    seq.regions = std::move(regions);
    return seq;
  }
};

// Index map of w = (x_0, u_0, x_1, ..., u_{N-1}, x_N).
struct WLayout {
  int nx;
  int nu;
  int N;

  int x(int k) const { return k * (nx + nu); }
  int u(int k) const { return k * (nx + nu) + nx; }
  int size() const { return N * (nx + nu) + nx; }
};

struct OcpProblem {
  ConicProgram program;
  WLayout layout;
  OcpVariant variant;
  // Collision slack per knot (empty unless slacks are enabled).
  std::vector<int> slack;
  int num_collision_rows = 0;
};

namespace detail {

inline std::vector<int> cost_components_or_all(const OcpConfig& cfg, int nx) {
  if (!cfg.cost_components.empty()) return cfg.cost_components;
  std::vector<int> all(nx);
  for (int i = 0; i < nx; ++i) all[i] = i;
  return all;
}

// weight * ||x_k[comps] - goal[comps]|| through epigraph variables.
inline void add_stage_cost(ProgramBuilder& pb, int x_index, const std::vector<int>& comps,
                           const Eigen::VectorXd& goal, double weight, Norm norm) {
  std::vector<AffineExpr> diff;
  for (int c : comps) diff.push_back(AffineExpr::var(x_index + c).add(AffineExpr(-goal[c])));
  switch (norm) {
    case Norm::L1: {
      const int t = pb.add_variables(static_cast<int>(comps.size()));
      for (std::size_t j = 0; j < comps.size(); ++j) {
        pb.add_cost(t + j, weight);
        pb.add_nonneg(AffineExpr::var(t + j).add(diff[j], -1.0));
        pb.add_nonneg(AffineExpr::var(t + j).add(diff[j], 1.0));
      }
      break;
    }
    case Norm::Linf: {
      const int t = pb.add_variables(1);
      pb.add_cost(t, weight);
      pb.add_norm_le(diff, AffineExpr::var(t), Norm::Linf);
      break;
    }
    case Norm::L2: {
      const int t = pb.add_variables(1);
      pb.add_cost(t, weight);
      pb.add_norm_le(diff, AffineExpr::var(t), Norm::L2);
      break;
    }
  }
}

inline OcpProblem build_program(const DiscreteModel& model, const RegionSequence& regions,
                                const Eigen::VectorXd& x_s, const PathConstraintSet& H_D,
                                const OcpConfig& cfg, OcpVariant variant) {
  model.validate();
  cfg.validate(model, variant);
  const int nx = model.nx();
  const int nu = model.nu();
  const int N = cfg.N;
  if (regions.size() != N + 1 || static_cast<int>(regions.radii.size()) != N + 1) {
    throw std::invalid_argument("need one region per knot");
  }
  if (x_s.size() != nx) throw std::invalid_argument("start has wrong dimension");

  std::vector<double> radii = regions.radii;
  for (int k = 0; k <= N; ++k) {
    if (radii[k] < 0.0 && !cfg.collision_slack) {
      if (radii[k] >= -1e-6) {
        radii[k] = 0.0;
      } else {
        throw NegativeRadius("free region at knot " + std::to_string(k) +
                                 " is smaller than the action radius",
                             k, radii[k]);
      }
    }
  }

  OcpProblem out;
  out.layout = WLayout{nx, nu, N};
  out.variant = variant;
  const WLayout& L = out.layout;
  ProgramBuilder pb(L.size());

  for (int i = 0; i < nx; ++i) {
    pb.add_equality(AffineExpr::var(L.x(0) + i).add(AffineExpr(-x_s[i])));
  }
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < nx; ++i) {
      AffineExpr e = AffineExpr::var(L.x(k + 1) + i);
      for (int j = 0; j < nx; ++j) e.add(L.x(k) + j, -model.A_D(i, j));
      for (int j = 0; j < nu; ++j) e.add(L.u(k) + j, -model.B_D(i, j));
      pb.add_equality(e);
    }
  }
  if (variant == OcpVariant::Trajopt) {
    for (int i = 0; i < nx; ++i) {
      pb.add_equality(AffineExpr::var(L.x(N) + i).add(AffineExpr(-cfg.goal[i])));
    }
  } else {
    for (int i = 0; i < nx; ++i) {
      if (model.A.row(i).isZero()) continue;
      AffineExpr e;
      for (int j = 0; j < nx; ++j) e.add(L.x(N) + j, model.A(i, j));
      pb.add_equality(e);
    }
  }

  // Path constraints at every knot; u_N = 0. x_0 is pinned to the measured
  // state, so at k = 0 only rows on the input apply: a state sitting on a
  // bound up to rounding would otherwise make the program infeasible.
  auto z_index = [&](int k, int c) { return c < nx ? L.x(k) + c : (k < N ? L.u(k) + c - nx : -1); };
  auto touches_state = [&](int k, auto&& comps) {
    if (k > 0) return false;
    for (int c : comps) {
      if (c < nx) return true;
    }
    return false;
  };
  for (int k = 0; k <= N; ++k) {
    for (int r = 0; r < H_D.num_rows(); ++r) {
      std::vector<int> used;
      for (int c = 0; c < nx + nu; ++c) {
        if (H_D.G(r, c) != 0.0) used.push_back(c);
      }
      if (touches_state(k, used)) continue;
      AffineExpr e(H_D.h[r]);
      bool any = false;
      for (int c = 0; c < nx + nu; ++c) {
        const double g = H_D.G(r, c);
        if (g == 0.0) continue;
        const int idx = z_index(k, c);
        if (idx < 0) continue;
        e.add(idx, -g);
        any = true;
      }
      if (any) pb.add_nonneg(e);
    }
    for (const NormBound& nb : H_D.norm_bounds) {
      if (touches_state(k, nb.components)) continue;
      std::vector<AffineExpr> v;
      bool any = false;
      for (int c : nb.components) {
        const int idx = z_index(k, c);
        v.push_back(idx < 0 ? AffineExpr(0.0) : AffineExpr::var(idx));
        any = any || idx >= 0;
      }
      if (any) pb.add_norm_le(v, AffineExpr(nb.bound), nb.norm);
    }
  }

  // Collision rows: every vertex of the robot stays in the knot's region.
  if (cfg.collision_slack) {
    const int s = pb.add_variables(N + 1);
    for (int k = 0; k <= N; ++k) {
      out.slack.push_back(s + k);
      pb.add_cost(s + k, cfg.slack_weight);
      pb.add_nonneg(AffineExpr::var(s + k));
    }
  }
  const int rows_before = pb.num_nonneg_rows() + pb.num_soc_rows();
  for (int k = 0; k <= N; ++k) {
    const FreeRegion& reg = regions.regions[k];
    AffineExpr bound(radii[k]);
    if (cfg.collision_slack) bound.add(out.slack[k], 1.0);
    for (const Eigen::Vector2d& l : model.vertex_offsets) {
      std::vector<AffineExpr> v;
      for (int d = 0; d < 2; ++d) {
        AffineExpr e(l[d] - reg.center[d]);
        for (int j = 0; j < nx; ++j) {
          if (model.S_p(d, j) != 0.0) e.add(L.x(k) + j, model.S_p(d, j));
        }
        v.push_back(e);
      }
      pb.add_norm_le(v, bound, cfg.norm);
    }
  }
  out.num_collision_rows = pb.num_nonneg_rows() + pb.num_soc_rows() - rows_before;

  const std::vector<int> comps = cost_components_or_all(cfg, nx);
  double weight = 1.0;
  for (int k = 0; k < N; ++k) {
    add_stage_cost(pb, L.x(k), comps, cfg.goal, weight, cfg.cost_norm);
    weight *= cfg.alpha;
  }
  if (variant == OcpVariant::Mpc) {
    add_stage_cost(pb, L.x(N), comps, cfg.goal, cfg.terminal_weight(), cfg.cost_norm);
  }
  out.program = pb.build();
  return out;
}

}  // namespace detail

// Fixed-horizon problem with terminal equality x_N = x_g.
inline OcpProblem build_ciao_nlp(const DiscreteModel& model, const RegionSequence& regions,
                                 const Eigen::VectorXd& x_s, const PathConstraintSet& H_D,
                                 const OcpConfig& cfg) {
  return detail::build_program(model, regions, x_s, H_D, cfg, OcpVariant::Trajopt);
}

// Receding-horizon problem: terminal cost plus the steady-state condition
// A x_N = 0 in place of the terminal equality.
inline OcpProblem build_ciao_mpc_nlp(const DiscreteModel& model, const RegionSequence& regions,
                                     const Eigen::VectorXd& x_s, const PathConstraintSet& H_D,
                                     const OcpConfig& cfg) {
  return detail::build_program(model, regions, x_s, H_D, cfg, OcpVariant::Mpc);
}

inline OcpProblem build_problem(const DiscreteModel& model, const RegionSequence& regions,
                                const Eigen::VectorXd& x_s, const PathConstraintSet& H_D,
                                const OcpConfig& cfg, OcpVariant variant) {
  return detail::build_program(model, regions, x_s, H_D, cfg, variant);
}

inline Trajectory extract_trajectory(const OcpProblem& problem, const Eigen::VectorXd& x,
                                     double dt, double t0) {
  const WLayout& L = problem.layout;
  Trajectory w;
  w.dt = dt;
  w.t0 = t0;
  for (int k = 0; k <= L.N; ++k) {
    w.states.push_back(x.segment(L.x(k), L.nx));
    if (k < L.N) w.controls.push_back(x.segment(L.u(k), L.nu));
  }
  return w;
}

// Primal vector of the problem's w block from a trajectory (auxiliaries 0).
inline Eigen::VectorXd stack_trajectory(const Trajectory& w) {
  const int nx = static_cast<int>(w.states.front().size());
  const int nu = w.controls.empty() ? 0 : static_cast<int>(w.controls.front().size());
  const WLayout L{nx, nu, w.horizon()};
  Eigen::VectorXd out(L.size());
  for (int k = 0; k <= L.N; ++k) {
    out.segment(L.x(k), nx) = w.states[k];
    if (k < L.N) out.segment(L.u(k), nu) = w.controls[k];
  }
  return out;
}

// Objective of the built programs evaluated on w.
inline double trajectory_cost(const Trajectory& w, const OcpConfig& cfg,
                              OcpVariant variant = OcpVariant::Trajopt) {
  const int nx = static_cast<int>(w.states.front().size());
  const std::vector<int> comps = detail::cost_components_or_all(cfg, nx);
  auto stage = [&](int k) {
    Eigen::VectorXd d(comps.size());
    for (std::size_t j = 0; j < comps.size(); ++j) d[j] = w.states[k][comps[j]] - cfg.goal[comps[j]];
    return norm_eval(d, cfg.cost_norm);
  };
  double total = 0.0;
  double weight = 1.0;
  const int N = w.horizon();
  for (int k = 0; k < N; ++k) {
    total += weight * stage(k);
    weight *= cfg.alpha;
  }
  if (variant == OcpVariant::Mpc) {
    OcpConfig c = cfg;
    c.N = N;
    total += c.terminal_weight() * stage(N);
  }
  return total;
}

// Positions of every robot vertex at `substeps` points per interval,
// propagated with exact sub-interval discretizations.
struct FineSample {
  int interval;
  double t;
  Eigen::Vector2d position;  // reference point, without vertex offsets
};

inline std::vector<FineSample> fine_samples(const Trajectory& w, const DiscreteModel& model,
                                            int substeps) {
  std::vector<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> sub;
  sub.reserve(substeps);
  const LinearModel lm{model.A, model.B};
  for (int s = 1; s <= substeps; ++s) sub.push_back(discretize(lm, w.dt * s / substeps));
  std::vector<FineSample> out;
  out.reserve(static_cast<std::size_t>(w.horizon()) * substeps + 1);
  for (int k = 0; k < w.horizon(); ++k) {
    const double tk = w.t0 + k * w.dt;
    out.push_back({k, tk, model.S_p * w.states[k]});
    for (int s = 1; s < substeps; ++s) {
      const auto& [As, Bs] = sub[s - 1];
      const Eigen::VectorXd x = As * w.states[k] + Bs * w.controls[k];
      out.push_back({k, tk + w.dt * s / substeps, model.S_p * x});
    }
  }
  out.push_back({w.horizon(), w.t0 + w.horizon() * w.dt, model.S_p * w.states.back()});
  return out;
}

enum class ViolationKind { Dynamics, PathConstraint, Region, Boundary, Collision };

inline std::string to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::Dynamics:
      return "dynamics";
    case ViolationKind::PathConstraint:
      return "path_constraint";
    case ViolationKind::Region:
      return "region";
    case ViolationKind::Boundary:
      return "boundary";
    case ViolationKind::Collision:
      return "collision";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  int knot;
  double amount;
};

struct FeasibilityReport {
  std::vector<Violation> violations;
  double min_clearance = std::numeric_limits<double>::infinity();

  bool feasible() const { return violations.empty(); }
  bool has(ViolationKind kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.kind == kind; });
  }
};

struct FeasibilityOptions {
  double tol = 1e-6;
  int substeps = 100;
  OcpVariant variant = OcpVariant::Trajopt;
  bool continuous = true;
  Eigen::VectorXd start;  // empty: not checked
  Eigen::VectorXd goal;   // trajopt terminal state; empty: not checked
};

// Checks every constraint family of the programs on w, plus continuous-time
// collision freedom of all robot vertices against the swept obstacles.
inline FeasibilityReport check_feasibility(const Trajectory& w, const DiscreteModel& model,
                                           const RegionSequence& regions,
                                           const PathConstraintSet& H_D, const Scene& scene,
                                           const FeasibilityOptions& opt = {}) {
  w.validate();
  FeasibilityReport rep;
  const int N = w.horizon();
  const int nx = model.nx();
  const int nu = model.nu();
  auto flag = [&](ViolationKind kind, int k, double amount) {
    if (amount > opt.tol) rep.violations.push_back({kind, k, amount});
  };

  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd defect =
        w.states[k + 1] - model.A_D * w.states[k] - model.B_D * w.controls[k];
    flag(ViolationKind::Dynamics, k, defect.lpNorm<Eigen::Infinity>());
  }
  for (int k = 0; k <= N; ++k) {
    Eigen::VectorXd z(nx + nu);
    z << w.states[k], (k < N ? w.controls[k] : Eigen::VectorXd::Zero(nu));
    flag(ViolationKind::PathConstraint, k, H_D.violation(z));
  }
  if (regions.size() == N + 1) {
    for (int k = 0; k <= N; ++k) {
      const FreeRegion& reg = regions.regions[k];
      for (const Eigen::Vector2d& l : model.vertex_offsets) {
        const Eigen::Vector2d v = model.S_p * w.states[k] + l;
        flag(ViolationKind::Region, k, norm_eval(v - reg.center, reg.norm) - regions.radii[k]);
      }
    }
  } else if (regions.size() != 0) {
    throw std::invalid_argument("need one region per knot");
  }
  if (opt.start.size() > 0) {
    flag(ViolationKind::Boundary, 0, (w.states.front() - opt.start).lpNorm<Eigen::Infinity>());
  }
  if (opt.variant == OcpVariant::Trajopt && opt.goal.size() > 0) {
    flag(ViolationKind::Boundary, N, (w.states.back() - opt.goal).lpNorm<Eigen::Infinity>());
  }
  if (opt.variant == OcpVariant::Mpc) {
    flag(ViolationKind::Boundary, N, (model.A * w.states.back()).lpNorm<Eigen::Infinity>());
  }

  if (opt.continuous && N > 0) {
    std::vector<OccupiedSnapshot> snaps;
    for (int k = 0; k <= N; ++k) {
      const double t = w.t0 + k * w.dt;
      snaps.push_back(swept_snapshot(scene, t, t + w.dt));
    }
    std::vector<double> worst(N + 1, std::numeric_limits<double>::infinity());
    for (const FineSample& s : fine_samples(w, model, opt.substeps)) {
      for (const Eigen::Vector2d& l : model.vertex_offsets) {
        const double sd = scene_signed_distance(s.position + l, snaps[s.interval], Norm::L2);
        worst[s.interval] = std::min(worst[s.interval], sd);
      }
    }
    for (int k = 0; k <= N; ++k) {
      rep.min_clearance = std::min(rep.min_clearance, worst[k]);
      flag(ViolationKind::Collision, k, -worst[k]);
    }
  }
  return rep;
}

// Regions centred on the trajectory's own knots, the natural constraint set
// for judging an initial guess.
inline RegionSequence intrinsic_regions(const Trajectory& w, const DiscreteModel& model,
                                        const Scene& scene, Norm norm) {
  const double rho = action_radius(model.bounds, w.dt);
  std::vector<FreeRegion> regs;
  for (int k = 0; k <= w.horizon(); ++k) {
    const double t = w.t0 + k * w.dt;
    const OccupiedSnapshot snap = swept_snapshot(scene, t, t + w.dt);
    const Eigen::Vector2d c = model.S_p * w.states[k];
    regs.push_back(FreeRegion{c, scene_signed_distance(c, snap, norm), norm});
  }
  return RegionSequence::from_regions(std::move(regs), rho);
}

}  // namespace ciao

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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ciao/interior_point.hpp"
#include "ciao/ocp.hpp"
#include "ciao/initializer.hpp"

namespace ciao {
namespace {

const Tolerances kTight{1e-9, 1e-8, 1e-8, 100};

struct Fixture {
  DiscreteModel model = puck_model(0.2);
  PathConstraintSet H;
  Scene scene;

  explicit Fixture(Norm norm = Norm::L2,
                   std::vector<Eigen::Vector2d> vertices = {Eigen::Vector2d::Zero()}) {
    model.vertex_offsets = std::move(vertices);
    TighteningOptions t;
    t.norm = norm;
    H = tighten_path_constraints(position_box(model, scene.workspace.lo, scene.workspace.hi),
                                 model, t);
  }

  double rho() const { return action_radius(model.bounds, model.dt); }

  // One wide region per knot, all centred at c.
  RegionSequence wide(int N, const Point& c, Norm norm, double radius = 50.0) const {
    return RegionSequence::from_regions(std::vector<FreeRegion>(N + 1, {c, radius, norm}), rho());
  }

  OcpConfig config(int N, const Point& goal, Norm norm = Norm::L2) const {
    OcpConfig cfg;
    cfg.N = N;
    cfg.norm = norm;
    cfg.goal = rest_state(model, goal);
    return cfg;
  }
};

Solution solve_ipm(const ConicProgram& prog) {
  return InteriorPointSolver().solve(prog, kTight, nullptr);
}

TEST(OcpTest, HorizonFiftyHas406DecisionVariables) {
  Fixture f;
  const OcpConfig cfg = f.config(50, Point(10, 10));
  const OcpProblem p = build_ciao_mpc_nlp(f.model, f.wide(50, Point(10, 10), Norm::L2),
                                          rest_state(f.model, Point(5, 5)), f.H, cfg);
  EXPECT_EQ(p.layout.size(), 406);
  EXPECT_GT(p.program.num_variables(), 406);  // plus epigraph auxiliaries
}

TEST(OcpTest, PolytopicNormsGiveLinearPrograms) {
  const std::vector<Eigen::Vector2d> square = {{-0.1, -0.1}, {0.1, -0.1}, {0.1, 0.1}, {-0.1, 0.1}};
  for (Norm star : {Norm::L1, Norm::L2, Norm::Linf}) {
    for (Norm qx : {Norm::L1, Norm::L2, Norm::Linf}) {
      Fixture f(star, square);
      OcpConfig cfg = f.config(4, Point(8, 8), star);
      cfg.cost_norm = qx;
      for (OcpVariant v : {OcpVariant::Trajopt, OcpVariant::Mpc}) {
        const OcpProblem p = build_problem(f.model, f.wide(4, Point(6, 6), star),
                                           rest_state(f.model, Point(5, 5)), f.H, cfg, v);
        const bool lp = star != Norm::L2 && qx != Norm::L2;
        EXPECT_EQ(p.program.is_linear(), lp) << to_string(star) << " " << to_string(qx);
      }
    }
  }
}

TEST(OcpTest, CollisionRowsPerRegionAndVertex) {
  struct Case {
    Norm norm;
    int rows;
  };
  for (const Case& c : {Case{Norm::Linf, 4}, Case{Norm::L1, 4}, Case{Norm::L2, 3}}) {
    for (int vertices : {1, 3}) {
      for (int N : {1, 5, 12}) {
        Fixture f(c.norm, std::vector<Eigen::Vector2d>(vertices, Eigen::Vector2d::Zero()));
        const OcpProblem p =
            build_ciao_nlp(f.model, f.wide(N, Point(6, 6), c.norm),
                           rest_state(f.model, Point(5, 5)), f.H, f.config(N, Point(7, 7), c.norm));
        EXPECT_EQ(p.num_collision_rows, c.rows * vertices * (N + 1));
      }
    }
  }
}

// Closed-form row counts for the L1 cost: equalities for x_0, dynamics and the
// terminal condition; path rows at every knot except state rows at k = 0;
// two epigraph rows per cost component and stage.
TEST(OcpTest, ConstraintCountFormula) {
  for (Norm star : {Norm::L1, Norm::L2, Norm::Linf}) {
    Fixture f(star);
    int path_rows = f.H.num_rows();
    int state_rows = 0;
    for (int r = 0; r < f.H.num_rows(); ++r) {
      if (f.H.G.row(r).head(f.model.nx()).cwiseAbs().sum() > 0) ++state_rows;
    }
    int norm_rows = 0;
    int norm_state_rows = 0;
    int norm_input_rows = 0;
    for (const NormBound& nb : f.H.norm_bounds) {
      const int rows = star == Norm::L2 ? static_cast<int>(nb.components.size()) + 1
                       : star == Norm::Linf ? 2 * static_cast<int>(nb.components.size())
                                            : 1 << nb.components.size();
      norm_rows += rows;
      if (nb.components.front() < f.model.nx()) {
        norm_state_rows += rows;
      } else {
        norm_input_rows += rows;
      }
    }
    const int per_knot = path_rows + norm_rows;
    const int region = star == Norm::L2 ? 3 : 4;
    const int nx = f.model.nx();
    for (int N : {2, 6, 20}) {
      const Point c(6, 6);
      const Eigen::VectorXd xs = rest_state(f.model, Point(5, 5));
      const OcpConfig cfg = f.config(N, Point(7, 7), star);
      const OcpProblem t = build_ciao_nlp(f.model, f.wide(N, c, star), xs, f.H, cfg);
      const OcpProblem m = build_ciao_mpc_nlp(f.model, f.wide(N, c, star), xs, f.H, cfg);
      EXPECT_EQ(t.program.num_equalities(), nx * (N + 2));
      EXPECT_EQ(m.program.num_equalities(), nx * (N + 1) + 4);
      // u_N = 0 is a constant, so input-only rows vanish at k = N.
      const int path = (N + 1) * per_knot - state_rows - norm_state_rows - norm_input_rows;
      const int expected_t = path + region * (N + 1) + 2 * nx * N;
      EXPECT_EQ(t.program.num_cone_rows(), expected_t) << to_string(star) << " N=" << N;
      EXPECT_EQ(m.program.num_cone_rows(), expected_t + 2 * nx) << to_string(star);
      EXPECT_EQ(t.program.num_variables(), t.layout.size() + nx * N);
      EXPECT_EQ(m.program.num_variables(), m.layout.size() + nx * (N + 1));
    }
  }
}

TEST(OcpTest, MpcSteadyStateRowsPinTerminalVelocityAndAcceleration) {
  Fixture f;
  const int N = 3;
  const OcpProblem p = build_ciao_mpc_nlp(f.model, f.wide(N, Point(6, 6), Norm::L2),
                                          rest_state(f.model, Point(5, 5)), f.H,
                                          f.config(N, Point(7, 7)));
  const Eigen::MatrixXd A_eq(p.program.A_eq);
  const int first = f.model.nx() * (N + 1);
  std::vector<int> pinned;
  for (int r = first; r < A_eq.rows(); ++r) {
    ASSERT_EQ((A_eq.row(r).array() != 0.0).count(), 1);
    int col;
    A_eq.row(r).cwiseAbs().maxCoeff(&col);
    pinned.push_back(col - p.layout.x(N));
    EXPECT_EQ(p.program.b_eq[r], 0.0);
  }
  EXPECT_EQ(pinned, (std::vector<int>{2, 3, 4, 5}));
}

TEST(OcpTest, AlreadyAtGoalCostsNothing) {
  for (OcpVariant v : {OcpVariant::Trajopt, OcpVariant::Mpc}) {
    Fixture f;
    const Point g(10, 10);
    const OcpProblem p =
        build_problem(f.model, f.wide(1, g, Norm::L2), rest_state(f.model, g), f.H,
                      f.config(1, g), v);
    const Solution s = solve_ipm(p.program);
    ASSERT_EQ(s.status, SolveStatus::Optimal);
    EXPECT_NEAR(s.objective, 0.0, 1e-7);
    const Trajectory w = extract_trajectory(p, s.x, f.model.dt, 0.0);
    EXPECT_LT(w.controls[0].lpNorm<Eigen::Infinity>(), 1e-6);
  }
}

TEST(OcpTest, FarGoalMpcStopsShort) {
  Fixture f;
  const int N = 10;
  const Point start(2, 2);
  const Point goal(18, 2);
  const OcpConfig cfg = f.config(N, goal);
  const Eigen::VectorXd xs = rest_state(f.model, start);
  const OcpProblem p = build_ciao_mpc_nlp(f.model, f.wide(N, Point(10, 2), Norm::L2), xs, f.H, cfg);
  const Solution s = solve_ipm(p.program);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  const Trajectory w = extract_trajectory(p, s.x, f.model.dt, 0.0);
  EXPECT_GT((w.position(f.model, N) - goal).norm(), 5.0);
  EXPECT_GT(w.position(f.model, N).x(), start.x() + 0.5);
  EXPECT_LT((f.model.A * w.states.back()).lpNorm<Eigen::Infinity>(), 1e-7);

  // The trajopt variant cannot reach the goal in 2 s.
  const OcpProblem t = build_ciao_nlp(f.model, f.wide(N, Point(10, 2), Norm::L2), xs, f.H, cfg);
  EXPECT_EQ(solve_ipm(t.program).status, SolveStatus::Infeasible);
}

TEST(OcpTest, NegativeRadiusRejected) {
  Fixture f;
  const double rho = f.rho();
  std::vector<FreeRegion> regs(3, {Point(5, 5), 10.0, Norm::L2});
  regs[1].radius = rho - 1e-3;
  const RegionSequence bad = RegionSequence::from_regions(regs, rho);
  const OcpConfig cfg = f.config(2, Point(5, 5));
  try {
    build_ciao_nlp(f.model, bad, rest_state(f.model, Point(5, 5)), f.H, cfg);
    FAIL() << "expected NegativeRadius";
  } catch (const NegativeRadius& e) {
    EXPECT_EQ(e.knot(), 1);
  }
  // Rounding-level deficits are snapped to a point region.
  regs[1].radius = rho - 1e-8;
  EXPECT_NO_THROW(build_ciao_nlp(f.model, RegionSequence::from_regions(regs, rho),
                                 rest_state(f.model, Point(5, 5)), f.H, cfg));
  // Slacks absorb any deficit.
  OcpConfig soft = cfg;
  soft.collision_slack = true;
  EXPECT_NO_THROW(build_ciao_nlp(f.model, bad, rest_state(f.model, Point(5, 5)), f.H, soft));
}

TEST(OcpTest, TrajectoryCostDirectSum) {
  const DiscreteModel model = puck_model(0.2);
  OcpConfig cfg;
  cfg.N = 2;
  cfg.alpha = 2.0;
  cfg.cost_norm = Norm::L1;
  cfg.goal = rest_state(model, Point(3, 4));
  Trajectory w;
  w.dt = 0.2;
  Eigen::VectorXd x0 = cfg.goal;
  x0[0] += 0.25;
  x0[3] -= 0.75;
  Eigen::VectorXd x1 = cfg.goal;
  x1[5] += 1.0;
  w.states = {x0, x1, cfg.goal};
  w.controls.assign(2, Eigen::VectorXd::Zero(2));
  EXPECT_DOUBLE_EQ(trajectory_cost(w, cfg), 3.0);

  Trajectory still = w;
  still.states.assign(3, cfg.goal);
  EXPECT_EQ(trajectory_cost(still, cfg), 0.0);

  // The terminal term weighs x_N with alpha_N.
  Trajectory late = still;
  late.states[2][1] += 0.5;
  EXPECT_DOUBLE_EQ(trajectory_cost(late, cfg, OcpVariant::Mpc), 0.5 * 10.0 * 4.0);

  // A selector restricts the measured components.
  cfg.cost_components = {0, 1};
  EXPECT_DOUBLE_EQ(trajectory_cost(w, cfg), 0.25);
}

TEST(OcpTest, TrajectoryCostMatchesSolverObjective) {
  for (Norm qx : {Norm::L1, Norm::L2, Norm::Linf}) {
    for (OcpVariant v : {OcpVariant::Trajopt, OcpVariant::Mpc}) {
      Fixture f;
      OcpConfig cfg = f.config(25, Point(8, 6));
      cfg.cost_norm = qx;
      const OcpProblem p = build_problem(f.model, f.wide(25, Point(6, 6), Norm::L2),
                                         rest_state(f.model, Point(5, 5)), f.H, cfg, v);
      const Solution s = solve_ipm(p.program);
      ASSERT_EQ(s.status, SolveStatus::Optimal);
      const Trajectory w = extract_trajectory(p, s.x, f.model.dt, 0.0);
      EXPECT_NEAR(trajectory_cost(w, cfg, v), s.objective, 1e-6 * std::max(1.0, s.objective));
    }
  }
}

TEST(OcpTest, SolvedTrajectoryPassesFeasibilityCheck) {
  for (Norm star : {Norm::L1, Norm::L2, Norm::Linf}) {
    Fixture f(star, {{-0.2, 0.0}, {0.2, 0.0}});
    const int N = 30;
    // The region touches the disk; the robot stays in it.
    std::vector<FreeRegion> regs(N + 1, {Point(6, 5.5), 2.5, star});
    Scene scene;
    scene.obstacles.push_back({Disk{Point(6, 9.0), 1.0}, {}});
    const RegionSequence seq = RegionSequence::from_regions(regs, f.rho());
    const Eigen::VectorXd xs = rest_state(f.model, Point(5, 5));
    const OcpConfig cfg = f.config(N, Point(7, 6), star);
    const OcpProblem p = build_ciao_nlp(f.model, seq, xs, f.H, cfg);
    const Solution s = solve_ipm(p.program);
    ASSERT_EQ(s.status, SolveStatus::Optimal);
    const Trajectory w = extract_trajectory(p, s.x, f.model.dt, 0.0);
    FeasibilityOptions opt;
    opt.start = xs;
    opt.goal = cfg.goal;
    const FeasibilityReport rep = check_feasibility(w, f.model, seq, f.H, scene, opt);
    EXPECT_TRUE(rep.feasible()) << to_string(star);
    EXPECT_GT(rep.min_clearance, 0.0);
  }
}

TEST(OcpTest, FeasibilityCheckFlagsConstructedDefects) {
  Fixture f;
  const Eigen::VectorXd x = rest_state(f.model, Point(5, 5));
  const Trajectory still = stationary_trajectory(f.model, x, 4, 0.0);
  const RegionSequence seq = f.wide(4, Point(5, 5), Norm::L2, 1.0);
  Scene empty;
  EXPECT_TRUE(check_feasibility(still, f.model, seq, f.H, empty).feasible());

  Trajectory teleport = still;
  teleport.states[2].head(2) += Eigen::Vector2d(0.3, 0.0);
  const FeasibilityReport a = check_feasibility(teleport, f.model, seq, f.H, empty);
  EXPECT_TRUE(a.has(ViolationKind::Dynamics));

  // Vertex at r_k + 0.1 from the centre, dynamics kept consistent.
  const double r = seq.radii[0];
  const Trajectory shifted =
      stationary_trajectory(f.model, rest_state(f.model, Point(5 + r + 0.1, 5)), 4, 0.0);
  const FeasibilityReport b = check_feasibility(shifted, f.model, seq, f.H, empty);
  EXPECT_TRUE(b.has(ViolationKind::Region));
  EXPECT_FALSE(b.has(ViolationKind::Dynamics));
  for (const Violation& v : b.violations) EXPECT_NEAR(v.amount, 0.1, 1e-9);

  FeasibilityOptions opt;
  opt.goal = rest_state(f.model, Point(6, 5));
  EXPECT_TRUE(check_feasibility(still, f.model, seq, f.H, empty, opt).has(ViolationKind::Boundary));

  Scene blocked;
  blocked.obstacles.push_back({Disk{Point(5, 5), 0.5}, {}});
  EXPECT_TRUE(check_feasibility(still, f.model, {}, f.H, blocked).has(ViolationKind::Collision));
}

}  // namespace
}  // namespace ciao

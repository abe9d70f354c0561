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

#include "ciao/initializer.hpp"
#include "ciao/planner.hpp"
#include "ciao/sim.hpp"

namespace ciao {
namespace {

PlanningProblem problem_for(const Scene& scene, const Point& goal, Norm norm = Norm::L2,
                            int N = 50) {
  const DiscreteModel model = puck_model(0.2);
  OcpConfig ocp;
  ocp.N = N;
  ocp.norm = norm;
  ocp.goal = rest_state(model, goal);
  return make_problem(scene, model, ocp);
}

Scene one_disk() {
  Scene s;
  s.obstacles.push_back({Disk{Point(10, 10), 2.0}, {}});
  return s;
}

double max_abs_diff(const Trajectory& a, const Trajectory& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    d = std::max(d, (a.states[k] - b.states[k]).lpNorm<Eigen::Infinity>());
  }
  for (std::size_t k = 0; k < a.controls.size(); ++k) {
    d = std::max(d, (a.controls[k] - b.controls[k]).lpNorm<Eigen::Infinity>());
  }
  return d;
}

TEST(IterationTest, StationaryAtGoalIsFixedPoint) {
  for (OcpVariant v : {OcpVariant::Trajopt, OcpVariant::Mpc}) {
    const Point g(4, 4);
    const PlanningProblem P = problem_for(Scene{}, g, Norm::L2, 8);
    const Trajectory w = stationary_trajectory(P.model, P.ocp.goal, 8, 0.0);
    const IterationResult r = ciao_iteration(w, P, v, P.ocp.goal);
    EXPECT_FALSE(r.slack_used);
    EXPECT_LT(max_abs_diff(r.w, w), 1e-6);
    EXPECT_NEAR(r.cost, 0.0, 1e-6);
  }
}

TEST(IterationTest, FeasibleGuessAroundDiskDoesNotGetWorse) {
  for (Norm norm : {Norm::L1, Norm::L2, Norm::Linf}) {
    const Scene scene = one_disk();
    const PlanningProblem P = problem_for(scene, Point(16, 15), norm);
    const Eigen::VectorXd xs = rest_state(P.model, Point(4, 5));
    const Trajectory w = initial_guess(scene, P.model, xs, P.ocp.goal, norm,
                                       OcpVariant::Trajopt, 0, P.planner.initializer);
    FeasibilityOptions fopt = trajopt_feasibility_options(P, xs);
    const RegionSequence own = grow_regions(w, P);
    ASSERT_TRUE(check_feasibility(w, P.model, own, P.H_D, scene, fopt).feasible());

    const IterationResult r = ciao_iteration(w, P, OcpVariant::Trajopt, xs);
    EXPECT_FALSE(r.slack_used);
    EXPECT_TRUE(check_feasibility(r.w, P.model, r.regions, P.H_D, scene, fopt).feasible())
        << to_string(norm);
    OcpConfig cfg = P.ocp;
    cfg.N = w.horizon();
    EXPECT_LE(r.cost, trajectory_cost(w, cfg) + 1e-6);
  }
}

TEST(IterationTest, CollidingGuessIsNeverSilentlyAccepted) {
  const Scene scene = one_disk();
  for (bool recovery : {false, true}) {
    PlanningProblem P = problem_for(scene, Point(15, 15));
    P.planner.slack_recovery = recovery;
    const Eigen::VectorXd xs = rest_state(P.model, Point(5, 5));
    InitializerOptions straight;
    straight.kind = Initializer::StraightLine;
    const Trajectory w = initial_guess(scene, P.model, xs, P.ocp.goal, Norm::L2,
                                       OcpVariant::Trajopt, 0, straight);
    try {
      const IterationResult r = ciao_iteration(w, P, OcpVariant::Trajopt, xs);
      const bool clean =
          check_feasibility(r.w, P.model, r.regions, P.H_D, scene,
                            trajopt_feasibility_options(P, xs))
              .feasible();
      EXPECT_TRUE(r.slack_used || clean);
      if (r.slack_used) EXPECT_TRUE(recovery);
    } catch (const NegativeRadius&) {
      EXPECT_FALSE(recovery);
    } catch (const SolverFailure&) {
      EXPECT_FALSE(recovery);
    }
  }
}

TEST(TrajoptTest, RandomScenariosStayFeasibleAndMonotone) {
  const DiscreteModel model = puck_model(0.2);
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const Scenario sc = generate_scenario(seed, ScenarioParams{}, model);
    OcpConfig ocp;
    ocp.goal = sc.x_goal;
    const PlanningProblem P = make_problem(sc.scene, model, ocp);
    const Trajectory w0 = initial_guess(sc.scene, model, sc.x_start, sc.x_goal, ocp.norm,
                                        OcpVariant::Trajopt, 0, P.planner.initializer);
    const TrajoptResult r = trajopt(w0, P, sc.x_start);
    EXPECT_TRUE(r.converged) << seed;
    ASSERT_GE(r.iterations_to_feasible, 1);
    EXPECT_LE(r.iterations_to_feasible, 6);
    for (int i = r.iterations_to_feasible; i < r.iterations; ++i) {
      EXPECT_TRUE(r.feasible[i]) << seed << " iterate " << i + 1;
      EXPECT_LE(r.costs[i], r.costs[i - 1] + 1e-6) << seed << " iterate " << i + 1;
    }
  }
}

TEST(TrajoptTest, OptimalStartStopsAfterOneExtraIteration) {
  const Scene scene = one_disk();
  const PlanningProblem P = problem_for(scene, Point(16, 15));
  const Eigen::VectorXd xs = rest_state(P.model, Point(4, 5));
  const Trajectory w0 = initial_guess(scene, P.model, xs, P.ocp.goal, Norm::L2,
                                      OcpVariant::Trajopt, 0, P.planner.initializer);
  const TrajoptResult first = trajopt(w0, P, xs);
  ASSERT_TRUE(first.converged);
  const TrajoptResult again = trajopt(first.w, P, xs);
  EXPECT_TRUE(again.converged);
  EXPECT_EQ(again.iterations, 2);
  EXPECT_EQ(again.iterations_to_feasible, 1);
}

TEST(ShiftTest, StoppedTerminalStateRepeatsExactly) {
  const PlanningProblem P = problem_for(Scene{}, Point(12, 4), Norm::L2, 20);
  const Eigen::VectorXd xs = rest_state(P.model, Point(4, 4));
  Trajectory w = initial_guess(Scene{}, P.model, xs, P.ocp.goal, Norm::L2, OcpVariant::Mpc, 20,
                               P.planner.initializer);
  // Exactly at rest, without rounding in the derivative components.
  w.states.back() = rest_state(P.model, w.position(P.model, 20));
  const Trajectory s = shift_trajectory(w, P.model);
  ASSERT_EQ(s.horizon(), w.horizon());
  EXPECT_DOUBLE_EQ(s.t0, w.t0 + w.dt);
  EXPECT_EQ(s.states.back(), w.states.back());
  EXPECT_TRUE(s.controls.back().isZero());
  for (int k = 0; k < s.horizon(); ++k) {
    const Eigen::VectorXd d = s.states[k + 1] - P.model.A_D * s.states[k] - P.model.B_D * s.controls[k];
    EXPECT_LT(d.lpNorm<Eigen::Infinity>(), 1e-9);
  }
}

TEST(MpcTest, StartAtGoalTakesNoSteps) {
  const PlanningProblem P = problem_for(Scene{}, Point(5, 5));
  const MpcTrace t = mpc_run(P, P.ocp.goal, 100);
  EXPECT_TRUE(t.reached_goal);
  EXPECT_TRUE(t.steps.empty());
}

TEST(MpcTest, StraightRunReachesGoalAndStopsSafely) {
  const PlanningProblem P = problem_for(Scene{}, Point(15, 5));
  const Eigen::VectorXd xs = rest_state(P.model, Point(5, 5));
  const MpcTrace t = mpc_run(P, xs, 200);
  ASSERT_TRUE(t.reached_goal);
  EXPECT_EQ(t.infeasible_solves, 0);
  // Goal distance shrinks once the robot is moving.
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 5; k < t.steps.size(); ++k) {
    const double d = (P.model.S_p * (t.steps[k].state - P.ocp.goal)).norm();
    EXPECT_LE(d, prev + 1e-9) << k;
    prev = d;
  }
  for (const MpcStep& s : t.steps) {
    EXPECT_LT((P.model.A * s.plan.states.back()).lpNorm<Eigen::Infinity>(), 1e-7);
  }
  const Metrics m = evaluate_metrics(t, P.model, P.scene, P.ocp.goal);
  EXPECT_NEAR(m.path_length, 10.0, 1e-3);
}

TEST(MpcTest, ClosedLoopFollowsTheModelAndIsDeterministic) {
  const Scene scene = one_disk();
  const PlanningProblem P = problem_for(scene, Point(16, 15));
  const Eigen::VectorXd xs = rest_state(P.model, Point(4, 5));
  const MpcTrace a = mpc_run(P, xs, 200);
  const MpcTrace b = mpc_run(P, xs, 200);
  ASSERT_TRUE(a.reached_goal);
  EXPECT_EQ(a.slack_activations, 0);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  Eigen::VectorXd x = xs;
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    x = P.model.A_D * x + P.model.B_D * a.steps[k].u;
    EXPECT_EQ(a.steps[k].state, x);
    EXPECT_EQ(a.steps[k].u, b.steps[k].u);
  }
  FeasibilityOptions fopt;
  fopt.variant = OcpVariant::Mpc;
  for (const MpcStep& s : a.steps) {
    EXPECT_TRUE(check_feasibility(s.plan, P.model, s.regions, P.H_D, scene, fopt).feasible());
  }
}

TEST(InitializerTest, EmptySceneGivesStraightLine) {
  const DiscreteModel model = puck_model(0.2);
  const std::vector<Point> path =
      plan_path(Scene{}, model, Point(3, 3), Point(15, 9), Norm::L2, {}, 0.0);
  ASSERT_EQ(path.size(), 2u);
  const Trajectory w = initial_guess(Scene{}, model, rest_state(model, Point(3, 3)),
                                     rest_state(model, Point(15, 9)), Norm::L2,
                                     OcpVariant::Trajopt, 0);
  const Point dir = Point(12, 6).normalized();
  for (int k = 0; k <= w.horizon(); ++k) {
    const Point p = w.position(model, k) - Point(3, 3);
    EXPECT_NEAR(p.x() * dir.y() - p.y() * dir.x(), 0.0, 1e-6);
  }
  EXPECT_TRUE(check_feasibility(w, model, {}, PathConstraintSet{}, Scene{},
                                {.continuous = false})
                  .feasible());
}

TEST(InitializerTest, WallWithGapRoutesThroughGap) {
  const DiscreteModel model = puck_model(0.2);
  Scene scene;
  scene.obstacles.push_back({AxisBox{Point(9, 0), Point(11, 8)}, {}});
  scene.obstacles.push_back({AxisBox{Point(9, 10), Point(11, 20)}, {}});
  for (Norm norm : {Norm::L1, Norm::L2, Norm::Linf}) {
    const std::vector<Point> path = plan_path(scene, model, Point(3, 15), Point(17, 15), norm, {}, 0.0);
    bool through = false;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const Point a = path[i];
      const Point b = path[i + 1];
      if ((a.x() - 10) * (b.x() - 10) <= 0 && a.x() != b.x()) {
        const double y = a.y() + (b.y() - a.y()) * (10 - a.x()) / (b.x() - a.x());
        through = through || (y > 8 && y < 10);
      }
    }
    EXPECT_TRUE(through) << to_string(norm);
    const Trajectory w = initial_guess(scene, model, rest_state(model, Point(3, 15)),
                                       rest_state(model, Point(17, 15)), norm,
                                       OcpVariant::Trajopt, 0);
    for (int k = 0; k <= w.horizon(); ++k) {
      const double sd = scene_signed_distance(w.position(model, k), instant_snapshot(scene, 0.0), norm);
      EXPECT_GT(sd, action_radius(model.bounds, model.dt)) << to_string(norm) << " knot " << k;
    }
  }
}

TEST(InitializerTest, BlockedGoalRaisesNoPath) {
  const DiscreteModel model = puck_model(0.2);
  Scene scene;
  scene.obstacles.push_back({AxisBox{Point(9, 0), Point(11, 20)}, {}});
  EXPECT_THROW(plan_path(scene, model, Point(3, 15), Point(17, 15), Norm::L2, {}, 0.0), NoPath);
}

}  // namespace
}  // namespace ciao

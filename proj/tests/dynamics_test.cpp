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
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "ciao/dynamics.hpp"
#include "test_support.hpp"

namespace ciao {
namespace {

using testing::Rng;

TEST(DiscretizeTest, IdentityCase) {
  const LinearModel m{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2)};
  const auto [AD, BD] = discretize(m, 0.3);
  EXPECT_TRUE(AD.isApprox(Eigen::MatrixXd::Identity(2, 2), 0.0));
  EXPECT_NEAR((BD - 0.3 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.0,
              1e-16);
}

TEST(DiscretizeTest, DoubleIntegratorClosedForm) {
  const LinearModel m = integrator_chain(2, 1);
  const auto [AD, BD] = discretize(m, 1.0);
  Eigen::Matrix2d A_exp;
  A_exp << 1, 1, 0, 1;
  EXPECT_EQ(AD, A_exp);
  EXPECT_EQ(BD(0, 0), 0.5);
  EXPECT_EQ(BD(1, 0), 1.0);
}

TEST(DiscretizeTest, PuckBlockMatrices) {
  for (double dt : {0.05, 0.1, 0.2, 0.5}) {
    const DiscreteModel m = puck_model(dt);
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
    Eigen::MatrixXd B(6, 2);
    A << I, dt * I, dt * dt / 2 * I, Eigen::Matrix2d::Zero(), I, dt * I,
        Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero(), I;
    B << dt * dt * dt / 6 * I, dt * dt / 2 * I, dt * I;
    EXPECT_LE((m.A_D - A).cwiseAbs().maxCoeff(), 1e-15) << "dt " << dt;
    EXPECT_LE((m.B_D - B).cwiseAbs().maxCoeff(), 1e-15) << "dt " << dt;
    EXPECT_EQ(m.nx(), 6);
    EXPECT_EQ(m.nu(), 2);
  }
}

TEST(DiscretizeTest, ExpmMatchesPadeOracle) {
  Rng rng(41);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 5;
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n * n; ++i) M.data()[i] = N(rng) * (1 + trial % 4);
    const Eigen::MatrixXd ours = expm(M);
    const Eigen::MatrixXd oracle = M.exp();
    EXPECT_LE((ours - oracle).norm(), 1e-10 * std::max(1.0, oracle.norm())) << M;
  }
}

TEST(DiscretizeTest, MatchesFineIntegration) {
  Rng rng(43);
  std::normal_distribution<double> N(0.0, 1.0);
  // A damped oscillator and a non-nilpotent 3-state system.
  std::vector<LinearModel> models;
  LinearModel osc{Eigen::MatrixXd(2, 2), Eigen::MatrixXd(2, 1)};
  osc.A << 0, 1, -4, -0.4;
  osc.B << 0, 1;
  models.push_back(osc);
  LinearModel rnd{Eigen::MatrixXd(3, 3), Eigen::MatrixXd(3, 2)};
  for (int i = 0; i < 9; ++i) rnd.A.data()[i] = 0.5 * N(rng);
  for (int i = 0; i < 6; ++i) rnd.B.data()[i] = N(rng);
  models.push_back(rnd);
  models.push_back(integrator_chain(3, 2));
  for (const LinearModel& m : models) {
    const double dt = 0.1;
    const auto [AD, BD] = discretize(m, dt);
    Eigen::VectorXd x(m.A.rows());
    for (int i = 0; i < x.size(); ++i) x[i] = N(rng);
    Eigen::VectorXd xd = x;
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd u(m.B.cols());
      for (int i = 0; i < u.size(); ++i) u[i] = N(rng);
      xd = AD * xd + BD * u;
      // Classical RK4 with 1000 substeps per interval.
      const int steps = 1000;
      const double h = dt / steps;
      auto f = [&](const Eigen::VectorXd& s) -> Eigen::VectorXd { return m.A * s + m.B * u; };
      for (int s = 0; s < steps; ++s) {
        const Eigen::VectorXd k1 = f(x);
        const Eigen::VectorXd k2 = f(x + 0.5 * h * k1);
        const Eigen::VectorXd k3 = f(x + 0.5 * h * k2);
        const Eigen::VectorXd k4 = f(x + h * k3);
        x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      }
    }
    EXPECT_LE((x - xd).lpNorm<Eigen::Infinity>(), 1e-8);
  }
}

TEST(DiscretizeTest, RejectsNonPositiveStep) {
  EXPECT_THROW(discretize(integrator_chain(2), 0.0), std::invalid_argument);
}

TEST(TaylorBoundTest, ExampleValues) {
  EXPECT_DOUBLE_EQ(taylor_displacement_bound({0.0}, 2.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(taylor_displacement_bound({1.0, 2.0}, 6.0, 0.5), 0.875);
  EXPECT_DOUBLE_EQ(taylor_displacement_bound({0.0, 0.0}, 0.0, 0.5), 0.0);
}

TEST(TaylorBoundTest, SoundForBoundedPolynomials) {
  Rng rng(47);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 1 + trial % 4;
    const double dt = testing::uniform(rng, 0.05, 1.0);
    // p(t) = sum_{i=1}^m d_i t^i / i!, d_m is the constant top derivative.
    std::vector<double> d(m);
    for (double& v : d) v = testing::uniform(rng, -3.0, 3.0);
    std::vector<double> knot(d.begin(), d.end() - 1);
    for (double& v : knot) v = std::abs(v);
    const double bound = taylor_displacement_bound(knot, std::abs(d.back()), dt);
    for (int s = 0; s <= 200; ++s) {
      const double t = dt * s / 200.0;
      double p = 0.0;
      double power = 1.0;
      for (int i = 1; i <= m; ++i) {
        power *= t;
        p += d[i - 1] * power / factorial(i);
      }
      EXPECT_LE(std::abs(p), bound + 1e-12);
    }
  }
}

TEST(ActionRadiusTest, ExampleValues) {
  EXPECT_DOUBLE_EQ(action_radius(DerivativeBounds{{1.0, 2.0, 6.0}}, 0.5), 0.875);
  EXPECT_DOUBLE_EQ(action_radius(DerivativeBounds{{0.0, 0.0, 0.0}}, 0.5), 0.0);
}

TEST(ActionRadiusTest, Monotone) {
  Rng rng(53);
  for (int trial = 0; trial < 200; ++trial) {
    DerivativeBounds b{{testing::uniform(rng, 0, 3), testing::uniform(rng, 0, 3),
                        testing::uniform(rng, 0, 3)}};
    const double dt = testing::uniform(rng, 0.01, 1.0);
    const double rho = action_radius(b, dt);
    EXPECT_LE(rho, action_radius(b, dt * 1.1));
    for (int i = 0; i < 3; ++i) {
      DerivativeBounds more = b;
      more.p_bar[i] += 0.1;
      EXPECT_LE(rho, action_radius(more, dt));
    }
  }
}

// Knot states with ||v|| <= v_bar and ||a|| <= a_bar, constant jerk with
// ||j|| <= j_bar; the position change inside the interval stays within rho.
TEST(ActionRadiusTest, BoundsSimulatedDisplacement) {
  Rng rng(59);
  const double dt = 0.1;
  const DiscreteModel model = puck_model(dt);
  for (Norm norm : {Norm::L1, Norm::L2, Norm::Linf}) {
    const double rho = action_radius(model.bounds, dt);
    for (int trial = 0; trial < 200; ++trial) {
      const Point v = testing::sample_in_ball(rng, Point::Zero(), model.bounds(1), norm, trial);
      const Point a = testing::sample_in_ball(rng, Point::Zero(), model.bounds(2), norm, trial);
      const Point j = testing::sample_in_ball(rng, Point::Zero(), model.bounds(3), norm, trial);
      for (int s = 0; s <= 1000; ++s) {
        const double t = dt * s / 1000.0;
        const Point dp = v * t + a * t * t / 2 + j * t * t * t / 6;
        EXPECT_LE(norm_eval(dp, norm), rho + 1e-12);
      }
    }
  }
}

TEST(TightenTest, VelocityBoundExample) {
  // Double integrator, |v_x| <= 1, acceleration bound 1, dt = 0.1.
  const DiscreteModel model = make_integrator_model(2, 0.1, DerivativeBounds{{5.0, 1.0}});
  PathConstraintSet H;
  H.G = Eigen::MatrixXd::Zero(2, 6);
  H.G(0, 2) = 1.0;
  H.G(1, 2) = -1.0;
  H.h = Eigen::Vector2d(1.0, 1.0);
  TighteningOptions opt;
  opt.norm = Norm::Linf;
  const PathConstraintSet HD = tighten_path_constraints(H, model, opt);
  EXPECT_NEAR(HD.h[0], 0.9, 1e-15);
  EXPECT_NEAR(HD.h[1], 0.9, 1e-15);
  ASSERT_EQ(HD.norm_bounds.size(), 2u);
  EXPECT_EQ(HD.norm_bounds[0].bound, 5.0);
  EXPECT_EQ(HD.norm_bounds[1].bound, 1.0);
}

TEST(TightenTest, PositionRowsLoseActionRadius) {
  const DiscreteModel model = puck_model(0.1);
  const PathConstraintSet H = position_box(model, Point(0, 0), Point(20, 20));
  for (Norm norm : {Norm::L1, Norm::L2, Norm::Linf}) {
    TighteningOptions opt;
    opt.norm = norm;
    const PathConstraintSet HD = tighten_path_constraints(H, model, opt);
    // Each row has a single unit coefficient, dual norm 1.
    const double rho = action_radius(model.bounds, model.dt);
    for (int r = 0; r < 4; ++r) EXPECT_NEAR(HD.h[r], H.h[r] - rho, 1e-14);
  }
}

TEST(TightenTest, ZeroBoundsKeepSet) {
  const DiscreteModel model = make_integrator_model(3, 0.1, DerivativeBounds{{0, 0, 0}});
  const PathConstraintSet H = position_box(model, Point(0, 0), Point(20, 20));
  TighteningOptions opt;
  opt.check_nonempty = false;
  const PathConstraintSet HD = tighten_path_constraints(H, model, opt);
  EXPECT_EQ(HD.G.topRows(4), H.G);
  EXPECT_EQ(HD.h.head(4), H.h);
}

TEST(TightenTest, SampledContainment) {
  Rng rng(61);
  const DiscreteModel model = puck_model(0.1);
  PathConstraintSet H = position_box(model, Point(0, 0), Point(20, 20));
  // A coupled row on velocity and acceleration.
  H.G.conservativeResize(5, 8);
  H.h.conservativeResize(5);
  H.G.row(4).setZero();
  H.G(4, 2) = 1.0;
  H.G(4, 5) = 0.5;
  H.h[4] = 1.5;
  for (Norm norm : {Norm::L1, Norm::L2, Norm::Linf}) {
    TighteningOptions opt;
    opt.norm = norm;
    const PathConstraintSet HD = tighten_path_constraints(H, model, opt);
    int inside = 0;
    for (int i = 0; i < 20000 && inside < 1000; ++i) {
      Eigen::VectorXd z(8);
      for (int c = 0; c < 8; ++c) {
        const int order = model.derivative_order[c];
        z[c] = order == 0 ? testing::uniform(rng, 0, 20)
                          : testing::uniform(rng, -1, 1) * model.bounds(order);
      }
      if (!HD.contains(z)) continue;
      ++inside;
      EXPECT_TRUE(H.contains(z));
    }
    EXPECT_EQ(inside, 1000);
  }
}

TEST(TightenTest, InscribedBoxEncoding) {
  const DiscreteModel model = puck_model(0.1);
  TighteningOptions opt;
  opt.l2_encoding = L2BoundEncoding::InscribedBox;
  const PathConstraintSet HD = tighten_path_constraints({}, model, opt);
  EXPECT_TRUE(HD.norm_bounds.empty());
  EXPECT_EQ(HD.num_rows(), 12);
  EXPECT_NEAR(HD.h[0], model.bounds(1) / std::sqrt(2.0), 1e-15);
}

TEST(TightenTest, EmptyWhenStepTooLarge) {
  const DiscreteModel model = puck_model(0.5);
  const PathConstraintSet H = position_box(model, Point(0, 0), Point(0.5, 0.5));
  EXPECT_THROW(tighten_path_constraints(H, model), EmptyTightenedSet);
}

TEST(RolloutTest, ChainsModel) {
  const DiscreteModel model = puck_model(0.1);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(6);
  std::vector<Eigen::VectorXd> us(5, Eigen::Vector2d(1.0, -1.0));
  const auto xs = rollout(model, x0, us);
  ASSERT_EQ(xs.size(), 6u);
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(xs[k + 1], model.A_D * xs[k] + model.B_D * us[k]);
  }
}

}  // namespace
}  // namespace ciao

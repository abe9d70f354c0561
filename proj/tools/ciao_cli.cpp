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

// Command-line front end: gen, trajopt, mpc, bench and plot.

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ciao.hpp"

namespace {

using namespace ciao;

void add_model_options(CLI::App* app, cli::ModelOptions& m) {
  app->add_option("--dt", m.dt, "Sampling time [s]")->check(CLI::PositiveNumber);
  app->add_option("--v-max", m.v_max, "Speed bound [m/s]")->check(CLI::NonNegativeNumber);
  app->add_option("--a-max", m.a_max, "Acceleration bound [m/s^2]")->check(CLI::NonNegativeNumber);
  app->add_option("--j-max", m.j_max, "Jerk bound [m/s^3]")->check(CLI::NonNegativeNumber);
}

struct SolveFlags {
  std::string norm = "2";
  std::string cost_norm = "1";
  std::string initializer = "grid_astar";
  std::string backend = "ipm";
  bool no_slack = false;
};

void add_solve_options(CLI::App* app, cli::SolveOptions& s, SolveFlags& f, bool with_norm) {
  if (with_norm) app->add_option("--norm", f.norm, "Constraint norm: 1, 2 or inf");
  app->add_option("--qx", f.cost_norm, "Cost norm: 1, 2 or inf");
  app->add_option("--alpha", s.alpha, "Cost growth factor (> 1)");
  app->add_option("--eps", s.eps, "Relative cost improvement that stops trajopt");
  app->add_option("--max-iterations", s.max_outer_iterations, "Outer iteration limit");
  app->add_option("--initializer", f.initializer, "grid_astar, straight_line or rrt");
  app->add_option("--solver", f.backend, "Conic backend: ipm or admm");
  app->add_flag("--no-slack", f.no_slack, "Fail instead of retrying infeasible solves with slacks");
}

void apply(const SolveFlags& f, cli::SolveOptions& s) {
  s.norm = parse_norm(f.norm);
  s.cost_norm = parse_norm(f.cost_norm);
  s.initializer = parse_initializer(f.initializer);
  s.backend = parse_backend(f.backend);
  s.slack_recovery = !f.no_slack;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Norm-agnostic trajectory optimization and MPC over free regions"};
  app.require_subcommand(1);

  cli::GenOptions gen;
  std::string mix = "disks";
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate seeded scenarios and a suite file");
  gen_cmd->add_option("--seeds", gen.seeds, "Seed range a..b")->required();
  gen_cmd->add_option("--obstacles", gen.params.n_obstacles, "Obstacles per scenario");
  gen_cmd->add_option("--mix", mix, "disks or mixed");
  gen_cmd->add_option("--moving-fraction", gen.params.moving_fraction, "Share of moving obstacles");
  gen_cmd->add_option("-o,--out", gen.out_dir, "Output directory")->required();
  add_model_options(gen_cmd, gen.model);

  cli::SingleRunOptions traj;
  SolveFlags traj_flags;
  CLI::App* traj_cmd = app.add_subcommand("trajopt", "Offline trajectory optimization");
  traj_cmd->add_option("-s,--scenario", traj.scenario, "Scenario file")->required();
  traj_cmd->add_option("-o,--out", traj.out, "Write the trajectory document here");
  add_solve_options(traj_cmd, traj.solve, traj_flags, true);
  add_model_options(traj_cmd, traj.model);

  cli::SingleRunOptions mpc;
  SolveFlags mpc_flags;
  CLI::App* mpc_cmd = app.add_subcommand("mpc", "Closed-loop receding-horizon simulation");
  mpc_cmd->add_option("-s,--scenario", mpc.scenario, "Scenario file")->required();
  mpc_cmd->add_option("--horizon", mpc.solve.horizon, "Prediction horizon N")->check(CLI::PositiveNumber);
  mpc_cmd->add_option("--steps", mpc.solve.step_budget, "Step budget")->check(CLI::PositiveNumber);
  mpc_cmd->add_option("-o,--out", mpc.out, "Write the driven trajectory here");
  add_solve_options(mpc_cmd, mpc.solve, mpc_flags, true);
  add_model_options(mpc_cmd, mpc.model);

  cli::BenchOptions bench;
  SolveFlags bench_flags;
  bool no_reference = false;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Benchmark a scenario suite");
  bench_cmd->add_option("--suite", bench.suite, "Suite file")->required();
  bench_cmd->add_option("--norms", bench.norms, "Comma list of norms");
  bench_cmd->add_option("--mode", bench.mode, "trajopt or mpc");
  bench_cmd->add_option("-o,--out", bench.out_dir, "Output directory")->required();
  bench_cmd->add_option("--horizon", bench.solve.horizon, "MPC horizon")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--steps", bench.solve.step_budget, "MPC step budget")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--jobs", bench.jobs, "Scenarios run concurrently (timings get noisier)");
  bench_cmd->add_flag("--no-reference", no_reference, "Skip the time-optimal reference and ratios");
  add_solve_options(bench_cmd, bench.solve, bench_flags, false);
  add_model_options(bench_cmd, bench.model);

  cli::PlotOptions plot;
  CLI::App* plot_cmd = app.add_subcommand("plot", "Render a scenario and trajectory as SVG");
  plot_cmd->add_option("-s,--scenario", plot.scenario, "Scenario file")->required();
  plot_cmd->add_option("-t,--trajectory", plot.trajectory, "Trajectory document");
  plot_cmd->add_option("-o,--out", plot.out, "SVG output")->required();
  plot_cmd->add_option("--time", plot.time, "Draw obstacles at this time [s]");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) {
      gen.params.mix = parse_mix(mix);
      return cli::cmd_gen(gen, std::cout);
    }
    if (*traj_cmd) {
      apply(traj_flags, traj.solve);
      return cli::cmd_trajopt(traj, std::cout);
    }
    if (*mpc_cmd) {
      apply(mpc_flags, mpc.solve);
      return cli::cmd_mpc(mpc, std::cout);
    }
    if (*bench_cmd) {
      apply(bench_flags, bench.solve);
      bench.reference = !no_reference;
      return cli::cmd_bench(bench, std::cout);
    }
    if (*plot_cmd) return cli::cmd_plot(plot, std::cout);
  } catch (const cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return cli::kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return cli::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kRunFailed;
  }
  return cli::kUsage;
}

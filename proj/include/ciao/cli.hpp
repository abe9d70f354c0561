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
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ciao/io.hpp"
#include "ciao/planner.hpp"
#include "ciao/sim.hpp"
#include "ciao/svg.hpp"

namespace ciao::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRunFailed = 1;
inline constexpr int kUsage = 2;

class UsageError : public Error {
 public:
  using Error::Error;
};

// "a..b" (inclusive), "a", or a comma list of either.
inline std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto number = [&](const std::string& s) -> std::uint64_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw UsageError("bad seed '" + s + "' in '" + text + "'");
    }
    return std::stoull(s);
  };
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(number(part));
      continue;
    }
    const std::uint64_t a = number(part.substr(0, dots));
    const std::uint64_t b = number(part.substr(dots + 2));
    if (b < a) throw UsageError("empty seed range '" + part + "'");
    for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
  }
  return out;
}

inline std::vector<Norm> parse_norm_list(const std::string& text) {
  std::vector<Norm> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(parse_norm(part));
  }
  if (out.empty()) throw UsageError("no norms given");
  return out;
}

struct ModelOptions {
  double dt = 0.2;
  double v_max = 2.0;
  double a_max = 2.0;
  double j_max = 5.0;

  DiscreteModel make() const { return puck_model(dt, v_max, a_max, j_max); }
};

struct SolveOptions {
  Norm norm = Norm::L2;
  Norm cost_norm = Norm::L1;
  double alpha = 1.05;
  double eps = 1e-4;
  int horizon = 50;
  int max_outer_iterations = 50;
  int step_budget = 300;
  Initializer initializer = Initializer::GridAStar;
  bool slack_recovery = true;
  SolverBackend backend = SolverBackend::InteriorPoint;
};

inline PlanningProblem problem_for(const Scenario& sc, const DiscreteModel& model,
                                   const SolveOptions& opt) {
  if (sc.x_start.size() != model.nx() || sc.x_goal.size() != model.nx()) {
    throw UsageError("scenario states do not match the model dimension " +
                     std::to_string(model.nx()));
  }
  OcpConfig ocp;
  ocp.N = opt.horizon;
  ocp.alpha = opt.alpha;
  ocp.norm = opt.norm;
  ocp.cost_norm = opt.cost_norm;
  ocp.goal = sc.x_goal;
  PlannerConfig pc;
  pc.eps = opt.eps;
  pc.max_outer_iterations = opt.max_outer_iterations;
  pc.slack_recovery = opt.slack_recovery;
  pc.backend = opt.backend;
  pc.initializer.kind = opt.initializer;
  return make_problem(sc.scene, model, ocp, pc);
}

// Knot-level radius (sd - rho) below which a failure is put down to a narrow
// passage rather than to the planner.
inline constexpr double kNarrowPassage = 0.25;

inline bool narrow_passage(const Trajectory& guess, const PlanningProblem& P) {
  const RegionSequence own = intrinsic_regions(guess, P.model, P.scene, P.ocp.norm);
  return !own.radii.empty() && *std::min_element(own.radii.begin(), own.radii.end()) < kNarrowPassage;
}

struct RunResult {
  Metrics metrics;
  std::string error;
  TrajectoryDocument document;  // the planned (trajopt) or driven (mpc) trajectory
  std::optional<Trajectory> guess;

  bool complete() const { return error.empty(); }
};

inline void classify_failure(RunResult& r, const PlanningProblem& P) {
  if (r.metrics.success) return;
  if (r.guess && narrow_passage(*r.guess, P)) r.metrics.reason = "narrow_passage";
}

inline RunResult run_trajopt(const Scenario& sc, const PlanningProblem& P) {
  RunResult out;
  out.document.norm = P.ocp.norm;
  out.document.rho = P.rho();
  try {
    out.guess = initial_guess(P.scene, P.model, sc.x_start, sc.x_goal, P.ocp.norm,
                              OcpVariant::Trajopt, 0, P.planner.initializer);
    const TrajoptResult r = trajopt(*out.guess, P, sc.x_start);
    out.document.w = r.w;
    out.document.regions = r.regions.regions;
    Metrics& m = out.metrics;
    m = evaluate_metrics(r.w, P.model, P.scene, sc.x_goal);
    m.iterations = r.iterations;
    m.iterations_to_feasible = r.iterations_to_feasible;
    m.wall_time = r.wall_time;
    m.steps = r.w.horizon();
    const bool feasible = !r.feasible.empty() && r.feasible.back();
    m.success = m.success && feasible;
    if (!feasible) {
      m.reason = "infeasible";
    } else if (!r.converged) {
      m.reason = "not_converged";
    }
  } catch (const NoPath& e) {
    out.metrics.reason = "no_path";
    out.error = e.what();
  } catch (const NegativeRadius& e) {
    out.metrics.reason = "negative_radius";
    out.error = e.what();
  } catch (const Error& e) {
    out.metrics.reason = "solver_failure";
    out.error = e.what();
  }
  if (!out.metrics.success && out.error.empty() && out.metrics.reason.empty()) {
    out.metrics.reason = "goal_not_reached";
  }
  classify_failure(out, P);
  return out;
}

inline RunResult run_mpc(const Scenario& sc, const PlanningProblem& P, int step_budget) {
  RunResult out;
  out.document.norm = P.ocp.norm;
  out.document.rho = P.rho();
  try {
    out.guess = initial_guess(P.scene, P.model, sc.x_start, sc.x_goal, P.ocp.norm, OcpVariant::Mpc,
                              P.ocp.N, P.planner.initializer);
    const MpcTrace t = mpc_run(P, sc.x_start, step_budget);
    out.document.w = trace_trajectory(t, P.model);
    Metrics& m = out.metrics;
    m = evaluate_metrics(t, P.model, P.scene, sc.x_goal);
    m.iterations = m.steps;
    if (!t.failure.empty()) out.error = t.failure;
    if (t.slack_activations > 0 && m.reason.empty()) m.reason = "slack";
  } catch (const NoPath& e) {
    out.metrics.reason = "no_path";
    out.error = e.what();
  } catch (const Error& e) {
    out.metrics.reason = "solver_failure";
    out.error = e.what();
  }
  classify_failure(out, P);
  return out;
}

inline void print_metrics(std::ostream& os, const Metrics& m) {
  os << "success: " << (m.success ? "yes" : "no") << "\n"
     << "time_to_goal: " << io::csv_number(m.time_to_goal) << " s\n"
     << "path_length: " << io::csv_number(m.path_length) << " m\n"
     << "control_effort: " << io::csv_number(m.control_effort) << "\n"
     << "clearance: " << io::csv_number(m.clearance) << " m\n"
     << "iterations: " << m.iterations << "\n";
  if (m.iterations_to_feasible >= 0) os << "iterations_to_feasible: " << m.iterations_to_feasible << "\n";
  if (!m.reason.empty()) os << "reason: " << m.reason << "\n";
  os << "wall_time: " << io::csv_number(m.wall_time) << " s\n";
  if (m.median_step_time > 0.0) {
    os << "step_time: median " << io::csv_number(m.median_step_time) << " s, max "
       << io::csv_number(m.max_step_time) << " s\n";
  }
}

// ----- gen -----

struct GenOptions {
  std::string seeds;
  ScenarioParams params;
  std::string out_dir;
  ModelOptions model;
};

inline std::string scenario_file_name(std::uint64_t seed) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "scenario_%04llu.json", static_cast<unsigned long long>(seed));
  return buf;
}

inline int cmd_gen(const GenOptions& opt, std::ostream& out) {
  const std::vector<std::uint64_t> seeds = parse_seeds(opt.seeds);
  if (seeds.empty()) throw UsageError("empty seed list");
  const DiscreteModel model = opt.model.make();
  std::filesystem::create_directories(opt.out_dir);
  Suite suite;
  for (std::uint64_t seed : seeds) {
    const std::string name = scenario_file_name(seed);
    save_scenario(generate_scenario(seed, opt.params, model),
                  (std::filesystem::path(opt.out_dir) / name).string());
    suite.scenarios.push_back(name);
  }
  const std::string suite_path = (std::filesystem::path(opt.out_dir) / "suite.json").string();
  io::write_file(suite_path, suite_to_json(suite));
  out << "wrote " << seeds.size() << " scenarios and " << suite_path << "\n";
  return kOk;
}

// ----- trajopt / mpc -----

struct SingleRunOptions {
  std::string scenario;
  std::string out;  // trajectory document, optional
  SolveOptions solve;
  ModelOptions model;
};

inline int finish_single(const RunResult& r, const SingleRunOptions& opt, std::ostream& out) {
  print_metrics(out, r.metrics);
  if (!opt.out.empty() && !r.document.w.states.empty()) {
    save_trajectory(r.document, opt.out);
    out << "trajectory: " << opt.out << "\n";
  }
  if (!r.complete()) {
    out << "error: " << r.error << "\n";
    return kRunFailed;
  }
  return r.metrics.success ? kOk : kRunFailed;
}

inline int cmd_trajopt(const SingleRunOptions& opt, std::ostream& out) {
  const Scenario sc = load_scenario(opt.scenario);
  const PlanningProblem P = problem_for(sc, opt.model.make(), opt.solve);
  return finish_single(run_trajopt(sc, P), opt, out);
}

inline int cmd_mpc(const SingleRunOptions& opt, std::ostream& out) {
  const Scenario sc = load_scenario(opt.scenario);
  const PlanningProblem P = problem_for(sc, opt.model.make(), opt.solve);
  return finish_single(run_mpc(sc, P, opt.solve.step_budget), opt, out);
}

// ----- bench -----

struct Stats {
  double min = 0.0, mean = 0.0, median = 0.0, max = 0.0;
  int count = 0;
};

inline Stats stats_of(std::vector<double> v) {
  Stats s;
  s.count = static_cast<int>(v.size());
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  const std::size_t n = v.size();
  s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  return s;
}

struct BenchOptions {
  std::string suite;
  std::string norms = "1,2,inf";
  std::string mode = "trajopt";
  std::string out_dir;
  bool reference = true;
  int jobs = 1;
  SolveOptions solve;
  ModelOptions model;
};

struct BenchRun {
  MetricsRow row;
  std::optional<Metrics> reference;  // metrics of the time-optimal reference
  std::string reference_error;
};

inline std::string summary_csv_header() { return "norm,mode,statistic,metric,count,min,mean,median,max\n"; }

inline std::string summary_row(const std::string& norm, const std::string& mode,
                               const std::string& statistic, const std::string& metric,
                               const Stats& s) {
  std::ostringstream ss;
  ss << norm << ',' << mode << ',' << statistic << ',' << metric << ',' << s.count << ','
     << io::csv_number(s.min) << ',' << io::csv_number(s.mean) << ',' << io::csv_number(s.median)
     << ',' << io::csv_number(s.max) << '\n';
  return ss.str();
}

inline int cmd_bench(const BenchOptions& opt, std::ostream& out) {
  if (opt.mode != "trajopt" && opt.mode != "mpc") throw UsageError("mode must be trajopt or mpc");
  if (opt.jobs < 1) throw UsageError("jobs must be at least 1");
  const std::vector<Norm> norms = parse_norm_list(opt.norms);
  const Suite suite = suite_from_json(io::read_file(opt.suite), opt.suite);
  if (suite.scenarios.empty()) throw UsageError("suite lists no scenarios");
  const std::filesystem::path base = std::filesystem::path(opt.suite).parent_path();
  std::vector<Scenario> scenarios;
  std::vector<std::string> names;
  for (const std::string& s : suite.scenarios) {
    const std::filesystem::path p = base / s;  // an absolute s replaces base
    scenarios.push_back(load_scenario(p.string()));
    names.push_back(s);
  }
  const DiscreteModel model = opt.model.make();

  struct Job {
    std::size_t scenario;
    Norm norm;
  };
  std::vector<Job> jobs;
  for (Norm n : norms) {
    for (std::size_t i = 0; i < scenarios.size(); ++i) jobs.push_back({i, n});
  }
  std::vector<BenchRun> runs(jobs.size());
  ReferenceCache cache;
  auto work = [&](std::size_t j) {
    const Scenario& sc = scenarios[jobs[j].scenario];
    SolveOptions so = opt.solve;
    so.norm = jobs[j].norm;
    BenchRun& br = runs[j];
    br.row.scenario = names[jobs[j].scenario];
    br.row.seed = sc.seed;
    br.row.norm = so.norm;
    br.row.mode = opt.mode;
    PlanningProblem P;
    try {
      P = problem_for(sc, model, so);
    } catch (const std::exception& e) {
      br.row.error = e.what();
      br.row.metrics.reason = "setup";
      return;
    }
    const RunResult r = opt.mode == "trajopt" ? run_trajopt(sc, P) : run_mpc(sc, P, so.step_budget);
    br.row.metrics = r.metrics;
    br.row.error = r.error;
    if (!opt.reference) return;
    try {
      ReferenceOptions ro;
      if (r.metrics.success) ro.upper = r.document.w;
      const Reference ref = cache.get(sc, P, ro);
      br.reference = evaluate_metrics(ref.w, model, sc.scene, sc.x_goal);
    } catch (const Error& e) {
      br.reference_error = e.what();
    }
  };
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) work(j);
  };
  if (opt.jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < opt.jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path dir(opt.out_dir);
  std::string metrics = metrics_csv_header();
  std::string timings = timings_csv_header();
  for (const BenchRun& br : runs) {
    metrics += metrics_csv_row(br.row);
    timings += timings_csv_row(br.row);
  }

  // Aggregates: ratios against the reference (min/mean/median/max) and
  // median(max) of the per-run figures.
  std::string summary = summary_csv_header();
  std::string timing_summary = summary_csv_header();
  std::ostringstream table;
  bool all_complete = true;
  for (Norm n : norms) {
    const std::string ns = to_string(n);
    std::vector<const BenchRun*> rs;
    for (const BenchRun& br : runs) {
      if (br.row.norm == n) rs.push_back(&br);
    }
    int successes = 0;
    std::vector<double> itf, iters, step_med, step_max, wall;
    std::map<std::string, std::vector<double>> ratios;
    for (const BenchRun* br : rs) {
      const Metrics& m = br->row.metrics;
      all_complete = all_complete && br->row.error.empty();
      if (m.success) ++successes;
      if (m.iterations_to_feasible >= 0) itf.push_back(m.iterations_to_feasible);
      iters.push_back(m.iterations);
      wall.push_back(m.wall_time);
      if (opt.mode == "mpc" && m.steps > 0) {
        step_med.push_back(m.median_step_time);
        step_max.push_back(m.max_step_time);
      }
      if (m.success && br->reference && br->reference->success) {
        const Metrics& f = *br->reference;
        auto ratio = [&](const char* key, double a, double b) {
          if (b > 0.0 && std::isfinite(a) && std::isfinite(b)) ratios[key].push_back(a / b);
        };
        ratio("time_to_goal", m.time_to_goal, f.time_to_goal);
        ratio("path_length", m.path_length, f.path_length);
        ratio("control_effort", m.control_effort, f.control_effort);
        ratio("clearance", m.clearance, f.clearance);
      }
    }
    Stats rate;
    rate.count = static_cast<int>(rs.size());
    rate.min = rate.mean = rate.median = rate.max =
        rs.empty() ? 0.0 : static_cast<double>(successes) / rs.size();
    summary += summary_row(ns, opt.mode, "rate", "success", rate);
    table << "norm " << ns << " (" << opt.mode << "): success " << successes << "/" << rs.size()
          << "\n";
    if (opt.reference) {
      for (const char* key : {"time_to_goal", "path_length", "control_effort", "clearance"}) {
        const Stats s = stats_of(ratios[key]);
        summary += summary_row(ns, opt.mode, "ratio", key, s);
        table << "  ratio " << key << ": min " << io::csv_number(s.min) << " mean "
              << io::csv_number(s.mean) << " median " << io::csv_number(s.median) << " max "
              << io::csv_number(s.max) << " (n=" << s.count << ")\n";
      }
    }
    if (!itf.empty()) {
      const Stats s = stats_of(itf);
      summary += summary_row(ns, opt.mode, "value", "iterations_to_feasible", s);
      table << "  iterations to feasible: " << io::csv_number(s.median) << " ("
            << io::csv_number(s.max) << ")\n";
    }
    summary += summary_row(ns, opt.mode, "value", "iterations", stats_of(iters));
    timing_summary += summary_row(ns, opt.mode, "value", "wall_time", stats_of(wall));
    if (!step_med.empty()) {
      const Stats med = stats_of(step_med);
      const Stats mx = stats_of(step_max);
      timing_summary += summary_row(ns, opt.mode, "value", "median_step_time", med);
      timing_summary += summary_row(ns, opt.mode, "value", "max_step_time", mx);
      table << "  step time [s]: " << io::csv_number(med.median) << " (" << io::csv_number(mx.max)
            << ")\n";
    }
  }
  io::write_file((dir / "metrics.csv").string(), metrics);
  io::write_file((dir / "timings.csv").string(), timings);
  io::write_file((dir / "summary.csv").string(), summary);
  io::write_file((dir / "timings_summary.csv").string(), timing_summary);
  out << table.str();
  out << "timings depend on the host (" << std::thread::hardware_concurrency()
      << " hardware threads, " << opt.jobs << " job(s))\n";
  out << "wrote " << (dir / "metrics.csv").string() << "\n";
  return all_complete ? kOk : kRunFailed;
}

// ----- plot -----

struct PlotOptions {
  std::string scenario;
  std::string trajectory;
  std::string out;
  double time = 0.0;
};

inline int cmd_plot(const PlotOptions& opt, std::ostream& out) {
  const Scenario sc = load_scenario(opt.scenario);
  std::optional<TrajectoryDocument> doc;
  if (!opt.trajectory.empty()) doc = load_trajectory(opt.trajectory);
  SvgOptions so;
  so.time = opt.time;
  io::write_file(opt.out, render_svg(sc, doc ? &*doc : nullptr, so));
  out << "wrote " << opt.out << "\n";
  return kOk;
}

}  // namespace ciao::cli

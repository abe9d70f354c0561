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

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ciao/errors.hpp"
#include "ciao/geometry.hpp"
#include "ciao/ocp.hpp"
#include "ciao/sim.hpp"
#include "json.hpp"

namespace ciao {

inline constexpr const char* kScenarioSchema = "ciao-scenario/1";
inline constexpr const char* kTrajectorySchema = "ciao-trajectory/1";
inline constexpr const char* kSuiteSchema = "ciao-suite/1";

namespace io {

using Json = nlohmann::ordered_json;

// "line L, column C" of a byte offset, both 1-based.
inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

inline Json parse(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte points one past the offending character.
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    std::string msg = e.what();
    const auto pos = msg.find("syntax error");
    if (pos != std::string::npos) msg = msg.substr(pos);
    throw ParseError(source + ":" + line_col(text, at) + ": " + msg);
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path + ": cannot write file");
  out << text;
  if (!out) throw Error(path + ": write failed");
}

// Typed access with JSON-pointer locations in the messages.
class Reader {
 public:
  Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& where, const std::string& what) const {
    throw ParseError(source_ + ": " + (where.empty() ? "/" : where) + ": " + what);
  }

  const Json& field(const Json& obj, const std::string& key, const std::string& where) const {
    if (!obj.is_object()) fail(where, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(where, "missing field '" + key + "'");
    return *it;
  }

  double number(const Json& j, const std::string& where) const {
    if (!j.is_number()) fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(where, "expected a finite number");
    return v;
  }

  std::string string(const Json& j, const std::string& where) const {
    if (!j.is_string()) fail(where, "expected a string");
    return j.get<std::string>();
  }

  Eigen::VectorXd vector(const Json& j, const std::string& where, int size = -1) const {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    if (size >= 0 && static_cast<int>(j.size()) != size) {
      fail(where, "expected " + std::to_string(size) + " entries, got " + std::to_string(j.size()));
    }
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = number(j[i], where + "/" + std::to_string(i));
    }
    return v;
  }

  Point point(const Json& j, const std::string& where) const { return vector(j, where, 2); }

  const Json& array(const Json& j, const std::string& where) const {
    if (!j.is_array()) fail(where, "expected an array");
    return j;
  }

  void schema(const Json& doc, const char* expected) const {
    const std::string got = string(field(doc, "schema", ""), "/schema");
    if (got != expected) fail("/schema", "expected '" + std::string(expected) + "', got '" + got + "'");
  }

 private:
  std::string source_;
};

inline Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json to_json(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        Json j;
        if constexpr (std::is_same_v<T, Disk>) {
          j["kind"] = "disk";
          j["center"] = to_json(s.center);
          j["radius"] = s.radius;
        } else if constexpr (std::is_same_v<T, AxisBox>) {
          j["kind"] = "box";
          j["lo"] = to_json(s.lo);
          j["hi"] = to_json(s.hi);
        } else {
          j["kind"] = "capsule";
          j["a"] = to_json(s.a);
          j["b"] = to_json(s.b);
          j["radius"] = s.radius;
        }
        return j;
      },
      shape);
}

inline Shape shape_from_json(const Reader& r, const Json& j, const std::string& at) {
  const std::string kind = r.string(r.field(j, "kind", at), at + "/kind");
  if (kind == "disk") {
    return Disk{r.point(r.field(j, "center", at), at + "/center"),
                r.number(r.field(j, "radius", at), at + "/radius")};
  }
  if (kind == "box") {
    return AxisBox{r.point(r.field(j, "lo", at), at + "/lo"), r.point(r.field(j, "hi", at), at + "/hi")};
  }
  if (kind == "capsule") {
    return Capsule{r.point(r.field(j, "a", at), at + "/a"), r.point(r.field(j, "b", at), at + "/b"),
                   r.number(r.field(j, "radius", at), at + "/radius")};
  }
  r.fail(at + "/kind", "unknown obstacle kind '" + kind + "'");
}

}  // namespace io

inline std::string scenario_to_json(const Scenario& sc) {
  using io::Json;
  Json doc;
  doc["schema"] = kScenarioSchema;
  doc["seed"] = sc.seed;
  doc["workspace"] = {{"lo", io::to_json(sc.scene.workspace.lo)}, {"hi", io::to_json(sc.scene.workspace.hi)}};
  Json obs = Json::array();
  for (const MovingObstacle& o : sc.scene.obstacles) {
    Json j = io::to_json(o.shape);
    Json motion = Json::array();
    for (const MotionSegment& m : o.motion) {
      motion.push_back({{"t_start", m.t_start}, {"velocity", io::to_json(m.velocity)}});
    }
    j["motion"] = motion;
    // Infinite prediction is the default and has no JSON spelling.
    if (std::isfinite(o.prediction_end)) j["prediction_end"] = o.prediction_end;
    obs.push_back(j);
  }
  doc["obstacles"] = obs;
  doc["start"] = io::to_json(sc.x_start);
  doc["goal"] = io::to_json(sc.x_goal);
  return doc.dump(2) + "\n";
}

inline Scenario scenario_from_json(const std::string& text, const std::string& source = "<scenario>") {
  const io::Json doc = io::parse(text, source);
  const io::Reader r(source);
  r.schema(doc, kScenarioSchema);
  Scenario sc;
  const io::Json& seed = r.field(doc, "seed", "");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    r.fail("/seed", "expected a nonnegative integer");
  }
  sc.seed = seed.get<std::uint64_t>();
  const io::Json& ws = r.field(doc, "workspace", "");
  sc.scene.workspace = AxisBox{r.point(r.field(ws, "lo", "/workspace"), "/workspace/lo"),
                               r.point(r.field(ws, "hi", "/workspace"), "/workspace/hi")};
  const io::Json& obs = r.array(r.field(doc, "obstacles", ""), "/obstacles");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string at = "/obstacles/" + std::to_string(i);
    MovingObstacle o;
    o.shape = io::shape_from_json(r, obs[i], at);
    if (obs[i].contains("motion")) {
      const io::Json& motion = r.array(obs[i]["motion"], at + "/motion");
      for (std::size_t m = 0; m < motion.size(); ++m) {
        const std::string mat = at + "/motion/" + std::to_string(m);
        o.motion.push_back({r.number(r.field(motion[m], "t_start", mat), mat + "/t_start"),
                            r.point(r.field(motion[m], "velocity", mat), mat + "/velocity")});
      }
    }
    if (obs[i].contains("prediction_end")) {
      o.prediction_end = r.number(obs[i]["prediction_end"], at + "/prediction_end");
    }
    try {
      o.validate();
    } catch (const std::invalid_argument& e) {
      r.fail(at, e.what());
    }
    sc.scene.obstacles.push_back(std::move(o));
  }
  try {
    sc.scene.validate();
  } catch (const std::invalid_argument& e) {
    r.fail("/workspace", e.what());
  }
  sc.x_start = r.vector(r.field(doc, "start", ""), "/start");
  sc.x_goal = r.vector(r.field(doc, "goal", ""), "/goal", static_cast<int>(sc.x_start.size()));
  return sc;
}

inline void save_scenario(const Scenario& sc, const std::string& path) {
  io::write_file(path, scenario_to_json(sc));
}

inline Scenario load_scenario(const std::string& path) {
  return scenario_from_json(io::read_file(path), path);
}

// A trajectory with optional plotting context: the regions of its last
// iteration and the action radius they were tightened by.
struct TrajectoryDocument {
  Trajectory w;
  std::optional<Norm> norm;
  double rho = 0.0;
  std::vector<FreeRegion> regions;
};

inline std::string trajectory_to_json(const TrajectoryDocument& d) {
  using io::Json;
  Json doc;
  doc["schema"] = kTrajectorySchema;
  doc["dt"] = d.w.dt;
  doc["t0"] = d.w.t0;
  if (d.norm) doc["norm"] = to_string(*d.norm);
  doc["rho"] = d.rho;
  Json xs = Json::array(), us = Json::array(), rs = Json::array();
  for (const auto& x : d.w.states) xs.push_back(io::to_json(x));
  for (const auto& u : d.w.controls) us.push_back(io::to_json(u));
  for (const FreeRegion& f : d.regions) {
    rs.push_back({{"center", io::to_json(f.center)}, {"radius", f.radius}, {"norm", to_string(f.norm)}});
  }
  doc["states"] = xs;
  doc["controls"] = us;
  doc["regions"] = rs;
  return doc.dump(2) + "\n";
}

inline TrajectoryDocument trajectory_from_json(const std::string& text,
                                               const std::string& source = "<trajectory>") {
  const io::Json doc = io::parse(text, source);
  const io::Reader r(source);
  r.schema(doc, kTrajectorySchema);
  TrajectoryDocument d;
  d.w.dt = r.number(r.field(doc, "dt", ""), "/dt");
  d.w.t0 = doc.contains("t0") ? r.number(doc["t0"], "/t0") : 0.0;
  auto norm_of = [&](const io::Json& j, const std::string& at) {
    try {
      return parse_norm(r.string(j, at));
    } catch (const std::invalid_argument& e) {
      r.fail(at, e.what());
    }
  };
  if (doc.contains("norm")) d.norm = norm_of(doc["norm"], "/norm");
  if (doc.contains("rho")) d.rho = r.number(doc["rho"], "/rho");
  const io::Json& xs = r.array(r.field(doc, "states", ""), "/states");
  if (xs.empty()) r.fail("/states", "need at least one state");
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const int nx = k == 0 ? -1 : static_cast<int>(d.w.states.front().size());
    d.w.states.push_back(r.vector(xs[k], "/states/" + std::to_string(k), nx));
  }
  const io::Json& us = r.array(r.field(doc, "controls", ""), "/controls");
  for (std::size_t k = 0; k < us.size(); ++k) {
    const int nu = k == 0 ? -1 : static_cast<int>(d.w.controls.front().size());
    d.w.controls.push_back(r.vector(us[k], "/controls/" + std::to_string(k), nu));
  }
  if (doc.contains("regions")) {
    const io::Json& rs = r.array(doc["regions"], "/regions");
    for (std::size_t k = 0; k < rs.size(); ++k) {
      const std::string at = "/regions/" + std::to_string(k);
      FreeRegion f{r.point(r.field(rs[k], "center", at), at + "/center"),
                   r.number(r.field(rs[k], "radius", at), at + "/radius"),
                   norm_of(r.field(rs[k], "norm", at), at + "/norm")};
      d.regions.push_back(f);
    }
  }
  try {
    d.w.validate();
  } catch (const std::invalid_argument& e) {
    r.fail("/states", e.what());
  }
  return d;
}

inline void save_trajectory(const TrajectoryDocument& d, const std::string& path) {
  io::write_file(path, trajectory_to_json(d));
}

inline TrajectoryDocument load_trajectory(const std::string& path) {
  return trajectory_from_json(io::read_file(path), path);
}

// Benchmark suite: scenario files, relative paths resolved against the
// suite file's directory.
struct Suite {
  std::vector<std::string> scenarios;
};

inline std::string suite_to_json(const Suite& s) {
  io::Json doc;
  doc["schema"] = kSuiteSchema;
  doc["scenarios"] = s.scenarios;
  return doc.dump(2) + "\n";
}

inline Suite suite_from_json(const std::string& text, const std::string& source = "<suite>") {
  const io::Json doc = io::parse(text, source);
  const io::Reader r(source);
  r.schema(doc, kSuiteSchema);
  Suite s;
  const io::Json& list = r.array(r.field(doc, "scenarios", ""), "/scenarios");
  for (std::size_t i = 0; i < list.size(); ++i) {
    s.scenarios.push_back(r.string(list[i], "/scenarios/" + std::to_string(i)));
  }
  return s;
}

// Metrics CSV. Wall-clock columns live in a separate timings file so that
// repeated runs produce identical metrics files.
struct MetricsRow {
  std::string scenario;
  std::uint64_t seed = 0;
  Norm norm = Norm::L2;
  std::string mode;
  Metrics metrics;
  std::string error;
};

inline std::string metrics_csv_header() {
  return "scenario,seed,norm,mode,success,time_to_goal,path_length,control_effort,clearance,"
         "iterations,iterations_to_feasible,steps,reason,error\n";
}

inline std::string timings_csv_header() {
  return "scenario,seed,norm,mode,wall_time,median_step_time,max_step_time\n";
}

namespace io {

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss.precision(9);
  ss << v;
  return ss.str();
}

// Quotes a field holding a separator, quote or newline.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace io

inline std::string metrics_csv_row(const MetricsRow& r) {
  const Metrics& m = r.metrics;
  std::ostringstream ss;
  ss << io::csv_field(r.scenario) << ',' << r.seed << ',' << to_string(r.norm) << ',' << r.mode << ','
     << (m.success ? 1 : 0) << ',' << io::csv_number(m.time_to_goal) << ','
     << io::csv_number(m.path_length) << ',' << io::csv_number(m.control_effort) << ','
     << io::csv_number(m.clearance) << ',' << m.iterations << ',' << m.iterations_to_feasible << ','
     << m.steps << ',' << io::csv_field(m.reason) << ',' << io::csv_field(r.error) << '\n';
  return ss.str();
}

inline std::string timings_csv_row(const MetricsRow& r) {
  const Metrics& m = r.metrics;
  std::ostringstream ss;
  ss << io::csv_field(r.scenario) << ',' << r.seed << ',' << to_string(r.norm) << ',' << r.mode << ','
     << io::csv_number(m.wall_time) << ',' << io::csv_number(m.median_step_time) << ','
     << io::csv_number(m.max_step_time) << '\n';
  return ss.str();
}

}  // namespace ciao

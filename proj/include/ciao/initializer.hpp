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
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "ciao/dynamics.hpp"
#include "ciao/errors.hpp"
#include "ciao/geometry.hpp"
#include "ciao/ocp.hpp"

namespace ciao {

enum class Initializer { GridAStar, StraightLine, Rrt };

inline std::string to_string(Initializer i) {
  switch (i) {
    case Initializer::GridAStar:
      return "grid_astar";
    case Initializer::StraightLine:
      return "straight_line";
    case Initializer::Rrt:
      return "rrt";
  }
  return "?";
}

inline Initializer parse_initializer(std::string_view s) {
  if (s == "grid_astar" || s == "astar") return Initializer::GridAStar;
  if (s == "straight_line" || s == "straight") return Initializer::StraightLine;
  if (s == "rrt") return Initializer::Rrt;
  throw std::invalid_argument("unknown initializer '" + std::string(s) + "'");
}

struct InitializerOptions {
  Initializer kind = Initializer::GridAStar;
  double cell = 0.25;
  // Extra clearance on top of the action radius and robot extent.
  double margin = 0.05;
  // Fraction of the derivative bounds used by the time parameterization.
  double bound_fraction = 0.5;
  std::uint64_t rrt_seed = 1;
  int rrt_max_nodes = 20000;
  double rrt_step = 0.5;
};

// Clearance test shared by the grid, the shortcut pass and RRT: every point
// keeps `inflation` from obstacles and from the workspace edges.
class ClearanceMap {
 public:
  ClearanceMap(const OccupiedSnapshot& snapshot, const AxisBox& workspace, Norm norm,
               double inflation)
      : snapshot_(snapshot), workspace_(workspace), norm_(norm), inflation_(inflation) {}

  double clearance(const Point& p) const {
    const Point lo = p - workspace_.lo;
    const Point hi = workspace_.hi - p;
    const double edge = std::min(lo.minCoeff(), hi.minCoeff());
    return std::min(edge, scene_signed_distance(p, snapshot_, norm_)) - inflation_;
  }

  bool free(const Point& p, double extra = 0.0) const { return clearance(p) >= extra; }

  bool segment_free(const Point& a, const Point& b, double spacing = 0.05) const {
    const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / spacing)));
    for (int i = 0; i <= n; ++i) {
      if (!free(a + (b - a) * (static_cast<double>(i) / n))) return false;
    }
    return true;
  }

  Norm norm() const { return norm_; }
  const AxisBox& workspace() const { return workspace_; }

 private:
  const OccupiedSnapshot& snapshot_;
  AxisBox workspace_;
  Norm norm_;
  double inflation_;
};

// 8-connected A* over cell centres. A cell is free when the norm ball of
// the inflation plus the cell's half diagonal around its centre is free
// (the start and goal cells are always admitted). Ties break on the lower
// heuristic, then the lower cell index.
inline std::vector<Point> grid_astar_path(const ClearanceMap& map, const Point& start,
                                          const Point& goal, double cell) {
  const AxisBox& ws = map.workspace();
  const int nx = std::max(1, static_cast<int>(std::floor(ws.extent().x() / cell)));
  const int ny = std::max(1, static_cast<int>(std::floor(ws.extent().y() / cell)));
  auto index_of = [&](const Point& p) {
    const int i = std::clamp(static_cast<int>((p.x() - ws.lo.x()) / cell), 0, nx - 1);
    const int j = std::clamp(static_cast<int>((p.y() - ws.lo.y()) / cell), 0, ny - 1);
    return j * nx + i;
  };
  auto center = [&](int idx) {
    return Point(ws.lo.x() + (idx % nx + 0.5) * cell, ws.lo.y() + (idx / nx + 0.5) * cell);
  };
  const double half_diag = norm_eval(Point(0.5 * cell, 0.5 * cell), map.norm());
  const int s = index_of(start);
  const int g = index_of(goal);
  if (!map.free(start) || !map.free(goal)) throw NoPath("start or goal is not free");

  std::vector<char> blocked(nx * ny);
  for (int idx = 0; idx < nx * ny; ++idx) blocked[idx] = !map.free(center(idx), half_diag);
  blocked[s] = 0;
  blocked[g] = 0;

  auto h = [&](int idx) {
    const Point d = (center(idx) - center(g)).cwiseAbs();
    return std::max(d.x(), d.y()) + (M_SQRT2 - 1.0) * std::min(d.x(), d.y());
  };
  using Entry = std::tuple<double, double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::vector<double> cost(nx * ny, std::numeric_limits<double>::infinity());
  std::vector<int> parent(nx * ny, -1);
  std::vector<char> closed(nx * ny, 0);
  cost[s] = 0.0;
  open.emplace(h(s), h(s), s);
  while (!open.empty()) {
    const auto [f, hv, cur] = open.top();
    open.pop();
    if (closed[cur]) continue;
    closed[cur] = 1;
    if (cur == g) break;
    const int ci = cur % nx;
    const int cj = cur / nx;
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const int ni = ci + di;
        const int nj = cj + dj;
        if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) continue;
        const int nb = nj * nx + ni;
        if (blocked[nb] || closed[nb]) continue;
        // No corner cutting past blocked cells.
        if (di != 0 && dj != 0 && (blocked[cj * nx + ni] || blocked[nj * nx + ci])) continue;
        const double step = (di != 0 && dj != 0) ? M_SQRT2 * cell : cell;
        if (cost[cur] + step < cost[nb]) {
          cost[nb] = cost[cur] + step;
          parent[nb] = cur;
          open.emplace(cost[nb] + h(nb), h(nb), nb);
        }
      }
    }
  }
  if (!closed[g]) throw NoPath("no grid path between start and goal");
  std::vector<int> cells;
  for (int c = g; c != -1; c = parent[c]) cells.push_back(c);
  std::reverse(cells.begin(), cells.end());
  std::vector<Point> path{start};
  for (std::size_t i = 1; i + 1 < cells.size(); ++i) path.push_back(center(cells[i]));
  path.push_back(goal);
  return path;
}

// Greedy line-of-sight shortcutting: from each kept vertex jump to the
// farthest later vertex that is visible.
inline std::vector<Point> shortcut_path(const std::vector<Point>& path, const ClearanceMap& map) {
  if (path.size() <= 2) return path;
  std::vector<Point> out{path.front()};
  std::size_t i = 0;
  while (i + 1 < path.size()) {
    std::size_t j = path.size() - 1;
    while (j > i + 1 && !map.segment_free(path[i], path[j])) --j;
    out.push_back(path[j]);
    i = j;
  }
  return out;
}

// Seeded RRT with goal bias.
inline std::vector<Point> rrt_path(const ClearanceMap& map, const Point& start,
                                   const Point& goal, const InitializerOptions& opt) {
  if (!map.free(start) || !map.free(goal)) throw NoPath("start or goal is not free");
  std::mt19937_64 rng(opt.rrt_seed);
  const AxisBox& ws = map.workspace();
  std::uniform_real_distribution<double> ux(ws.lo.x(), ws.hi.x());
  std::uniform_real_distribution<double> uy(ws.lo.y(), ws.hi.y());
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Point> nodes{start};
  std::vector<int> parent{-1};
  for (int it = 0; it < opt.rrt_max_nodes; ++it) {
    const Point target = coin(rng) < 0.1 ? goal : Point(ux(rng), uy(rng));
    std::size_t near = 0;
    for (std::size_t n = 1; n < nodes.size(); ++n) {
      if ((nodes[n] - target).squaredNorm() < (nodes[near] - target).squaredNorm()) near = n;
    }
    Point dir = target - nodes[near];
    const double len = dir.norm();
    if (len < 1e-9) continue;
    const Point next = nodes[near] + dir * std::min(1.0, opt.rrt_step / len);
    if (!map.segment_free(nodes[near], next)) continue;
    nodes.push_back(next);
    parent.push_back(static_cast<int>(near));
    if (map.segment_free(next, goal)) {
      std::vector<Point> path{goal};
      for (int c = static_cast<int>(nodes.size()) - 1; c != -1; c = parent[c]) {
        path.push_back(nodes[c]);
      }
      std::reverse(path.begin(), path.end());
      return path;
    }
  }
  throw NoPath("RRT exhausted its node budget");
}

// Rest-to-rest motion along a straight segment with bounded velocity,
// acceleration and jerk (seven constant-jerk phases).
class SCurve {
 public:
  SCurve(double length, double v, double a, double j) {
    if (length <= 0.0) return;
    auto accel_time = [&](double vp, double& tj, double& ap) {
      if (vp * j >= a * a) {
        tj = a / j;
        ap = a;
        return tj + vp / a;
      }
      tj = std::sqrt(vp / j);
      ap = j * tj;
      return 2.0 * tj;
    };
    double tj = 0.0, ap = 0.0;
    double vp = v;
    double ta = accel_time(vp, tj, ap);
    double tv = 0.0;
    if (vp * ta <= length) {
      tv = (length - vp * ta) / vp;
    } else {
      double lo = 0.0, hi = v;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        double tj2, ap2;
        if (mid * accel_time(mid, tj2, ap2) > length) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      vp = lo;
      ta = accel_time(vp, tj, ap);
      tv = std::max(0.0, (length - vp * ta) / std::max(vp, 1e-300));
    }
    const double jp = ap / tj;
    const double flat = std::max(0.0, ta - 2.0 * tj);
    phases_ = {{tj, jp}, {flat, 0.0}, {tj, -jp}, {tv, 0.0},
               {tj, -jp}, {flat, 0.0}, {tj, jp}};
    length_ = length;
  }

  double duration() const {
    double t = 0.0;
    for (const auto& [d, j] : phases_) t += d;
    return t;
  }

  // (s, s', s'') at time t; clamps to the end point afterwards.
  Eigen::Vector3d eval(double t) const {
    Eigen::Vector3d st = Eigen::Vector3d::Zero();
    for (const auto& [d, j] : phases_) {
      const double tau = std::clamp(t, 0.0, d);
      st = advance(st, j, tau);
      t -= d;
      if (t <= 0.0) break;
    }
    if (t > 0.0) st = Eigen::Vector3d(length_, 0.0, 0.0);
    return st;
  }

 private:
  static Eigen::Vector3d advance(const Eigen::Vector3d& s, double j, double t) {
    return {s[0] + s[1] * t + s[2] * t * t / 2 + j * t * t * t / 6, s[1] + s[2] * t + j * t * t / 2,
            s[2] + j * t};
  }

  std::vector<std::pair<double, double>> phases_;
  double length_ = 0.0;
};

// Polyline followed segment by segment, stopping at every vertex.
class PathProfile {
 public:
  PathProfile(std::vector<Point> path, const DerivativeBounds& bounds, Norm norm,
              double fraction)
      : path_(std::move(path)) {
    const double v = fraction * bounds(1);
    const double a = fraction * (bounds.order() >= 2 ? bounds(2) : 1.0);
    const double j = fraction * (bounds.order() >= 3 ? bounds(3) : 1.0);
    double t = 0.0;
    for (std::size_t i = 0; i + 1 < path_.size(); ++i) {
      const Point d = path_[i + 1] - path_[i];
      const double len = d.norm();
      if (len < 1e-12) continue;
      const Point dir = d / len;
      // Bounds hold in the chosen norm along this direction.
      const double k = norm_eval(dir, norm);
      segments_.push_back({path_[i], dir, t, SCurve(len, v / k, a / k, j / k)});
      t += segments_.back().curve.duration();
    }
    duration_ = t;
  }

  double duration() const { return duration_; }
  const std::vector<Point>& path() const { return path_; }
  std::size_t num_segments() const { return segments_.size(); }
  double segment_end_time(std::size_t i) const {
    return segments_[i].t0 + segments_[i].curve.duration();
  }

  // Position derivatives (p, p', p'') at time t.
  std::array<Point, 3> eval(double t) const {
    if (segments_.empty()) return {path_.back(), Point::Zero(), Point::Zero()};
    std::size_t i = 0;
    while (i + 1 < segments_.size() && t >= segments_[i + 1].t0) ++i;
    const Segment& s = segments_[i];
    const Eigen::Vector3d st = s.curve.eval(t - s.t0);
    return {s.start + st[0] * s.dir, st[1] * s.dir, st[2] * s.dir};
  }

 private:
  struct Segment {
    Point start;
    Point dir;
    double t0;
    SCurve curve;
  };
  std::vector<Point> path_;
  std::vector<Segment> segments_;
  double duration_ = 0.0;
};

// Reference state at time t for an integrator-chain model.
inline Eigen::VectorXd reference_state(const DiscreteModel& model, const PathProfile& prof,
                                       double t) {
  const auto d = prof.eval(t);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(model.nx());
  std::vector<int> seen(8, 0);
  for (int i = 0; i < model.nx(); ++i) {
    const int order = model.derivative_order[i];
    const int axis = seen[order]++;
    if (order < 3 && axis < 2) x[i] = d[order][axis];
  }
  return x;
}

// Controls minimizing the squared tracking error of x_1..x_N to `refs`
// subject to the rollout from x_s ending exactly at x_end.
inline Trajectory fit_rollout(const DiscreteModel& model, const Eigen::VectorXd& x_s,
                              const std::vector<Eigen::VectorXd>& refs,
                              const Eigen::VectorXd& x_end, double t0) {
  const int N = static_cast<int>(refs.size()) - 1;
  const int nx = model.nx();
  const int nu = model.nu();
  const double reg = 1e-6;
  if (N < 1) throw std::invalid_argument("fit_rollout needs a horizon of at least 1");
  // x_k = Phi_k u + Psi_k x_s.
  std::vector<Eigen::MatrixXd> Phi(N + 1, Eigen::MatrixXd::Zero(nx, N * nu));
  std::vector<Eigen::MatrixXd> Psi(N + 1);
  Psi[0] = Eigen::MatrixXd::Identity(nx, nx);
  for (int k = 0; k < N; ++k) {
    Phi[k + 1] = model.A_D * Phi[k];
    Phi[k + 1].block(0, k * nu, nx, nu) += model.B_D;
    Psi[k + 1] = model.A_D * Psi[k];
  }
  const int n = N * nu;
  Eigen::MatrixXd H = reg * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (int k = 1; k <= N; ++k) {
    H += Phi[k].transpose() * Phi[k];
    g += Phi[k].transpose() * (refs[k] - Psi[k] * x_s);
  }
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + nx, n + nx);
  K.topLeftCorner(n, n) = H;
  K.topRightCorner(n, nx) = Phi[N].transpose();
  K.bottomLeftCorner(nx, n) = Phi[N];
  Eigen::VectorXd rhs(n + nx);
  rhs << g, x_end - Psi[N] * x_s;
  const Eigen::VectorXd sol = K.partialPivLu().solve(rhs);

  Trajectory w;
  w.dt = model.dt;
  w.t0 = t0;
  for (int k = 0; k < N; ++k) w.controls.push_back(sol.segment(k * nu, nu));
  w.states = rollout(model, x_s, w.controls);
  return w;
}

// Rest state at a position.
inline Eigen::VectorXd rest_state(const DiscreteModel& model, const Point& p) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(model.nx());
  x += model.S_p.transpose() * p;
  return x;
}

inline Trajectory stationary_trajectory(const DiscreteModel& model, const Eigen::VectorXd& x,
                                        int N, double t0) {
  Trajectory w;
  w.dt = model.dt;
  w.t0 = t0;
  w.states.assign(N + 1, x);
  w.controls.assign(N, Eigen::VectorXd::Zero(model.nu()));
  return w;
}

inline ClearanceMap make_clearance_map(const OccupiedSnapshot& snap, const Scene& scene,
                                       const DiscreteModel& model, Norm norm,
                                       const InitializerOptions& opt) {
  double extent = 0.0;
  for (const Eigen::Vector2d& l : model.vertex_offsets) extent = std::max(extent, norm_eval(l, norm));
  const double inflation = action_radius(model.bounds, model.dt) + extent + opt.margin;
  return ClearanceMap(snap, scene.workspace, norm, inflation);
}

// Last time at which some obstacle changes velocity, if all of them end at
// rest; nullopt when nothing moves or something moves forever.
inline std::optional<double> settle_time(const Scene& scene) {
  std::optional<double> t;
  for (const MovingObstacle& o : scene.obstacles) {
    if (o.is_static()) continue;
    if (!o.motion.back().velocity.isZero()) return std::nullopt;
    t = std::max(t.value_or(o.motion.back().t_start), o.motion.back().t_start);
  }
  return t;
}

inline std::vector<Point> plan_path_in(const OccupiedSnapshot& snap, const Scene& scene,
                                       const DiscreteModel& model, const Point& start,
                                       const Point& goal, Norm norm,
                                       const InitializerOptions& opt) {
  const ClearanceMap map = make_clearance_map(snap, scene, model, norm, opt);
  switch (opt.kind) {
    case Initializer::StraightLine:
      return {start, goal};
    case Initializer::Rrt:
      return shortcut_path(rrt_path(map, start, goal, opt), map);
    case Initializer::GridAStar:
      break;
  }
  if (map.segment_free(start, goal)) return {start, goal};
  return shortcut_path(grid_astar_path(map, start, goal, opt.cell), map);
}

// Obstacles that come to rest are avoided along everything they sweep until
// then, so the path is clear at all times; if that blocks every route, the
// obstacles at t0 are used instead.
inline std::vector<Point> plan_path(const Scene& scene, const DiscreteModel& model,
                                    const Point& start, const Point& goal, Norm norm,
                                    const InitializerOptions& opt, double t0) {
  const std::optional<double> settle = settle_time(scene);
  if (settle && *settle > t0) {
    try {
      return plan_path_in(swept_snapshot(scene, t0, *settle), scene, model, start, goal, norm, opt);
    } catch (const NoPath&) {
    } catch (const PredictionHorizonExceeded&) {
    }
  }
  return plan_path_in(instant_snapshot(scene, t0), scene, model, start, goal, norm, opt);
}

// Horizon from the duration of the guess profile.
inline int horizon_for(const PathProfile& prof, double dt) {
  return std::max(1, static_cast<int>(std::ceil(prof.duration() / dt - 1e-9)));
}

// Initial guess from a planned path. For the fixed-horizon variant the
// horizon is sized to the profile (N <= 0) and the guess ends at x_g; for the
// receding-horizon variant it covers the part of the path reachable within
// N steps and ends at rest there.
inline Trajectory initial_guess(const Scene& scene, const DiscreteModel& model,
                                const Eigen::VectorXd& x_s, const Eigen::VectorXd& x_g,
                                Norm norm, OcpVariant variant, int N,
                                const InitializerOptions& opt = {}, double t0 = 0.0) {
  const Point ps = model.S_p * x_s;
  const Point pg = model.S_p * x_g;
  const std::vector<Point> path = plan_path(scene, model, ps, pg, norm, opt, t0);
  PathProfile prof(path, model.bounds, norm, opt.bound_fraction);
  if (variant == OcpVariant::Trajopt) {
    if (N <= 0) N = horizon_for(prof, model.dt);
    std::vector<Eigen::VectorXd> refs;
    for (int k = 0; k <= N; ++k) refs.push_back(reference_state(model, prof, k * model.dt));
    return fit_rollout(model, x_s, refs, x_g, t0);
  }
  if (N < 1) throw std::invalid_argument("receding-horizon guess needs N >= 1");
  const double window = N * model.dt;
  // Keep whole segments that fit, then a partial piece of the next one.
  std::vector<Point> prefix{path.front()};
  double used = 0.0;
  std::size_t seg = 0;
  for (; seg < prof.num_segments(); ++seg) {
    if (prof.segment_end_time(seg) > window) break;
    prefix.push_back(path[seg + 1]);
    used = prof.segment_end_time(seg);
  }
  if (seg < prof.num_segments() && window - used > model.dt) {
    const Point a = prefix.back();
    const Point b = path[seg + 1];
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      PathProfile piece({a, a + mid * (b - a)}, model.bounds, norm, opt.bound_fraction);
      if (piece.duration() <= window - used) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    if (lo > 0.0) prefix.push_back(a + lo * (b - a));
  }
  const PathProfile clipped(prefix, model.bounds, norm, opt.bound_fraction);
  std::vector<Eigen::VectorXd> refs;
  for (int k = 0; k <= N; ++k) refs.push_back(reference_state(model, clipped, k * model.dt));
  Eigen::VectorXd end = rest_state(model, prefix.back());
  if ((model.A * x_g).isZero() && prefix.back() == pg) end = x_g;
  return fit_rollout(model, x_s, refs, end, t0);
}

}  // namespace ciao

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
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "ciao/errors.hpp"
#include "ciao/norm.hpp"

namespace ciao {

using Point = Eigen::Vector2d;

struct Disk {
  Point center;
  double radius;
};

struct AxisBox {
  Point lo;
  Point hi;

  Point extent() const { return hi - lo; }
  double diagonal() const { return (hi - lo).norm(); }
};

// Segment of points swept by a disk; radius zero is a plain segment.
struct Capsule {
  Point a;
  Point b;
  double radius;
};

using Shape = std::variant<Disk, AxisBox, Capsule>;

inline void validate(const Shape& shape) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          if (!(s.radius > 0.0) || !s.center.allFinite()) {
            throw std::invalid_argument("disk radius must be positive");
          }
        } else if constexpr (std::is_same_v<T, AxisBox>) {
          if (!(s.lo.array() < s.hi.array()).all()) {
            throw std::invalid_argument("box hi must strictly dominate lo");
          }
        } else {
          if (!(s.radius >= 0.0) || !s.a.allFinite() || !s.b.allFinite()) {
            throw std::invalid_argument("capsule radius must be nonnegative");
          }
        }
      },
      shape);
}

inline Shape translated(const Shape& shape, const Point& d) {
  return std::visit(
      [&](const auto& s) -> Shape {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return Disk{s.center + d, s.radius};
        } else if constexpr (std::is_same_v<T, AxisBox>) {
          return AxisBox{s.lo + d, s.hi + d};
        } else {
          return Capsule{s.a + d, s.b + d, s.radius};
        }
      },
      shape);
}

// Constant velocity from t_start until the next segment starts.
struct MotionSegment {
  double t_start;
  Point velocity;
};

// A shape with a piecewise-constant-velocity prediction. The shape is given
// at the time of the first segment; an empty motion list means static.
struct MovingObstacle {
  Shape shape;
  std::vector<MotionSegment> motion;
  double prediction_end = std::numeric_limits<double>::infinity();

  bool is_static() const { return motion.empty(); }

  void validate() const {
    ciao::validate(shape);
    for (std::size_t i = 1; i < motion.size(); ++i) {
      if (!(motion[i].t_start > motion[i - 1].t_start)) {
        throw std::invalid_argument(
            "motion segments need strictly increasing start times");
      }
    }
  }

  bool covers(double t0, double t1) const {
    if (motion.empty()) return true;
    constexpr double kSlack = 1e-12;
    return t0 >= motion.front().t_start - kSlack && t1 <= prediction_end + kSlack;
  }

  Point displacement(double t) const {
    Point d = Point::Zero();
    for (std::size_t i = 0; i < motion.size(); ++i) {
      const double begin = motion[i].t_start;
      const double end = i + 1 < motion.size()
                             ? motion[i + 1].t_start
                             : std::numeric_limits<double>::infinity();
      if (t <= begin) break;
      d += motion[i].velocity * (std::min(t, end) - begin);
    }
    return d;
  }

  Shape at(double t) const { return translated(shape, displacement(t)); }
};

struct Scene {
  std::vector<MovingObstacle> obstacles;
  AxisBox workspace{Point(0.0, 0.0), Point(20.0, 20.0)};

  void validate() const {
    ciao::validate(Shape{workspace});
    for (const auto& o : obstacles) o.validate();
  }
};

// Conservative union of the occupied sets over one time interval.
struct OccupiedSnapshot {
  std::vector<Shape> shapes;
};

struct FreeRegion {
  Point center;
  double radius;
  Norm norm;

  bool contains(const Point& p, double tol = 0.0) const {
    return norm_eval(p - center, norm) <= radius + tol;
  }
};

struct SdfOptions {
  double r_max = 100.0;
  double fd_step = 1e-4;
  double ridge_threshold = 1e-6;
  double bisection_tol = 1e-9;
};

namespace detail {

inline double cross2(const Point& a, const Point& b) {
  return a.x() * b.y() - a.y() * b.x();
}

inline double point_segment_distance(const Point& p, const Point& a,
                                     const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

inline bool segments_intersect(const Point& a, const Point& b, const Point& c,
                               const Point& d) {
  const double d1 = cross2(b - a, c - a);
  const double d2 = cross2(b - a, d - a);
  const double d3 = cross2(d - c, a - c);
  const double d4 = cross2(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](const Point& p, const Point& q, const Point& r) {
    return std::min(p.x(), q.x()) <= r.x() && r.x() <= std::max(p.x(), q.x()) &&
           std::min(p.y(), q.y()) <= r.y() && r.y() <= std::max(p.y(), q.y());
  };
  if (d1 == 0 && on_segment(a, b, c)) return true;
  if (d2 == 0 && on_segment(a, b, d)) return true;
  if (d3 == 0 && on_segment(c, d, a)) return true;
  if (d4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

inline double segment_segment_distance(const Point& a, const Point& b,
                                       const Point& c, const Point& d) {
  if (segments_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

// Vertices of the polytopic unit ball of radius t around p, counterclockwise.
inline std::array<Point, 4> ball_vertices(const Point& p, double t, Norm norm) {
  if (norm == Norm::Linf) {
    return {p + Point(t, t), p + Point(-t, t), p + Point(-t, -t), p + Point(t, -t)};
  }
  return {p + Point(t, 0), p + Point(0, t), p + Point(-t, 0), p + Point(0, -t)};
}

inline bool in_convex_polygon(const Point& q, const std::array<Point, 4>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (cross2(v[(i + 1) % v.size()] - v[i], q - v[i]) < 0.0) return false;
  }
  return true;
}

// Euclidean distance between segment [a, b] and a convex polygon.
inline double segment_polygon_distance(const Point& a, const Point& b,
                                       const std::array<Point, 4>& v) {
  if (in_convex_polygon(a, v) || in_convex_polygon(b, v)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    best = std::min(best,
                    segment_segment_distance(a, b, v[i], v[(i + 1) % v.size()]));
  }
  return best;
}

// Signed distance to the capsule (a, b, radius) under a polytopic norm, by
// bisection on the radius of the norm ball around p.
inline double capsule_distance_polytopic(const Point& p, const Point& a,
                                         const Point& b, double radius, Norm norm,
                                         double tol) {
  const double core = point_segment_distance(p, a, b);
  if (core == radius) return 0.0;
  if (core > radius) {
    // Smallest t whose ball touches the capsule.
    double lo = 0.0;
    double hi = norm_eval(p - a, norm);
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (segment_polygon_distance(a, b, ball_vertices(p, mid, norm)) <= radius) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return 0.5 * (lo + hi);
  }
  // Smallest t whose ball leaves the capsule; the ball stays inside the
  // convex capsule exactly while all of its vertices do.
  double lo = 0.0;
  double hi = radius + core;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    double far = 0.0;
    for (const Point& v : ball_vertices(p, mid, norm)) {
      far = std::max(far, point_segment_distance(v, a, b));
    }
    if (far >= radius) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return -0.5 * (lo + hi);
}

// Euclidean lower bound factor: d_star >= factor * d_2.
inline double lower_bound_factor(Norm norm) {
  return norm == Norm::Linf ? M_SQRT1_2 : 1.0;
}

}  // namespace detail

// Signed distance of p to one shape: distance outside, minus penetration
// depth inside.
inline double shape_signed_distance(const Point& p, const Shape& shape, Norm norm,
                                    double tol = 1e-9) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AxisBox>) {
          const Point excess =
              (s.lo - p).cwiseMax(p - s.hi).cwiseMax(Point::Zero());
          if ((excess.array() > 0.0).any()) return norm_eval(excess, norm);
          const Point inner = (p - s.lo).cwiseMin(s.hi - p);
          return -inner.minCoeff();
        } else if constexpr (std::is_same_v<T, Disk>) {
          if (norm == Norm::L2) return (p - s.center).norm() - s.radius;
          return detail::capsule_distance_polytopic(p, s.center, s.center, s.radius,
                                                    norm, tol);
        } else {
          if (norm == Norm::L2) {
            return detail::point_segment_distance(p, s.a, s.b) - s.radius;
          }
          return detail::capsule_distance_polytopic(p, s.a, s.b, s.radius, norm, tol);
        }
      },
      shape);
}

// Euclidean distance bound used to skip exact evaluations in unions.
inline double shape_euclidean_distance(const Point& p, const Shape& shape) {
  return shape_signed_distance(p, shape, Norm::L2);
}

// Signed distance to the union of the snapshot's shapes. Outside all shapes
// this is the exact distance to the union; inside, the deepest per-shape
// penetration. Capped at r_max (the value for an empty snapshot).
inline double scene_signed_distance(const Point& p, const OccupiedSnapshot& snapshot,
                                    Norm norm, const SdfOptions& options = {}) {
  double best = options.r_max;
  double deepest = 0.0;
  bool inside = false;
  const double factor = detail::lower_bound_factor(norm);
  for (const Shape& shape : snapshot.shapes) {
    if (norm != Norm::L2 && !inside) {
      const double d2 = shape_euclidean_distance(p, shape);
      if (d2 > 0.0 && factor * d2 >= best) continue;
    }
    const double d = shape_signed_distance(p, shape, norm, options.bisection_tol);
    if (d < 0.0) {
      inside = true;
      deepest = std::max(deepest, -d);
    } else {
      best = std::min(best, d);
    }
  }
  return inside ? -deepest : best;
}

struct SdfGradient {
  Point direction;  // unit length in the chosen norm; zero on a ridge
  Point raw;        // central finite-difference gradient
  bool ridge;
};

inline SdfGradient sdf_gradient(const Point& p, const OccupiedSnapshot& snapshot,
                                Norm norm, const SdfOptions& options = {}) {
  const double h = options.fd_step;
  Point raw;
  for (int i = 0; i < 2; ++i) {
    Point e = Point::Zero();
    e[i] = h;
    raw[i] = (scene_signed_distance(p + e, snapshot, norm, options) -
              scene_signed_distance(p - e, snapshot, norm, options)) /
             (2.0 * h);
  }
  if (raw.norm() < options.ridge_threshold) {
    return {Point::Zero(), raw, true};
  }
  return {raw / norm_eval(raw, norm), raw, false};
}

struct GrowthOptions {
  SdfOptions sdf;
  double eps_ls = 1e-6;
  // Step cap; 10x the diagonal of the default 20 m x 20 m workspace.
  double eta_max = 10.0 * std::sqrt(800.0);
  double step_tol = 1e-6;
  int escape_budget = 100;
};

struct RegionGrowth {
  FreeRegion region;
  Point seed;       // center after escaping the occupied set
  double seed_sd;   // sd at the seed
  double step;      // accepted line-search step
  bool ridge;
  int escape_steps;
};

namespace detail {

inline Point escape_occupied(Point c, double& sd, const OccupiedSnapshot& snapshot,
                             Norm norm, const GrowthOptions& options, int& steps) {
  steps = 0;
  while (sd < 0.0) {
    if (steps >= options.escape_budget) {
      throw InfeasibleCenter("gradient walk did not leave the occupied set");
    }
    ++steps;
    const double step = -sd + 1e-3;
    const SdfGradient g = sdf_gradient(c, snapshot, norm, options.sdf);
    if (!g.ridge) {
      c += step * g.direction;
    } else {
      // Symmetric interior point: take the best axis move.
      const std::array<Point, 4> dirs = {Point(1, 0), Point(0, 1), Point(-1, 0),
                                         Point(0, -1)};
      Point best = c + step * dirs[0];
      double best_sd = -std::numeric_limits<double>::infinity();
      for (const Point& d : dirs) {
        const Point q = c + step * d;
        const double v = scene_signed_distance(q, snapshot, norm, options.sdf);
        if (v > best_sd) {
          best_sd = v;
          best = q;
        }
      }
      c = best;
    }
    sd = scene_signed_distance(c, snapshot, norm, options.sdf);
  }
  return c;
}

}  // namespace detail

// Enlarges the free region around c by a line search along the normalized
// sdf gradient: the largest step eta with sd(c + eta g) = eta + sd(c), within
// eps_ls. The result contains the ball of radius sd(c) around c.
inline RegionGrowth grow_free_region_report(const Point& c,
                                            const OccupiedSnapshot& snapshot,
                                            Norm norm,
                                            const GrowthOptions& options = {}) {
  RegionGrowth out;
  double sd0 = scene_signed_distance(c, snapshot, norm, options.sdf);
  const Point seed =
      detail::escape_occupied(c, sd0, snapshot, norm, options, out.escape_steps);
  out.seed = seed;
  out.seed_sd = sd0;
  out.step = 0.0;

  const SdfGradient g = sdf_gradient(seed, snapshot, norm, options.sdf);
  out.ridge = g.ridge;
  if (g.ridge) {
    out.region = FreeRegion{seed, std::min(sd0, options.sdf.r_max), norm};
    return out;
  }

  auto admissible = [&](double eta) {
    const double sd = scene_signed_distance(seed + eta * g.direction, snapshot, norm,
                                            options.sdf);
    return sd >= eta + sd0 - options.eps_ls;
  };

  // The admissible steps form an interval [0, eta*] because sd is
  // 1-Lipschitz in the chosen norm: expand by doubling, then bisect.
  double good = 0.0;
  double bad = 0.0;
  bool bracketed = false;
  double eta = std::min(std::max(sd0, 1e-2), options.eta_max);
  while (true) {
    if (admissible(eta)) {
      good = eta;
      if (eta >= options.eta_max) break;
      eta = std::min(2.0 * eta, options.eta_max);
    } else {
      bad = eta;
      bracketed = true;
      break;
    }
  }
  if (bracketed) {
    while (bad - good > options.step_tol) {
      const double mid = 0.5 * (good + bad);
      if (admissible(mid)) {
        good = mid;
      } else {
        bad = mid;
      }
    }
  }
  const Point center = seed + good * g.direction;
  const double radius =
      std::min(scene_signed_distance(center, snapshot, norm, options.sdf),
               options.sdf.r_max);
  out.step = good;
  out.region = FreeRegion{center, radius, norm};
  return out;
}

inline FreeRegion grow_free_region(const Point& c, const OccupiedSnapshot& snapshot,
                                   Norm norm, const GrowthOptions& options = {}) {
  return grow_free_region_report(c, snapshot, norm, options).region;
}

namespace detail {

inline Shape swept_shape(const Shape& shape, const Point& da, const Point& db) {
  if (da == db) return translated(shape, da);
  return std::visit(
      [&](const auto& s) -> Shape {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return Capsule{s.center + da, s.center + db, s.radius};
        } else if constexpr (std::is_same_v<T, AxisBox>) {
          return AxisBox{(s.lo + da).cwiseMin(s.lo + db), (s.hi + da).cwiseMax(s.hi + db)};
        } else {
          const Point d = db - da;
          const Point ab = s.b - s.a;
          if (std::abs(cross2(ab, d)) <= 1e-12 * (ab.norm() * d.norm() + 1e-300)) {
            // Motion along the capsule axis: a longer capsule.
            std::array<Point, 4> ends = {s.a + da, s.b + da, s.a + db, s.b + db};
            const Point axis = (ab.norm() > 0 ? ab : d).normalized();
            auto lo = std::min_element(ends.begin(), ends.end(), [&](auto& x, auto& y) {
              return x.dot(axis) < y.dot(axis);
            });
            auto hi = std::max_element(ends.begin(), ends.end(), [&](auto& x, auto& y) {
              return x.dot(axis) < y.dot(axis);
            });
            return Capsule{*lo, *hi, s.radius};
          }
          // Parallelogram swept by the core segment, enclosed by a disk.
          const Point mid = 0.5 * (s.a + s.b) + da + 0.5 * d;
          const double reach = std::max((0.5 * ab + 0.5 * d).norm(), (0.5 * ab - 0.5 * d).norm());
          return Disk{mid, s.radius + reach};
        }
      },
      shape);
}

}  // namespace detail

// Shapes covering every obstacle over [t0, t1]. Moving disks become capsules
// and moving boxes the bounding box of their endpoint boxes, one piece per
// constant-velocity segment touched by the interval.
inline OccupiedSnapshot swept_snapshot(const Scene& scene, double t0, double t1) {
  if (!(t0 <= t1)) throw std::invalid_argument("swept_snapshot needs t0 <= t1");
  OccupiedSnapshot out;
  out.shapes.reserve(scene.obstacles.size());
  for (const MovingObstacle& o : scene.obstacles) {
    if (o.is_static()) {
      out.shapes.push_back(o.shape);
      continue;
    }
    if (!o.covers(t0, t1)) {
      throw PredictionHorizonExceeded("obstacle prediction does not cover [" +
                                      std::to_string(t0) + ", " + std::to_string(t1) +
                                      "]");
    }
    std::vector<double> cuts = {t0};
    for (const MotionSegment& m : o.motion) {
      if (m.t_start > t0 && m.t_start < t1) cuts.push_back(m.t_start);
    }
    cuts.push_back(t1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      out.shapes.push_back(detail::swept_shape(o.shape, o.displacement(cuts[i]),
                                               o.displacement(cuts[i + 1])));
    }
  }
  return out;
}

// Obstacle shapes at one instant.
inline OccupiedSnapshot instant_snapshot(const Scene& scene, double t) {
  OccupiedSnapshot out;
  for (const MovingObstacle& o : scene.obstacles) out.shapes.push_back(o.at(t));
  return out;
}

}  // namespace ciao

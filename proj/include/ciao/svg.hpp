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
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "ciao/geometry.hpp"
#include "ciao/io.hpp"
#include "ciao/norm.hpp"

namespace ciao {

struct SvgOptions {
  double pixels_per_meter = 30.0;
  double padding = 10.0;
  double time = 0.0;  // obstacles are drawn where they are at this time
  int outline_samples = 144;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

class SvgCanvas {
 public:
  SvgCanvas(const AxisBox& world, const SvgOptions& opt) : world_(world), opt_(opt) {}

  double x(double wx) const { return opt_.padding + (wx - world_.lo.x()) * opt_.pixels_per_meter; }
  double y(double wy) const { return opt_.padding + (world_.hi.y() - wy) * opt_.pixels_per_meter; }
  double len(double m) const { return m * opt_.pixels_per_meter; }
  double width() const { return 2 * opt_.padding + len(world_.hi.x() - world_.lo.x()); }
  double height() const { return 2 * opt_.padding + len(world_.hi.y() - world_.lo.y()); }

  std::string points(const std::vector<Point>& pts) const {
    std::string out;
    for (const Point& p : pts) {
      if (!out.empty()) out += ' ';
      out += fmt(x(p.x())) + "," + fmt(y(p.y()));
    }
    return out;
  }

  std::string circle(const Point& c, double r, const std::string& cls) const {
    return "<circle class=\"" + cls + "\" cx=\"" + fmt(x(c.x())) + "\" cy=\"" + fmt(y(c.y())) +
           "\" r=\"" + fmt(len(r)) + "\"/>\n";
  }
  std::string rect(const Point& lo, const Point& hi, const std::string& cls) const {
    return "<rect class=\"" + cls + "\" x=\"" + fmt(x(lo.x())) + "\" y=\"" + fmt(y(hi.y())) +
           "\" width=\"" + fmt(len(hi.x() - lo.x())) + "\" height=\"" + fmt(len(hi.y() - lo.y())) +
           "\"/>\n";
  }
  std::string polygon(const std::vector<Point>& pts, const std::string& cls) const {
    return "<polygon class=\"" + cls + "\" points=\"" + points(pts) + "\"/>\n";
  }

 private:
  AxisBox world_;
  SvgOptions opt_;
};

inline Point interior_point(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> Point {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return s.center;
        } else if constexpr (std::is_same_v<T, AxisBox>) {
          return 0.5 * (s.lo + s.hi);
        } else {
          return 0.5 * (s.a + s.b);
        }
      },
      shape);
}

// Level set sd(p) = offset of a convex shape, by bisection along rays from an
// interior point. offset 0 traces the shape itself.
inline std::vector<Point> offset_outline(const Shape& shape, double offset, Norm norm, int samples) {
  const Point c = interior_point(shape);
  std::vector<Point> out;
  for (int i = 0; i < samples; ++i) {
    const double a = 2.0 * std::numbers::pi * i / samples;
    const Point d(std::cos(a), std::sin(a));
    double lo = 0.0, hi = 1.0;
    while (shape_signed_distance(c + hi * d, shape, norm) < offset) hi *= 2.0;
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      (shape_signed_distance(c + mid * d, shape, norm) < offset ? lo : hi) = mid;
    }
    out.push_back(c + hi * d);
  }
  return out;
}

inline std::string shape_element(const SvgCanvas& cv, const Shape& shape, const std::string& cls,
                                 int samples) {
  if (const Disk* d = std::get_if<Disk>(&shape)) return cv.circle(d->center, d->radius, cls);
  if (const AxisBox* b = std::get_if<AxisBox>(&shape)) return cv.rect(b->lo, b->hi, cls);
  return cv.polygon(offset_outline(shape, 0.0, Norm::L2, samples), cls);
}

// Norm ball: circle, diamond or axis-aligned square.
inline std::string ball_element(const SvgCanvas& cv, const Point& c, double r, Norm norm,
                                const std::string& cls) {
  switch (norm) {
    case Norm::L2:
      return cv.circle(c, r, cls);
    case Norm::Linf:
      return cv.rect(c - Point(r, r), c + Point(r, r), cls);
    case Norm::L1:
      return cv.polygon({c + Point(r, 0), c + Point(0, r), c - Point(r, 0), c - Point(0, r)}, cls);
  }
  return "";
}

}  // namespace detail

// Scene, safety margins, free regions and the trajectory's knot positions
// (state components 0 and 1). Same inputs give byte-identical output.
inline std::string render_svg(const Scenario& sc, const TrajectoryDocument* traj,
                              const SvgOptions& opt = {}) {
  using detail::fmt;
  const detail::SvgCanvas cv(sc.scene.workspace, opt);
  const Norm norm = traj && traj->norm ? *traj->norm : Norm::L2;
  const double rho = traj ? traj->rho : 0.0;
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(cv.width()) + "\" height=\"" +
       fmt(cv.height()) + "\" viewBox=\"0 0 " + fmt(cv.width()) + " " + fmt(cv.height()) + "\">\n";
  s += "<style>"
       ".workspace{fill:#ffffff;stroke:#000000;stroke-width:1}"
       ".obstacle{fill:#9e9e9e;stroke:#424242;stroke-width:1}"
       ".margin{fill:none;stroke:#d32f2f;stroke-width:1}"
       ".region{fill:#808000;fill-opacity:0.08;stroke:#808000;stroke-width:0.7}"
       ".trajectory{fill:none;stroke:#1565c0;stroke-width:2}"
       ".start{fill:#2e7d32}.goal{fill:#c62828}"
       "</style>\n";
  s += cv.rect(sc.scene.workspace.lo, sc.scene.workspace.hi, "workspace");
  if (traj) {
    for (const FreeRegion& r : traj->regions) {
      s += detail::ball_element(cv, r.center, r.radius, r.norm, "region");
    }
  }
  for (const MovingObstacle& o : sc.scene.obstacles) {
    const Shape shape = o.at(opt.time);
    s += detail::shape_element(cv, shape, "obstacle", opt.outline_samples);
  }
  if (rho > 0.0) {
    for (const MovingObstacle& o : sc.scene.obstacles) {
      const Shape shape = o.at(opt.time);
      const Disk* d = std::get_if<Disk>(&shape);
      if (d && norm == Norm::L2) {
        s += cv.circle(d->center, d->radius + rho, "margin");
      } else {
        s += cv.polygon(detail::offset_outline(shape, rho, norm, opt.outline_samples), "margin");
      }
    }
  }
  if (traj && !traj->w.states.empty()) {
    std::vector<Point> pts;
    for (const Eigen::VectorXd& x : traj->w.states) pts.push_back(x.head<2>());
    s += "<polyline class=\"trajectory\" points=\"" + cv.points(pts) + "\"/>\n";
  }
  const double marker = 4.0 / opt.pixels_per_meter;
  if (sc.x_start.size() >= 2) s += cv.circle(sc.x_start.head<2>(), marker, "start");
  if (sc.x_goal.size() >= 2) s += cv.circle(sc.x_goal.head<2>(), marker, "goal");
  s += "</svg>\n";
  return s;
}

}  // namespace ciao

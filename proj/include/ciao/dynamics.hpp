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
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ciao/conic.hpp"
#include "ciao/errors.hpp"
#include "ciao/norm.hpp"

namespace ciao {

// Continuous-time x' = A x + B u.
struct LinearModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;

  void validate() const {
    if (A.rows() != A.cols() || B.rows() != A.rows() || B.cols() < 1) {
      throw std::invalid_argument("inconsistent model dimensions");
    }
    if (!A.allFinite() || !B.allFinite()) throw std::invalid_argument("non-finite model entries");
  }
};

// Bounds on the star norm of the i-th position derivative, i = 1..m; the
// last one bounds the input derivative globally.
struct DerivativeBounds {
  std::vector<double> p_bar;

  int order() const { return static_cast<int>(p_bar.size()); }
  double operator()(int i) const { return p_bar.at(i - 1); }

  void validate() const {
    if (p_bar.empty()) throw std::invalid_argument("need at least one derivative bound");
    for (double b : p_bar) {
      if (!(b >= 0.0)) throw std::invalid_argument("derivative bounds must be nonnegative");
    }
  }
};

// Zero-order-hold model over z = (x, u). Each entry of `derivative_order`
// tells which position derivative a component of z holds (-1: none).
struct DiscreteModel {
  Eigen::MatrixXd A;  // continuous
  Eigen::MatrixXd B;
  Eigen::MatrixXd A_D;
  Eigen::MatrixXd B_D;
  double dt = 0.0;
  Eigen::MatrixXd S_p;
  std::vector<Eigen::Vector2d> vertex_offsets{Eigen::Vector2d::Zero()};
  std::vector<int> derivative_order;
  DerivativeBounds bounds;

  int nx() const { return static_cast<int>(A_D.rows()); }
  int nu() const { return static_cast<int>(B_D.cols()); }
  int dim() const { return static_cast<int>(S_p.rows()); }

  void validate() const;
};

// Matrix exponential by scaling and squaring of a truncated Taylor series.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& M, double rel_tol = 1e-12) {
  if (M.rows() != M.cols()) throw std::invalid_argument("expm needs a square matrix");
  const int n = static_cast<int>(M.rows());
  const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Eigen::MatrixXd X = M / std::ldexp(1.0, squarings);

  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k < 100; ++k) {
    term = term * X / static_cast<double>(k);
    sum += term;
    const double t = term.cwiseAbs().maxCoeff();
    if (t == 0.0 || t <= rel_tol * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// (A_D, B_D) from the exponential of [[A, B], [0, 0]] dt.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> discretize(const LinearModel& model,
                                                              double dt) {
  model.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const int nx = static_cast<int>(model.A.rows());
  const int nu = static_cast<int>(model.B.cols());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nx + nu, nx + nu);
  M.topLeftCorner(nx, nx) = model.A * dt;
  M.topRightCorner(nx, nu) = model.B * dt;
  const Eigen::MatrixXd E = expm(M);
  return {E.topLeftCorner(nx, nx), E.topRightCorner(nx, nu)};
}

inline void DiscreteModel::validate() const {
  const int n = nx();
  if (A_D.cols() != n || B_D.rows() != n || A.rows() != n || B.cols() != nu()) {
    throw std::invalid_argument("inconsistent discrete model dimensions");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (S_p.cols() != n || S_p.rows() != 2) throw std::invalid_argument("S_p must be 2 x nx");
  for (int r = 0; r < S_p.rows(); ++r) {
    int ones = 0;
    for (int c = 0; c < n; ++c) {
      if (S_p(r, c) == 1.0) {
        ++ones;
      } else if (S_p(r, c) != 0.0) {
        throw std::invalid_argument("S_p entries must be 0 or 1");
      }
    }
    if (ones != 1) throw std::invalid_argument("S_p needs exactly one 1 per row");
  }
  if (vertex_offsets.empty()) throw std::invalid_argument("robot needs at least one vertex");
  if (static_cast<int>(derivative_order.size()) != n + nu()) {
    throw std::invalid_argument("derivative_order must cover (x, u)");
  }
  bounds.validate();
}

// Chain of `order` integrators per axis: x = (p, p', ..., p^(order-1)),
// u = p^(order).
inline LinearModel integrator_chain(int order, int dim = 2) {
  if (order < 1 || dim < 1) throw std::invalid_argument("invalid integrator chain");
  const int nx = order * dim;
  LinearModel m{Eigen::MatrixXd::Zero(nx, nx), Eigen::MatrixXd::Zero(nx, dim)};
  for (int i = 0; i + 1 < order; ++i) {
    m.A.block(i * dim, (i + 1) * dim, dim, dim).setIdentity();
  }
  m.B.bottomRows(dim).setIdentity();
  return m;
}

inline DiscreteModel make_integrator_model(int order, double dt, DerivativeBounds bounds,
                                           std::vector<Eigen::Vector2d> vertex_offsets = {
                                               Eigen::Vector2d::Zero()}) {
  constexpr int kDim = 2;
  if (bounds.order() != order) {
    throw std::invalid_argument("need one derivative bound per integrator");
  }
  DiscreteModel dm;
  const LinearModel lm = integrator_chain(order, kDim);
  dm.A = lm.A;
  dm.B = lm.B;
  std::tie(dm.A_D, dm.B_D) = discretize(lm, dt);
  dm.dt = dt;
  dm.S_p = Eigen::MatrixXd::Zero(kDim, order * kDim);
  dm.S_p.leftCols(kDim).setIdentity();
  dm.vertex_offsets = std::move(vertex_offsets);
  for (int i = 0; i <= order; ++i) {
    for (int d = 0; d < kDim; ++d) dm.derivative_order.push_back(i);
  }
  dm.bounds = std::move(bounds);
  dm.validate();
  return dm;
}

// Jerk-controlled planar puck: x = (p, v, a), u = jerk.
inline DiscreteModel puck_model(double dt, double v_max = 2.0, double a_max = 2.0,
                                double j_max = 5.0) {
  return make_integrator_model(3, dt, DerivativeBounds{{v_max, a_max, j_max}});
}

inline double factorial(int i) {
  double f = 1.0;
  for (int k = 2; k <= i; ++k) f *= k;
  return f;
}

// sum_{i<m} |p^(i)| dt^i / i! + p_bar^(m) dt^m / m!, with m = size + 1.
inline double taylor_displacement_bound(const std::vector<double>& deriv_norms,
                                        double global_bound, double dt) {
  double total = 0.0;
  double power = 1.0;
  const int m = static_cast<int>(deriv_norms.size()) + 1;
  for (int i = 1; i <= m; ++i) {
    power *= dt;
    const double d = i < m ? deriv_norms[i - 1] : global_bound;
    if (d < 0.0) throw std::invalid_argument("derivative norms must be nonnegative");
    total += d * power / factorial(i);
  }
  return total;
}

inline double action_radius(const DerivativeBounds& bounds, double dt) {
  bounds.validate();
  std::vector<double> head(bounds.p_bar.begin(), bounds.p_bar.end() - 1);
  return taylor_displacement_bound(head, bounds.p_bar.back(), dt);
}

// ||z[components]||_norm <= bound.
struct NormBound {
  std::vector<int> components;
  double bound;
  Norm norm;
};

// Linear rows G z <= h over z = (x, u) plus norm bounds.
struct PathConstraintSet {
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  std::vector<NormBound> norm_bounds;

  int num_rows() const { return static_cast<int>(h.size()); }

  bool contains(const Eigen::VectorXd& z, double tol = 1e-9) const {
    if (num_rows() > 0 && ((G * z - h).array() > tol).any()) return false;
    for (const NormBound& nb : norm_bounds) {
      Eigen::VectorXd v(nb.components.size());
      for (std::size_t i = 0; i < nb.components.size(); ++i) v[i] = z[nb.components[i]];
      if (norm_eval(v, nb.norm) > nb.bound + tol) return false;
    }
    return true;
  }

  // Largest violation over all rows (0 when contained).
  double violation(const Eigen::VectorXd& z) const {
    double worst = 0.0;
    if (num_rows() > 0) worst = std::max(worst, (G * z - h).maxCoeff());
    for (const NormBound& nb : norm_bounds) {
      Eigen::VectorXd v(nb.components.size());
      for (std::size_t i = 0; i < nb.components.size(); ++i) v[i] = z[nb.components[i]];
      worst = std::max(worst, norm_eval(v, nb.norm) - nb.bound);
    }
    return worst;
  }
};

// Axis box on positions, lo <= p <= hi.
inline PathConstraintSet position_box(const DiscreteModel& model, const Eigen::Vector2d& lo,
                                      const Eigen::Vector2d& hi) {
  const int nz = model.nx() + model.nu();
  PathConstraintSet H;
  H.G = Eigen::MatrixXd::Zero(4, nz);
  H.h.resize(4);
  for (int d = 0; d < 2; ++d) {
    H.G.row(2 * d).head(model.nx()) = model.S_p.row(d);
    H.h[2 * d] = hi[d];
    H.G.row(2 * d + 1).head(model.nx()) = -model.S_p.row(d);
    H.h[2 * d + 1] = -lo[d];
  }
  return H;
}

enum class L2BoundEncoding { SecondOrderCone, InscribedBox };

struct TighteningOptions {
  Norm norm = Norm::L2;
  L2BoundEncoding l2_encoding = L2BoundEncoding::SecondOrderCone;
  bool check_nonempty = true;
};

namespace detail {

// Components of z holding derivative `order`, in axis order.
inline std::vector<int> components_of_order(const DiscreteModel& model, int order) {
  std::vector<int> out;
  for (std::size_t i = 0; i < model.derivative_order.size(); ++i) {
    if (model.derivative_order[i] == order) out.push_back(static_cast<int>(i));
  }
  return out;
}

inline bool polytope_nonempty(const PathConstraintSet& H, int nz) {
  ProgramBuilder pb(nz);
  for (int r = 0; r < H.num_rows(); ++r) {
    AffineExpr e(H.h[r]);
    for (int c = 0; c < nz; ++c) e.add(c, -H.G(r, c));
    pb.add_nonneg(e);
  }
  for (const NormBound& nb : H.norm_bounds) {
    std::vector<AffineExpr> v;
    for (int c : nb.components) v.push_back(AffineExpr::var(c));
    pb.add_norm_le(v, AffineExpr(nb.bound), nb.norm);
  }
  Tolerances tol;
  tol.max_iter = 20000;
  const Solution s = solve(pb.build(), tol);
  return s.status != SolveStatus::Infeasible;
}

}  // namespace detail

// H_D: each row of H loses the worst-case change of its left-hand side over
// one interval. A row touching derivative j of the position moves by at most
// ||g_j||_dual * sum_{i=1}^{m-j} p_bar^(j+i) dt^i / i!. The knot bounds
// ||p^(i)|| <= p_bar^(i), i = 1..m, are appended.
inline PathConstraintSet tighten_path_constraints(const PathConstraintSet& H,
                                                  const DiscreteModel& model,
                                                  const TighteningOptions& options = {}) {
  const DerivativeBounds& b = model.bounds;
  const int m = b.order();
  const double dt = model.dt;
  const int nz = model.nx() + model.nu();
  if (H.num_rows() > 0 && H.G.cols() != nz) {
    throw std::invalid_argument("path constraints must be over (x, u)");
  }
  const Norm dual = dual_norm(options.norm);

  PathConstraintSet out = H;
  for (int r = 0; r < H.num_rows(); ++r) {
    double delta = 0.0;
    for (int j = 0; j < m; ++j) {
      const std::vector<int> comps = detail::components_of_order(model, j);
      Eigen::VectorXd g(comps.size());
      for (std::size_t i = 0; i < comps.size(); ++i) g[i] = H.G(r, comps[i]);
      const double g_norm = norm_eval(g, dual);
      if (g_norm == 0.0) continue;
      double reach = 0.0;
      double power = 1.0;
      for (int i = 1; i <= m - j; ++i) {
        power *= dt;
        reach += b(j + i) * power / factorial(i);
      }
      delta += g_norm * reach;
    }
    out.h[r] -= delta;
  }

  for (int i = 1; i <= m; ++i) {
    const std::vector<int> comps = detail::components_of_order(model, i);
    if (comps.empty()) continue;
    if (options.norm == Norm::L2 && options.l2_encoding == L2BoundEncoding::InscribedBox) {
      const double side = b(i) / std::sqrt(static_cast<double>(comps.size()));
      const int base = out.num_rows();
      const int add = 2 * static_cast<int>(comps.size());
      out.G.conservativeResize(base + add, nz);
      out.h.conservativeResize(base + add);
      out.G.bottomRows(add).setZero();
      for (std::size_t c = 0; c < comps.size(); ++c) {
        out.G(base + 2 * c, comps[c]) = 1.0;
        out.G(base + 2 * c + 1, comps[c]) = -1.0;
        out.h[base + 2 * c] = side;
        out.h[base + 2 * c + 1] = side;
      }
    } else {
      out.norm_bounds.push_back({comps, b(i), options.norm});
    }
  }
  if (out.G.cols() == 0) out.G.resize(out.num_rows(), nz);

  if (options.check_nonempty && !detail::polytope_nonempty(out, nz)) {
    throw EmptyTightenedSet("tightened path constraints are empty; reduce dt");
  }
  return out;
}

// x_{k+1} = A_D x_k + B_D u_k.
inline std::vector<Eigen::VectorXd> rollout(const DiscreteModel& model,
                                            const Eigen::VectorXd& x0,
                                            const std::vector<Eigen::VectorXd>& controls) {
  std::vector<Eigen::VectorXd> xs{x0};
  xs.reserve(controls.size() + 1);
  for (const Eigen::VectorXd& u : controls) xs.push_back(model.A_D * xs.back() + model.B_D * u);
  return xs;
}

}  // namespace ciao

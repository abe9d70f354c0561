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
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>

#include "ciao/norm.hpp"

namespace ciao {

// One block of cone rows. Second-order blocks are (t, x) with ||x||_2 <= t.
struct Cone {
  enum class Kind { Nonneg, SecondOrder };
  Kind kind;
  int dim;

  static Cone nonneg(int dim) { return {Kind::Nonneg, dim}; }
  static Cone second_order(int dim) { return {Kind::SecondOrder, dim}; }
};

// min c'x  s.t.  A_eq x = b_eq,  h - G x in K  (K given by `cones`).
struct ConicProgram {
  Eigen::VectorXd c;
  Eigen::SparseMatrix<double> A_eq;
  Eigen::VectorXd b_eq;
  Eigen::SparseMatrix<double> G;
  Eigen::VectorXd h;
  std::vector<Cone> cones;

  int num_variables() const { return static_cast<int>(c.size()); }
  int num_equalities() const { return static_cast<int>(b_eq.size()); }
  int num_cone_rows() const { return static_cast<int>(h.size()); }

  bool is_linear() const {
    return std::none_of(cones.begin(), cones.end(), [](const Cone& k) {
      return k.kind == Cone::Kind::SecondOrder;
    });
  }

  int count_cones(Cone::Kind kind) const {
    return static_cast<int>(std::count_if(cones.begin(), cones.end(),
                                          [&](const Cone& k) { return k.kind == kind; }));
  }

  void validate() const {
    const int n = num_variables();
    if (A_eq.cols() != n || G.cols() != n) {
      throw std::invalid_argument("constraint matrices must have one column per variable");
    }
    if (A_eq.rows() != b_eq.size() || G.rows() != h.size()) {
      throw std::invalid_argument("right-hand sides must match constraint rows");
    }
    int rows = 0;
    for (const Cone& k : cones) {
      if (k.dim < 1 || (k.kind == Cone::Kind::SecondOrder && k.dim < 2)) {
        throw std::invalid_argument("invalid cone dimension");
      }
      rows += k.dim;
    }
    if (rows != G.rows()) throw std::invalid_argument("cone dims must sum to rows(G)");
  }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterLimit };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
    case SolveStatus::IterLimit:
      return "iteration_limit";
  }
  return "?";
}

// A primal-dual point: x, cone slack s = h - G x, and multipliers.
struct Candidate {
  Eigen::VectorXd x;
  Eigen::VectorXd s;
  Eigen::VectorXd y_eq;
  Eigen::VectorXd y_cone;
};

struct Solution : Candidate {
  SolveStatus status = SolveStatus::IterLimit;
  double primal_residual = std::numeric_limits<double>::infinity();
  double dual_residual = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  double objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  int refactorizations = 0;
};

struct Tolerances {
  double eps_primal = 1e-7;
  double eps_dual = 1e-7;
  double eps_gap = 1e-8;
  int max_iter = 50000;
};

struct Residuals {
  double primal;
  double dual;
  double gap;
};

// v <- projection of v onto the second-order cone {(t, x) : ||x||_2 <= t}.
template <typename Derived>
void project_second_order_cone_inplace(Eigen::MatrixBase<Derived>& v) {
  const double t = v[0];
  const double nx = v.tail(v.size() - 1).norm();
  if (nx <= t) return;
  if (nx <= -t) {
    v.setZero();
    return;
  }
  const double scale = 0.5 * (t + nx);
  v.tail(v.size() - 1) *= scale / nx;
  v[0] = scale;
}

inline Eigen::VectorXd project_second_order_cone(const Eigen::VectorXd& v) {
  if (v.size() < 2) throw std::invalid_argument("second-order cone needs dim >= 2");
  Eigen::VectorXd out = v;
  project_second_order_cone_inplace(out);
  return out;
}

inline void project_cones_inplace(Eigen::Ref<Eigen::VectorXd> v,
                                  const std::vector<Cone>& cones) {
  int row = 0;
  for (const Cone& k : cones) {
    auto block = v.segment(row, k.dim);
    if (k.kind == Cone::Kind::Nonneg) {
      block = block.cwiseMax(0.0);
    } else {
      project_second_order_cone_inplace(block);
    }
    row += k.dim;
  }
}

// Infinity-norm distance of v to the cone product (self-dual, so also K*).
inline double cone_distance(const Eigen::VectorXd& v, const std::vector<Cone>& cones) {
  if (v.size() == 0) return 0.0;
  Eigen::VectorXd p = v;
  project_cones_inplace(p, cones);
  return (v - p).lpNorm<Eigen::Infinity>();
}

namespace detail {

inline double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

}  // namespace detail

// KKT residuals of a candidate, each relative to the magnitude of the data
// and iterates involved (floored at 1).
inline Residuals residuals(const ConicProgram& program, const Candidate& cand) {
  using detail::inf_norm;
  const Eigen::VectorXd Ax = program.A_eq * cand.x;
  const Eigen::VectorXd Gx = program.G * cand.x;
  const double r_eq = inf_norm(Ax - program.b_eq);
  const double r_cone = inf_norm(Gx + cand.s - program.h);
  const double r_slack = cone_distance(cand.s, program.cones);
  const double p_scale = std::max({1.0, inf_norm(Ax), inf_norm(Gx), inf_norm(cand.s),
                                   inf_norm(program.b_eq), inf_norm(program.h)});

  const Eigen::VectorXd Aty = program.A_eq.transpose() * cand.y_eq;
  const Eigen::VectorXd Gty = program.G.transpose() * cand.y_cone;
  const double r_stat = inf_norm(program.c + Aty + Gty);
  const double r_dual_cone = cone_distance(cand.y_cone, program.cones);
  const double d_scale =
      std::max({1.0, inf_norm(program.c), inf_norm(Aty), inf_norm(Gty)});

  const double primal_obj = program.c.dot(cand.x);
  const double dual_obj = -program.b_eq.dot(cand.y_eq) - program.h.dot(cand.y_cone);
  const double g_scale = std::max({1.0, std::abs(primal_obj), std::abs(dual_obj)});

  return {std::max({r_eq, r_cone, r_slack}) / p_scale,
          std::max(r_stat, r_dual_cone) / d_scale,
          std::abs(primal_obj - dual_obj) / g_scale};
}

// Interface for swapping the embedded solver.
class ConicSolver {
 public:
  virtual ~ConicSolver() = default;
  virtual Solution solve(const ConicProgram& program, const Tolerances& tol,
                         const Candidate* warm_start) const = 0;
};

struct AdmmSettings {
  double rho = 0.1;
  double sigma = 1e-6;
  double relaxation = 1.5;
  double rho_eq_factor = 1e3;
  int ruiz_passes = 10;
  int check_interval = 10;
  int adapt_interval = 50;
  double adapt_threshold = 5.0;
  double eps_infeasible = 1e-5;
};

// Operator-splitting solver for min c'x, A x = z, z in C, with
// C = {b_eq} x (h - K): one quasi-definite KKT solve (affine projection)
// followed by a cone projection and a dual update per iteration.
class AdmmSolver : public ConicSolver {
 public:
  explicit AdmmSolver(AdmmSettings settings = {}) : settings_(settings) {}

  Solution solve(const ConicProgram& program, const Tolerances& tol = {},
                 const Candidate* warm_start = nullptr) const override;

 private:
  AdmmSettings settings_;
};

inline Solution solve(const ConicProgram& program, const Tolerances& tol = {},
                      const Candidate* warm_start = nullptr) {
  return AdmmSolver().solve(program, tol, warm_start);
}

namespace detail {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct RowLayout {
  int num_eq;
  std::vector<Cone> cones;  // for the rows after the equalities
};

inline SpMat stack_rows(const SpMat& top, const SpMat& bottom) {
  std::vector<Triplet> t;
  t.reserve(top.nonZeros() + bottom.nonZeros());
  for (int j = 0; j < top.outerSize(); ++j) {
    for (SpMat::InnerIterator it(top, j); it; ++it) t.emplace_back(it.row(), j, it.value());
  }
  for (int j = 0; j < bottom.outerSize(); ++j) {
    for (SpMat::InnerIterator it(bottom, j); it; ++it) {
      t.emplace_back(top.rows() + it.row(), j, it.value());
    }
  }
  SpMat out(top.rows() + bottom.rows(), top.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

inline Eigen::VectorXd col_inf_norms(const SpMat& m) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m.cols());
  for (int j = 0; j < m.outerSize(); ++j) {
    for (SpMat::InnerIterator it(m, j); it; ++it) {
      out[j] = std::max(out[j], std::abs(it.value()));
    }
  }
  return out;
}

inline Eigen::VectorXd row_inf_norms(const SpMat& m) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m.rows());
  for (int j = 0; j < m.outerSize(); ++j) {
    for (SpMat::InnerIterator it(m, j); it; ++it) {
      out[it.row()] = std::max(out[it.row()], std::abs(it.value()));
    }
  }
  return out;
}

inline double scale_factor(double norm) {
  constexpr double kMin = 1e-4;
  constexpr double kMax = 1e4;
  if (norm < 1e-12) return 1.0;
  return std::clamp(1.0 / std::sqrt(norm), kMin, kMax);
}


}  // namespace detail

inline Solution AdmmSolver::solve(const ConicProgram& program, const Tolerances& tol,
                                  const Candidate* warm_start) const {
  using detail::inf_norm;
  using detail::SpMat;
  program.validate();
  const int n = program.num_variables();
  const int p = program.num_equalities();
  const int m = program.num_cone_rows();
  const int rows = p + m;

  Solution out;
  out.x = Eigen::VectorXd::Zero(n);
  out.s = Eigen::VectorXd::Zero(m);
  out.y_eq = Eigen::VectorXd::Zero(p);
  out.y_cone = Eigen::VectorXd::Zero(m);

  SpMat A = detail::stack_rows(program.A_eq, program.G);
  Eigen::VectorXd b(rows);
  b << program.b_eq, program.h;

  // Ruiz equilibration; second-order blocks share one row factor.
  Eigen::VectorXd D = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd E = Eigen::VectorXd::Ones(rows);
  for (int pass = 0; pass < settings_.ruiz_passes && rows > 0 && n > 0; ++pass) {
    const Eigen::VectorXd cn = detail::col_inf_norms(A);
    Eigen::VectorXd rn = detail::row_inf_norms(A);
    int r = p;
    for (const Cone& k : program.cones) {
      if (k.kind == Cone::Kind::SecondOrder) {
        rn.segment(r, k.dim).setConstant(rn.segment(r, k.dim).maxCoeff());
      }
      r += k.dim;
    }
    Eigen::VectorXd d(n), e(rows);
    for (int j = 0; j < n; ++j) d[j] = detail::scale_factor(cn[j]);
    for (int i = 0; i < rows; ++i) e[i] = detail::scale_factor(rn[i]);
    A = e.asDiagonal() * A * d.asDiagonal();
    D.array() *= d.array();
    E.array() *= e.array();
  }
  Eigen::VectorXd c = D.cwiseProduct(program.c);
  const double c_norm = inf_norm(c);
  const double c_scale = c_norm > 1e-12 ? std::clamp(1.0 / c_norm, 1e-4, 1e4) : 1.0;
  c *= c_scale;
  const Eigen::VectorXd bs = E.cwiseProduct(b);
  const SpMat At = A.transpose();

  auto project_c = [&](Eigen::VectorXd& v) {
    v.head(p) = bs.head(p);
    if (m == 0) return;
    Eigen::VectorXd w = bs.tail(m) - v.tail(m);
    project_cones_inplace(w, program.cones);
    v.tail(m) = bs.tail(m) - w;
  };

  Eigen::VectorXd rho_vec(rows);
  double rho = settings_.rho;
  auto set_rho = [&](double value) {
    rho = value;
    rho_vec.head(p).setConstant(rho * settings_.rho_eq_factor);
    rho_vec.tail(m).setConstant(rho);
  };
  set_rho(rho);

  auto kkt_matrix = [&]() {
    std::vector<detail::Triplet> t;
    t.reserve(n + rows + 2 * A.nonZeros());
    for (int j = 0; j < n; ++j) t.emplace_back(j, j, settings_.sigma);
    for (int j = 0; j < A.outerSize(); ++j) {
      for (SpMat::InnerIterator it(A, j); it; ++it) {
        t.emplace_back(n + it.row(), j, it.value());
        t.emplace_back(j, n + it.row(), it.value());
      }
    }
    for (int i = 0; i < rows; ++i) t.emplace_back(n + i, n + i, -1.0 / rho_vec[i]);
    SpMat K(n + rows, n + rows);
    K.setFromTriplets(t.begin(), t.end());
    return K;
  };

  Eigen::SimplicialLDLT<SpMat> ldlt;
  {
    const SpMat K = kkt_matrix();
    ldlt.analyzePattern(K);
    ldlt.factorize(K);
  }
  if (ldlt.info() != Eigen::Success) {
    out.status = SolveStatus::IterLimit;
    return out;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows);
  if (warm_start != nullptr && warm_start->x.size() == n && warm_start->s.size() == m &&
      warm_start->y_eq.size() == p && warm_start->y_cone.size() == m) {
    x = warm_start->x.cwiseQuotient(D);
    Eigen::VectorXd zu(rows), yu(rows);
    zu << program.b_eq, program.h - warm_start->s;
    yu << warm_start->y_eq, warm_start->y_cone;
    z = E.cwiseProduct(zu);
    y = yu.cwiseQuotient(E) * c_scale;
  }
  project_c(z);

  auto unscale = [&](const Eigen::VectorXd& xs, const Eigen::VectorXd& zs,
                     const Eigen::VectorXd& ys, Candidate& cand) {
    cand.x = D.cwiseProduct(xs);
    const Eigen::VectorXd zu = zs.cwiseQuotient(E);
    const Eigen::VectorXd yu = E.cwiseProduct(ys) / c_scale;
    cand.s = program.h - zu.tail(m);
    cand.y_eq = yu.head(p);
    cand.y_cone = yu.tail(m);
  };


  Eigen::VectorXd rhs(n + rows), sol(n + rows);
  Eigen::VectorXd x_prev = x, y_prev = y;
  Eigen::VectorXd z_tilde(rows), z_relaxed(rows), z_next(rows);
  const double alpha = settings_.relaxation;
  int infeasible_hits = 0;
  int unbounded_hits = 0;
  int adapt_gap = settings_.adapt_interval;
  int next_adapt = adapt_gap;

  Candidate cand;
  int iter = 0;
  for (iter = 1; iter <= tol.max_iter; ++iter) {
    x_prev = x;
    y_prev = y;
    rhs.head(n) = settings_.sigma * x - c;
    rhs.tail(rows) = z - y.cwiseQuotient(rho_vec);
    sol = ldlt.solve(rhs);
    z_tilde = z + (sol.tail(rows) - y).cwiseQuotient(rho_vec);
    x = alpha * sol.head(n) + (1.0 - alpha) * x;
    z_relaxed = alpha * z_tilde + (1.0 - alpha) * z;
    z_next = z_relaxed + y.cwiseQuotient(rho_vec);
    project_c(z_next);
    y += rho_vec.cwiseProduct(z_relaxed - z_next);
    z = z_next;

    if (iter % settings_.check_interval != 0 && iter != tol.max_iter) continue;

    unscale(x, z, y, cand);
    const Residuals r = residuals(program, cand);
    out.primal_residual = r.primal;
    out.dual_residual = r.dual;
    out.gap = r.gap;
    if (r.primal <= tol.eps_primal && r.dual <= tol.eps_dual && r.gap <= tol.eps_gap) {
      out.status = SolveStatus::Optimal;
      break;
    }

    // Divergence certificates from the last iterate difference.
    const double eps = settings_.eps_infeasible;
    {
      const Eigen::VectorXd dy = E.cwiseProduct(y - y_prev);
      const double ndy = inf_norm(dy);
      bool hit = false;
      if (ndy > 1e-10) {
        const Eigen::VectorXd Atdy = program.A_eq.transpose() * dy.head(p) +
                                     program.G.transpose() * dy.tail(m);
        const double support = b.dot(dy);
        const double cone_violation = cone_distance(dy.tail(m), program.cones);
        hit = inf_norm(Atdy) <= eps * ndy && support < -eps * ndy &&
              cone_violation <= eps * ndy;
      }
      infeasible_hits = hit ? infeasible_hits + 1 : 0;
    }
    {
      const Eigen::VectorXd dx = D.cwiseProduct(x - x_prev);
      const double ndx = inf_norm(dx);
      bool hit = false;
      if (ndx > 1e-10) {
        const Eigen::VectorXd Adx = program.A_eq * dx;
        const Eigen::VectorXd negGdx = -(program.G * dx);
        hit = program.c.dot(dx) < -eps * ndx && inf_norm(Adx) <= eps * ndx &&
              cone_distance(negGdx, program.cones) <= eps * ndx;
      }
      unbounded_hits = hit ? unbounded_hits + 1 : 0;
    }
    if (infeasible_hits >= 2) {
      out.status = SolveStatus::Infeasible;
      break;
    }
    if (unbounded_hits >= 2) {
      out.status = SolveStatus::Unbounded;
      break;
    }

    if (iter >= next_adapt) {
      next_adapt = iter + adapt_gap;
      const Eigen::VectorXd Ax = A * x;
      const Eigen::VectorXd Aty = At * y;
      const double prim = inf_norm(Ax - z) / std::max({inf_norm(Ax), inf_norm(z), 1e-10});
      const double dual =
          inf_norm(c + Aty) / std::max({inf_norm(Aty), inf_norm(c), 1e-10});
      const double proposal =
          std::clamp(rho * std::sqrt(prim / std::max(dual, 1e-30)), 1e-6, 1e6);
      if (proposal > settings_.adapt_threshold * rho ||
          proposal < rho / settings_.adapt_threshold) {
        set_rho(proposal);
        ldlt.factorize(kkt_matrix());
        ++out.refactorizations;
        // Back off so that rho settles instead of chasing oscillations.
        adapt_gap *= 2;
      }
    }
  }
  out.iterations = std::min(iter, tol.max_iter);
  unscale(x, z, y, cand);
  static_cast<Candidate&>(out) = cand;
  out.objective = program.c.dot(out.x);
  return out;
}

// Affine expression sum(coef * x[index]) + constant.
struct AffineExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  AffineExpr() = default;
  explicit AffineExpr(double k) : constant(k) {}
  static AffineExpr var(int index, double coef = 1.0) {
    AffineExpr e;
    e.terms.emplace_back(index, coef);
    return e;
  }
  AffineExpr& add(int index, double coef) {
    if (coef != 0.0) terms.emplace_back(index, coef);
    return *this;
  }
  AffineExpr& add(const AffineExpr& other, double scale = 1.0) {
    for (const auto& [i, a] : other.terms) terms.emplace_back(i, scale * a);
    constant += scale * other.constant;
    return *this;
  }
  AffineExpr scaled(double k) const {
    AffineExpr e;
    e.add(*this, k);
    return e;
  }
};

// Incremental assembly of a ConicProgram.
class ProgramBuilder {
 public:
  explicit ProgramBuilder(int num_variables = 0) : num_vars_(num_variables) {
    cost_.assign(num_variables, 0.0);
  }

  int add_variables(int count) {
    const int first = num_vars_;
    num_vars_ += count;
    cost_.resize(num_vars_, 0.0);
    return first;
  }
  int num_variables() const { return num_vars_; }
  int num_equalities() const { return static_cast<int>(b_eq_.size()); }
  int num_nonneg_rows() const { return static_cast<int>(h_nonneg_.size()); }
  int num_soc_blocks() const { return static_cast<int>(soc_dims_.size()); }
  int num_soc_rows() const { return static_cast<int>(h_soc_.size()); }

  void add_cost(int index, double coef) { cost_.at(index) += coef; }

  // e == 0
  void add_equality(const AffineExpr& e) {
    const int row = num_equalities();
    for (const auto& [i, a] : e.terms) eq_.emplace_back(row, i, a);
    b_eq_.push_back(-e.constant);
  }

  // e >= 0
  void add_nonneg(const AffineExpr& e) {
    const int row = num_nonneg_rows();
    for (const auto& [i, a] : e.terms) nonneg_.emplace_back(row, i, -a);
    h_nonneg_.push_back(e.constant);
  }

  // (e[0], e[1..]) in the second-order cone.
  void add_soc(const std::vector<AffineExpr>& e) {
    if (e.size() < 2) throw std::invalid_argument("second-order cone needs dim >= 2");
    for (const AffineExpr& row_expr : e) {
      const int row = num_soc_rows();
      for (const auto& [i, a] : row_expr.terms) soc_.emplace_back(row, i, -a);
      h_soc_.push_back(row_expr.constant);
    }
    soc_dims_.push_back(static_cast<int>(e.size()));
  }

  // ||v||_norm <= t. Polytopic norms expand into linear rows: 2n for Linf,
  // 2^n sign patterns for L1.
  void add_norm_le(const std::vector<AffineExpr>& v, const AffineExpr& t, Norm norm) {
    switch (norm) {
      case Norm::Linf:
        for (const AffineExpr& vi : v) {
          add_nonneg(AffineExpr(t).add(vi, -1.0));
          add_nonneg(AffineExpr(t).add(vi, 1.0));
        }
        break;
      case Norm::L1: {
        const int patterns = 1 << v.size();
        for (int mask = 0; mask < patterns; ++mask) {
          AffineExpr row = t;
          for (std::size_t j = 0; j < v.size(); ++j) {
            row.add(v[j], (mask >> j) & 1 ? 1.0 : -1.0);
          }
          add_nonneg(row);
        }
        break;
      }
      case Norm::L2: {
        std::vector<AffineExpr> rows = {t};
        rows.insert(rows.end(), v.begin(), v.end());
        add_soc(rows);
        break;
      }
    }
  }

  ConicProgram build() const {
    using detail::Triplet;
    ConicProgram prog;
    prog.c = Eigen::Map<const Eigen::VectorXd>(cost_.data(), num_vars_);
    prog.A_eq.resize(num_equalities(), num_vars_);
    prog.A_eq.setFromTriplets(eq_.begin(), eq_.end());
    prog.b_eq = Eigen::Map<const Eigen::VectorXd>(b_eq_.data(), b_eq_.size());

    const int nn = num_nonneg_rows();
    std::vector<Triplet> g = nonneg_;
    for (const Triplet& t : soc_) g.emplace_back(nn + t.row(), t.col(), t.value());
    prog.G.resize(nn + num_soc_rows(), num_vars_);
    prog.G.setFromTriplets(g.begin(), g.end());
    prog.h.resize(nn + num_soc_rows());
    for (int i = 0; i < nn; ++i) prog.h[i] = h_nonneg_[i];
    for (int i = 0; i < num_soc_rows(); ++i) prog.h[nn + i] = h_soc_[i];
    if (nn > 0) prog.cones.push_back(Cone::nonneg(nn));
    for (int d : soc_dims_) prog.cones.push_back(Cone::second_order(d));
    return prog;
  }

 private:
  int num_vars_;
  std::vector<double> cost_;
  std::vector<detail::Triplet> eq_;
  std::vector<double> b_eq_;
  std::vector<detail::Triplet> nonneg_;
  std::vector<double> h_nonneg_;
  std::vector<detail::Triplet> soc_;
  std::vector<double> h_soc_;
  std::vector<int> soc_dims_;
};

}  // namespace ciao

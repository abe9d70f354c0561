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
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "ciao/conic.hpp"

namespace ciao {

// Primal-dual interior-point backend over the same cone products:
// homogeneous self-dual embedding, Nesterov-Todd scaling and Mehrotra
// predictor-corrector steps. Reaches residuals far below what the
// first-order iteration attains on long horizons.
struct InteriorPointSettings {
  int max_iter = 100;
  // Static regularization of the KKT matrix, removed by refinement.
  double regularization = 1e-9;
  int refine_steps = 20;
  double step_fraction = 0.99;
  // Certificates must hold this tightly; nearly degenerate feasible
  // programs otherwise drift toward tau = kappa = 0 and read as infeasible.
  double eps_infeasible = 1e-12;
  int ruiz_passes = 10;
  // A stalled solve still reports optimal when its best iterate is within
  // these factors of the primal and of the dual and gap tolerances.
  double stall_primal_factor = 10.0;
  double stall_factor = 100.0;
};

namespace detail {

// Scaling of one cone block. Nonneg: W = diag(w). Second order:
// W = eta * [wb0, wb1'; wb1, I + wb1 wb1' / (1 + wb0)].
struct BlockScaling {
  Cone cone;
  int row;
  Eigen::VectorXd w;  // Nonneg: w; SecondOrder: wb
  double eta = 1.0;
};

// Factored to avoid cancellation near the cone boundary.
inline double soc_det(const Eigen::Ref<const Eigen::VectorXd>& u) {
  const double t = u.tail(u.size() - 1).norm();
  return (u[0] - t) * (u[0] + t);
}

class ConeOps {
 public:
  explicit ConeOps(const std::vector<Cone>& cones) : cones_(cones) {
    int row = 0;
    for (const Cone& k : cones_) {
      starts_.push_back(row);
      row += k.dim;
      degree_ += k.kind == Cone::Kind::Nonneg ? k.dim : 1;
    }
    rows_ = row;
  }

  int degree() const { return degree_; }
  int rows() const { return rows_; }
  const std::vector<Cone>& cones() const { return cones_; }
  int start(std::size_t i) const { return starts_[i]; }

  // Identity element e.
  Eigen::VectorXd identity() const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(rows_);
    for (std::size_t i = 0; i < cones_.size(); ++i) {
      if (cones_[i].kind == Cone::Kind::Nonneg) {
        e.segment(starts_[i], cones_[i].dim).setOnes();
      } else {
        e[starts_[i]] = 1.0;
      }
    }
    return e;
  }

  // Largest t with u - t e outside the interior, i.e. -min eigenvalue.
  double max_neg_eig(const Eigen::VectorXd& u) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cones_.size(); ++i) {
      const auto b = u.segment(starts_[i], cones_[i].dim);
      if (cones_[i].kind == Cone::Kind::Nonneg) {
        worst = std::max(worst, -b.minCoeff());
      } else {
        worst = std::max(worst, b.tail(b.size() - 1).norm() - b[0]);
      }
    }
    return worst;
  }

  Eigen::VectorXd jordan(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(rows_);
    for (std::size_t i = 0; i < cones_.size(); ++i) {
      const int r = starts_[i], d = cones_[i].dim;
      if (cones_[i].kind == Cone::Kind::Nonneg) {
        out.segment(r, d) = u.segment(r, d).cwiseProduct(v.segment(r, d));
      } else {
        out[r] = u.segment(r, d).dot(v.segment(r, d));
        out.segment(r + 1, d - 1) = u[r] * v.segment(r + 1, d - 1) + v[r] * u.segment(r + 1, d - 1);
      }
    }
    return out;
  }

  // Solves u o v = w for v.
  Eigen::VectorXd jordan_solve(const Eigen::VectorXd& u, const Eigen::VectorXd& w) const {
    Eigen::VectorXd v(rows_);
    for (std::size_t i = 0; i < cones_.size(); ++i) {
      const int r = starts_[i], d = cones_[i].dim;
      if (cones_[i].kind == Cone::Kind::Nonneg) {
        v.segment(r, d) = w.segment(r, d).cwiseQuotient(u.segment(r, d));
      } else {
        const double u0 = u[r];
        const auto u1 = u.segment(r + 1, d - 1);
        const double det = soc_det(u.segment(r, d));
        const double v0 = (u0 * w[r] - u1.dot(w.segment(r + 1, d - 1))) / det;
        v[r] = v0;
        v.segment(r + 1, d - 1) = (w.segment(r + 1, d - 1) - v0 * u1) / u0;
      }
    }
    return v;
  }

  // Largest step t <= cap keeping u + t du in the cone.
  double max_step(const Eigen::VectorXd& u, const Eigen::VectorXd& du, double cap) const {
    double t = cap;
    for (std::size_t i = 0; i < cones_.size(); ++i) {
      const int r = starts_[i], d = cones_[i].dim;
      if (cones_[i].kind == Cone::Kind::Nonneg) {
        for (int j = r; j < r + d; ++j) {
          if (du[j] < 0.0) t = std::min(t, -u[j] / du[j]);
        }
      } else {
        // First positive root of (u0 + t d0)^2 - |u1 + t d1|^2.
        const double a = soc_det(du.segment(r, d));
        const double b = u[r] * du[r] - u.segment(r + 1, d - 1).dot(du.segment(r + 1, d - 1));
        const double c = std::max(soc_det(u.segment(r, d)), 0.0);
        double root = std::numeric_limits<double>::infinity();
        const double disc = b * b - a * c;
        if (std::abs(a) < 1e-300) {
          if (b < 0.0) root = -c / (2.0 * b);
        } else if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          const double q = -(b + std::copysign(sq, b));
          for (double cand : {q / a, q != 0.0 ? c / q : std::numeric_limits<double>::infinity()}) {
            if (cand > 0.0) root = std::min(root, cand);
          }
        }
        t = std::min(t, root);
      }
    }
    return t;
  }

  std::vector<BlockScaling> scaling(const Eigen::VectorXd& s, const Eigen::VectorXd& z) const {
    std::vector<BlockScaling> out;
    for (std::size_t i = 0; i < cones_.size(); ++i) {
      const int r = starts_[i], d = cones_[i].dim;
      BlockScaling bs{cones_[i], r, {}, 1.0};
      if (cones_[i].kind == Cone::Kind::Nonneg) {
        bs.w = (s.segment(r, d).cwiseQuotient(z.segment(r, d))).cwiseSqrt();
      } else {
        const double sd = std::sqrt(std::max(soc_det(s.segment(r, d)), 1e-300));
        const double zd = std::sqrt(std::max(soc_det(z.segment(r, d)), 1e-300));
        const Eigen::VectorXd sb = s.segment(r, d) / sd;
        Eigen::VectorXd zb = z.segment(r, d) / zd;
        const double gamma = std::sqrt(std::max((1.0 + sb.dot(zb)) / 2.0, 1e-300));
        zb.tail(d - 1) = -zb.tail(d - 1);  // J zb
        bs.w = (sb + zb) / (2.0 * gamma);
        bs.eta = std::sqrt(sd / zd);
      }
      out.push_back(std::move(bs));
    }
    return out;
  }

  // W v, or W^-1 v when `inverse`.
  Eigen::VectorXd apply(const std::vector<BlockScaling>& W, const Eigen::VectorXd& v,
                        bool inverse) const {
    Eigen::VectorXd out(rows_);
    for (const BlockScaling& b : W) {
      const int r = b.row, d = b.cone.dim;
      if (b.cone.kind == Cone::Kind::Nonneg) {
        if (inverse) {
          out.segment(r, d) = v.segment(r, d).cwiseQuotient(b.w);
        } else {
          out.segment(r, d) = v.segment(r, d).cwiseProduct(b.w);
        }
      } else {
        const double w0 = b.w[0];
        const auto w1 = b.w.tail(d - 1);
        const double sgn = inverse ? -1.0 : 1.0;
        const double v0 = v[r];
        const auto v1 = v.segment(r + 1, d - 1);
        const double w1v1 = w1.dot(v1);
        const double scale = inverse ? 1.0 / b.eta : b.eta;
        out[r] = scale * (w0 * v0 + sgn * w1v1);
        out.segment(r + 1, d - 1) = scale * (v1 + (sgn * v0 + w1v1 / (1.0 + w0)) * w1);
      }
    }
    return out;
  }

 private:
  std::vector<Cone> cones_;
  std::vector<int> starts_;
  int rows_ = 0;
  int degree_ = 0;
};

// Ruiz scaling of a program: the scaled program has data E A D, E b, D c
// times a cost factor; second-order blocks share one row factor.
struct ScaledProgram {
  ConicProgram program;
  Eigen::VectorXd D;       // columns
  Eigen::VectorXd E_eq;    // equality rows
  Eigen::VectorXd E_cone;  // cone rows
  double c_scale = 1.0;
};

inline ScaledProgram ruiz_scale(const ConicProgram& prog, int passes) {
  ScaledProgram out;
  const int n = prog.num_variables();
  const int p = prog.num_equalities();
  const int m = prog.num_cone_rows();
  SpMat A = stack_rows(prog.A_eq, prog.G);
  Eigen::VectorXd D = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd E = Eigen::VectorXd::Ones(p + m);
  for (int pass = 0; pass < passes && p + m > 0 && n > 0; ++pass) {
    const Eigen::VectorXd cn = col_inf_norms(A);
    Eigen::VectorXd rn = row_inf_norms(A);
    int r = p;
    for (const Cone& k : prog.cones) {
      if (k.kind == Cone::Kind::SecondOrder) {
        rn.segment(r, k.dim).setConstant(rn.segment(r, k.dim).maxCoeff());
      }
      r += k.dim;
    }
    Eigen::VectorXd d(n), e(p + m);
    for (int j = 0; j < n; ++j) d[j] = scale_factor(cn[j]);
    for (int i = 0; i < p + m; ++i) e[i] = scale_factor(rn[i]);
    A = e.asDiagonal() * A * d.asDiagonal();
    D.array() *= d.array();
    E.array() *= e.array();
  }
  out.D = D;
  out.E_eq = E.head(p);
  out.E_cone = E.tail(m);
  Eigen::VectorXd c = D.cwiseProduct(prog.c);
  const double cn = inf_norm(c);
  out.c_scale = cn > 1e-12 ? 1.0 / cn : 1.0;
  out.program.c = c * out.c_scale;
  out.program.A_eq = out.E_eq.asDiagonal() * prog.A_eq * D.asDiagonal();
  out.program.b_eq = out.E_eq.cwiseProduct(prog.b_eq);
  out.program.G = out.E_cone.asDiagonal() * prog.G * D.asDiagonal();
  out.program.h = out.E_cone.cwiseProduct(prog.h);
  out.program.cones = prog.cones;
  return out;
}

}  // namespace detail

class InteriorPointSolver : public ConicSolver {
 public:
  explicit InteriorPointSolver(InteriorPointSettings settings = {}) : settings_(settings) {}

  // The warm start is ignored: central-path methods gain little from it.
  Solution solve(const ConicProgram& program, const Tolerances& tol = {},
                 const Candidate* warm_start = nullptr) const override;

 private:
  InteriorPointSettings settings_;
};

inline Solution InteriorPointSolver::solve(const ConicProgram& program, const Tolerances& tol,
                                           const Candidate*) const {
  using detail::inf_norm;
  using SpMat = Eigen::SparseMatrix<double>;
  using Trip = Eigen::Triplet<double>;
  program.validate();
  const int n = program.num_variables();
  const int p = program.num_equalities();
  const int m = program.num_cone_rows();
  const detail::ConeOps K(program.cones);
  const detail::ScaledProgram sp = detail::ruiz_scale(program, settings_.ruiz_passes);
  const SpMat& A = sp.program.A_eq;
  const SpMat& G = sp.program.G;
  const SpMat At = A.transpose();
  const SpMat Gt = G.transpose();
  const Eigen::VectorXd& c = sp.program.c;
  const Eigen::VectorXd& b = sp.program.b_eq;
  const Eigen::VectorXd& h = sp.program.h;
  // Scaled iterate to a candidate of the original program.
  auto unscale = [&](const Eigen::VectorXd& xs, const Eigen::VectorXd& ss,
                     const Eigen::VectorXd& ys, const Eigen::VectorXd& zs, double k) {
    Candidate cand;
    cand.x = sp.D.cwiseProduct(xs) * k;
    cand.s = ss.cwiseQuotient(sp.E_cone) * k;
    cand.y_eq = sp.E_eq.cwiseProduct(ys) * (k / sp.c_scale);
    cand.y_cone = sp.E_cone.cwiseProduct(zs) * (k / sp.c_scale);
    return cand;
  };
  double delta = settings_.regularization;
  const int dim = n + p + m;

  Solution out;
  out.x = Eigen::VectorXd::Zero(n);
  out.s = Eigen::VectorXd::Zero(m);
  out.y_eq = Eigen::VectorXd::Zero(p);
  out.y_cone = Eigen::VectorXd::Zero(m);
  if (m == 0 && p == 0) {
    // Unconstrained linear objective.
    out.status = inf_norm(c) == 0.0 ? SolveStatus::Optimal : SolveStatus::Unbounded;
    const Residuals r = residuals(program, out);
    out.primal_residual = r.primal;
    out.dual_residual = r.dual;
    out.gap = r.gap;
    out.objective = 0.0;
    return out;
  }

  // KKT matrix [dI A' G'; A -dI 0; G 0 -(W^2 + dI)] with a fixed pattern.
  auto kkt = [&](const std::vector<detail::BlockScaling>* W) {
    std::vector<Trip> t;
    t.reserve(dim + 2 * (A.nonZeros() + G.nonZeros()) + 8 * m);
    for (int j = 0; j < n; ++j) t.emplace_back(j, j, delta);
    for (int i = 0; i < p; ++i) t.emplace_back(n + i, n + i, -delta);
    for (int j = 0; j < A.outerSize(); ++j) {
      for (SpMat::InnerIterator it(A, j); it; ++it) {
        t.emplace_back(n + it.row(), j, it.value());
        t.emplace_back(j, n + it.row(), it.value());
      }
    }
    for (int j = 0; j < G.outerSize(); ++j) {
      for (SpMat::InnerIterator it(G, j); it; ++it) {
        t.emplace_back(n + p + it.row(), j, it.value());
        t.emplace_back(j, n + p + it.row(), it.value());
      }
    }
    for (std::size_t i = 0; i < program.cones.size(); ++i) {
      const Cone& cone = program.cones[i];
      const int r = n + p + K.start(i);
      if (cone.kind == Cone::Kind::Nonneg) {
        for (int j = 0; j < cone.dim; ++j) {
          const double w = W ? (*W)[i].w[j] : 1.0;
          t.emplace_back(r + j, r + j, -(w * w) - delta);
        }
      } else {
        // W^2 = eta^2 (2 wb wb' - J).
        for (int a = 0; a < cone.dim; ++a) {
          for (int bb = 0; bb < cone.dim; ++bb) {
            double v = a == bb ? 1.0 : 0.0;
            if (W) {
              const auto& bs = (*W)[i];
              const double j = a == bb ? (a == 0 ? 1.0 : -1.0) : 0.0;
              v = bs.eta * bs.eta * (2.0 * bs.w[a] * bs.w[bb] - j);
            }
            t.emplace_back(r + a, r + bb, -v - (a == bb ? delta : 0.0));
          }
        }
      }
    }
    SpMat M(dim, dim);
    M.setFromTriplets(t.begin(), t.end());
    return M;
  };

  Eigen::SimplicialLDLT<SpMat> fac;
  bool analyzed = false;
  std::vector<detail::BlockScaling> W;
  bool identity_scaling = true;

  auto factor = [&](const std::vector<detail::BlockScaling>* sc) {
    const SpMat M = kkt(sc);
    if (!analyzed) {
      fac.analyzePattern(M);
      analyzed = true;
    }
    fac.factorize(M);
    identity_scaling = sc == nullptr;
    return fac.info() == Eigen::Success;
  };

  // Unregularized KKT product, for iterative refinement.
  auto kkt_apply = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd r(dim);
    const auto vx = v.head(n);
    const Eigen::VectorXd vy = v.segment(n, p);
    const Eigen::VectorXd vz = v.tail(m);
    r.head(n) = At * vy + Gt * vz;
    r.segment(n, p) = A * vx;
    const Eigen::VectorXd w2 = identity_scaling ? vz : K.apply(W, K.apply(W, vz, false), false);
    r.tail(m) = G * vx - w2;
    return r;
  };
  // Cleared when refinement leaves a large residual; the factorization
  // then reported success on a matrix too close to singular.
  bool solve_accurate = true;
  auto kkt_solve = [&](const Eigen::VectorXd& rhs) {
    Eigen::VectorXd sol = fac.solve(rhs);
    const double scale = std::max(1.0, inf_norm(rhs));
    double err = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= settings_.refine_steps; ++k) {
      const Eigen::VectorXd res = rhs - kkt_apply(sol);
      err = inf_norm(res);
      if (err <= 1e-15 * scale || k == settings_.refine_steps) break;
      sol += fac.solve(res);
    }
    if (!(err <= 1e-6 * scale)) solve_accurate = false;
    return sol;
  };

  auto finish = [&](SolveStatus st, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& z, const Eigen::VectorXd& s, double tau, int iters) {
    const double inv = st == SolveStatus::Optimal || st == SolveStatus::IterLimit ? 1.0 / tau : 1.0;
    static_cast<Candidate&>(out) = unscale(x, s, y, z, inv);
    out.status = st;
    out.iterations = iters;
    const Residuals r = residuals(program, out);
    out.primal_residual = r.primal;
    out.dual_residual = r.dual;
    out.gap = r.gap;
    out.objective = program.c.dot(out.x);
    return out;
  };

  // Initial point from two least-squares solves.
  if (!factor(nullptr)) return finish(SolveStatus::IterLimit, out.x, out.y_eq, out.y_cone, out.s, 1.0, 0);
  Eigen::VectorXd x(n), y(p), z(m), s(m);
  {
    Eigen::VectorXd rhs(dim);
    rhs << Eigen::VectorXd::Zero(n), b, h;
    const Eigen::VectorXd sol = kkt_solve(rhs);
    x = sol.head(n);
    s = -sol.tail(m);
    rhs << -c, Eigen::VectorXd::Zero(p + m);
    const Eigen::VectorXd sol2 = kkt_solve(rhs);
    y = sol2.segment(n, p);
    z = sol2.tail(m);
  }
  const Eigen::VectorXd e = K.identity();
  if (m > 0) {
    const double ts = K.max_neg_eig(s);
    if (ts >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + ts) * e;
    const double tz = K.max_neg_eig(z);
    if (tz >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + tz) * e;
  }
  double tau = 1.0, kappa = 1.0, tau_peak = 1.0;
  const int nu = K.degree();
  const double eps_inf = settings_.eps_infeasible;
  struct Best {
    double score = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x, y, z, s;
    double tau = 1.0;
    int iter = 0;
  } best;

  for (int iter = 0; iter <= settings_.max_iter; ++iter) {
    // Residuals of the embedding.
    const Eigen::VectorXd r1 = At * y + Gt * z + c * tau;
    const Eigen::VectorXd r2 = -(A * x) + b * tau;
    const Eigen::VectorXd r3 = -(G * x) + h * tau - s;
    const double r4 = -c.dot(x) - b.dot(y) - h.dot(z) - kappa;
    const double mu = (s.dot(z) + tau * kappa) / (nu + 1);

    // An iterate is only read as a solution while tau dominates and has not
    // collapsed. Otherwise x / tau grows without bound and its relative
    // residuals shrink with it.
    tau_peak = std::max(tau_peak, tau);
    if (tau > kappa && tau >= 1e-6 * tau_peak) {
      const Candidate cand = unscale(x, s, y, z, 1.0 / tau);
      const Residuals rr = residuals(program, cand);
      out.primal_residual = rr.primal;
      out.dual_residual = rr.dual;
      out.gap = rr.gap;
      if (rr.primal <= tol.eps_primal && rr.dual <= tol.eps_dual && rr.gap <= tol.eps_gap) {
        return finish(SolveStatus::Optimal, x, y, z, s, tau, iter);
      }
      const double score =
          std::max({rr.primal / tol.eps_primal * settings_.stall_factor / settings_.stall_primal_factor,
                    rr.dual / tol.eps_dual, rr.gap / tol.eps_gap});
      if (score < best.score) best = {score, x, y, z, s, tau, iter};
    }
    // Certificates, checked on the original data.
    if (tau < kappa) {
      const Candidate ray = unscale(x, s, y, z, 1.0);
      const double hz_by = program.h.dot(ray.y_cone) + program.b_eq.dot(ray.y_eq);
      if (hz_by < 0.0) {
        const Eigen::VectorXd dual_ray = program.A_eq.transpose() * ray.y_eq +
                                         program.G.transpose() * ray.y_cone;
        if (inf_norm(dual_ray) <= eps_inf * (-hz_by) * std::max(1.0, inf_norm(program.c))) {
          const double k = -1.0 / hz_by;
          return finish(SolveStatus::Infeasible, x * k, y * k, z * k, s * k, 1.0, iter);
        }
      }
      const double cx = program.c.dot(ray.x);
      if (cx < 0.0) {
        if (inf_norm(program.A_eq * ray.x) <= eps_inf * (-cx) * std::max(1.0, inf_norm(program.b_eq)) &&
            inf_norm(program.G * ray.x + ray.s) <= eps_inf * (-cx) * std::max(1.0, inf_norm(program.h))) {
          const double k = -1.0 / cx;
          return finish(SolveStatus::Unbounded, x * k, y * k, z * k, s * k, 1.0, iter);
        }
      }
    }
    if (iter == settings_.max_iter) break;
    // Both tau and kappa vanishing: the embedding is degenerate and no
    // certificate will follow.
    if (tau < 1e-12 * tau_peak && kappa < 1e-12 * tau_peak) break;

    W = K.scaling(s, z);
    const Eigen::VectorXd lambda = K.apply(W, z, false);
    struct Dir {
      Eigen::VectorXd dx, dy, dz, ds;
      double dtau = 0.0, dkappa = 0.0;
    };
    Eigen::VectorXd d1;
    double den_base = 0.0;
    auto direction = [&](double sigma, const Eigen::VectorXd& xi, double xi_tau) {
      const double f = 1.0 - sigma;
      const Eigen::VectorXd lxi = K.jordan_solve(lambda, xi);
      const Eigen::VectorXd Wlxi = K.apply(W, lxi, false);
      Eigen::VectorXd r(dim);
      r << -f * r1, f * r2, f * r3 - Wlxi;
      const Eigen::VectorXd d2 = kkt_solve(r);
      const double num = -f * r4 + c.dot(d2.head(n)) + b.dot(d2.segment(n, p)) +
                         h.dot(d2.tail(m)) + xi_tau / tau;
      const double dtau = num / (den_base + kappa / tau);
      Dir d;
      d.dtau = dtau;
      d.dx = d2.head(n) + dtau * d1.head(n);
      d.dy = d2.segment(n, p) + dtau * d1.segment(n, p);
      d.dz = d2.tail(m) + dtau * d1.tail(m);
      // ds = W (lambda \ xi - W dz)
      d.ds = K.apply(W, lxi - K.apply(W, d.dz, false), false);
      d.dkappa = (xi_tau - kappa * dtau) / tau;
      return d;
    };
    auto step_length = [&](const Dir& d, double cap) {
      double t = cap;
      t = std::min(t, K.max_step(s, d.ds, t));
      t = std::min(t, K.max_step(z, d.dz, t));
      if (d.dtau < 0.0) t = std::min(t, -tau / d.dtau);
      if (d.dkappa < 0.0) t = std::min(t, -kappa / d.dkappa);
      return t;
    };

    // Near the end the scaling is extreme; retry with heavier
    // regularization while the factorization fails or is inaccurate.
    Dir d;
    double a_aff = 0.0, alpha = 0.0;
    bool usable = false;
    delta = settings_.regularization;
    for (int attempt = 0; attempt < 4; ++attempt, delta *= 100.0) {
      if (!factor(&W)) continue;
      usable = true;
      solve_accurate = true;
      Eigen::VectorXd rhs(dim);
      rhs << -c, b, h;
      d1 = kkt_solve(rhs);
      den_base = -c.dot(d1.head(n)) - b.dot(d1.segment(n, p)) - h.dot(d1.tail(m));
      // Predictor.
      const Dir aff = direction(0.0, -K.jordan(lambda, lambda), -tau * kappa);
      a_aff = step_length(aff, 1.0);
      const double sigma = std::clamp(std::pow(1.0 - a_aff, 3), 0.0, 1.0);
      // Corrector with the second-order term.
      const Eigen::VectorXd cross =
          K.jordan(K.apply(W, aff.ds, true), K.apply(W, aff.dz, false));
      d = direction(sigma, -K.jordan(lambda, lambda) + sigma * mu * e - cross,
                    -tau * kappa + sigma * mu - aff.dtau * aff.dkappa);
      const double a = settings_.step_fraction * step_length(d, 1.0 / settings_.step_fraction);
      alpha = std::min(a, 1.0);
      if (solve_accurate) break;
    }
    if (!usable) break;
    if (!(alpha > 1e-12)) {
      out.iterations = iter;
      break;
    }
    x += alpha * d.dx;
    y += alpha * d.dy;
    z += alpha * d.dz;
    s += alpha * d.ds;
    tau += alpha * d.dtau;
    kappa += alpha * d.dkappa;
    out.iterations = iter + 1;
  }
  if (best.score <= settings_.stall_factor) {
    Solution r = finish(SolveStatus::Optimal, best.x, best.y, best.z, best.s, best.tau, best.iter);
    r.iterations = out.iterations;
    return r;
  }
  return finish(SolveStatus::IterLimit, x, y, z, s, tau, out.iterations);
}

}  // namespace ciao

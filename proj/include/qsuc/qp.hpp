#ifndef QSUC_QP_HPP
#define QSUC_QP_HPP

// Dense operator-splitting solver for
//
//   minimize   1/2 x'Px + q'x
//   subject to l <= Ax <= u
//
// in the alternating-direction form popularized by OSQP: Ruiz equilibration,
// over-relaxed ADMM on (x, z = Ax), per-row step sizes (stiffer on equality
// rows), residual-balancing step updates, and a final active-set polish that
// recovers multipliers to near machine precision.
//
// Multiplier sign convention: Px + q + A'y = 0, y_i > 0 when the upper bound
// of row i is active, y_i < 0 when the lower bound is.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qsuc/errors.hpp"

namespace qsuc::qp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Problem {
  Eigen::MatrixXd P;  // symmetric positive semidefinite, n x n
  Eigen::VectorXd q;
  Eigen::MatrixXd A;  // m x n
  Eigen::VectorXd l, u;

  Eigen::Index num_vars() const { return q.size(); }
  Eigen::Index num_rows() const { return A.rows(); }
};

struct Settings {
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  std::size_t max_iter = 50000;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  std::size_t scaling_iters = 15;
  std::size_t check_every = 10;
  std::size_t adapt_every = 50;
  bool polish = true;
};

enum class Status { Solved, MaxIterations };

struct Solution {
  Eigen::VectorXd x, y;
  Status status = Status::MaxIterations;
  std::size_t iterations = 0;
  double objective = 0.0;
  double prim_res = kInf;   // ||Ax - proj(Ax)||_inf
  double dual_res = kInf;   // ||Px + q + A'y||_inf
  double compl_res = kInf;  // max_i |y_i| * distance of row i to its active bound
  bool polished = false;
};

/// Unscaled KKT residuals of a candidate (x, y).
struct Residuals {
  double prim, dual, compl_gap, sign;  // sign: worst multiplier of the wrong sign
  double prim_scale, dual_scale;
};

inline Residuals kkt_residuals(const Problem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::VectorXd Ax = p.A * x;
  const Eigen::VectorXd Px = p.P * x;
  const Eigen::VectorXd Aty = p.A.transpose() * y;
  Residuals r{};
  r.prim = 0.0;
  r.compl_gap = 0.0;
  r.sign = 0.0;
  for (Eigen::Index i = 0; i < Ax.size(); ++i) {
    const double proj = std::clamp(Ax[i], p.l[i], p.u[i]);
    r.prim = std::max(r.prim, std::abs(Ax[i] - proj));
    // A multiplier pushing against a missing bound is a sign error, not a
    // complementarity gap.
    if (y[i] > 0.0) {
      if (std::isfinite(p.u[i]))
        r.compl_gap = std::max(r.compl_gap, y[i] * std::abs(p.u[i] - Ax[i]));
      else
        r.sign = std::max(r.sign, y[i]);
    } else if (y[i] < 0.0) {
      if (std::isfinite(p.l[i]))
        r.compl_gap = std::max(r.compl_gap, -y[i] * std::abs(Ax[i] - p.l[i]));
      else
        r.sign = std::max(r.sign, -y[i]);
    }
  }
  r.dual = (Px + p.q + Aty).lpNorm<Eigen::Infinity>();
  r.prim_scale = Ax.size() ? Ax.lpNorm<Eigen::Infinity>() : 0.0;
  r.dual_scale = std::max({Px.size() ? Px.lpNorm<Eigen::Infinity>() : 0.0,
                           Aty.size() ? Aty.lpNorm<Eigen::Infinity>() : 0.0,
                           p.q.size() ? p.q.lpNorm<Eigen::Infinity>() : 0.0});
  return r;
}

namespace detail {

struct Scaling {
  Eigen::VectorXd D, E;  // variable and row scalings
  double c = 1.0;        // cost scaling
};

/// Modified Ruiz equilibration of [P A'; A 0] plus cost normalization.
inline Scaling equilibrate(Problem& p, std::size_t iters) {
  const Eigen::Index n = p.num_vars(), m = p.num_rows();
  Scaling s{Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(m), 1.0};
  auto safe = [](double v) { return v < 1e-4 ? 1.0 : std::min(v, 1e4); };
  for (std::size_t k = 0; k < iters; ++k) {
    Eigen::VectorXd dD(n), dE(m);
    for (Eigen::Index j = 0; j < n; ++j) {
      double nrm = p.P.col(j).lpNorm<Eigen::Infinity>();
      if (m) nrm = std::max(nrm, p.A.col(j).lpNorm<Eigen::Infinity>());
      dD[j] = 1.0 / std::sqrt(safe(nrm));
    }
    for (Eigen::Index i = 0; i < m; ++i) dE[i] = 1.0 / std::sqrt(safe(p.A.row(i).lpNorm<Eigen::Infinity>()));
    p.P = dD.asDiagonal() * p.P * dD.asDiagonal();
    p.q = dD.asDiagonal() * p.q;
    p.A = dE.asDiagonal() * p.A * dD.asDiagonal();
    s.D = s.D.cwiseProduct(dD);
    s.E = s.E.cwiseProduct(dE);
  }
  double pcol = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) pcol += p.P.col(j).lpNorm<Eigen::Infinity>();
  pcol = n ? pcol / static_cast<double>(n) : 0.0;
  const double qn = n ? p.q.lpNorm<Eigen::Infinity>() : 0.0;
  s.c = 1.0 / safe(std::max(pcol, qn));
  p.P *= s.c;
  p.q *= s.c;
  for (Eigen::Index i = 0; i < m; ++i) {
    p.l[i] = std::isfinite(p.l[i]) ? p.l[i] * s.E[i] : p.l[i];
    p.u[i] = std::isfinite(p.u[i]) ? p.u[i] * s.E[i] : p.u[i];
  }
  return s;
}

/// Solves the equality-constrained QP on a guessed active set with
/// regularized KKT + iterative refinement. Returns nullopt on failure.
inline std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> polish(const Problem& p,
                                                                        const std::vector<int>& active) {
  const Eigen::Index n = p.num_vars();
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < p.num_rows(); ++i)
    if (active[i] != 0) rows.push_back(i);
  const Eigen::Index k = static_cast<Eigen::Index>(rows.size());

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
  Eigen::VectorXd rhs(n + k);
  K.topLeftCorner(n, n) = p.P;
  rhs.head(n) = -p.q;
  for (Eigen::Index r = 0; r < k; ++r) {
    const Eigen::Index i = rows[r];
    K.block(n + r, 0, 1, n) = p.A.row(i);
    K.block(0, n + r, n, 1) = p.A.row(i).transpose();
    rhs[n + r] = active[i] < 0 ? p.l[i] : p.u[i];
  }
  constexpr double reg = 1e-9;
  Eigen::MatrixXd Kreg = K;
  Kreg.topLeftCorner(n, n).diagonal().array() += reg;
  if (k) Kreg.bottomRightCorner(k, k).diagonal().array() -= reg;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(Kreg);
  Eigen::VectorXd sol = lu.solve(rhs);
  for (int it = 0; it < 10; ++it) sol += lu.solve(rhs - K * sol);
  if (!sol.allFinite()) return std::nullopt;

  Eigen::VectorXd y = Eigen::VectorXd::Zero(p.num_rows());
  for (Eigen::Index r = 0; r < k; ++r) y[rows[r]] = sol[n + r];
  return std::make_pair(Eigen::VectorXd(sol.head(n)), y);
}

}  // namespace detail

inline double objective(const Problem& p, const Eigen::VectorXd& x) { return 0.5 * x.dot(p.P * x) + p.q.dot(x); }

inline Solution solve(const Problem& original, const Settings& set = {}) {
  const Eigen::Index n = original.num_vars(), m = original.num_rows();
  if (original.P.rows() != n || original.P.cols() != n || original.A.cols() != n || original.l.size() != m ||
      original.u.size() != m)
    throw InvalidArgument("QP dimensions are inconsistent");
  for (Eigen::Index i = 0; i < m; ++i)
    if (original.l[i] > original.u[i]) throw InvalidArgument("QP row has l > u");

  Problem p = original;
  const detail::Scaling sc = detail::equilibrate(p, set.scaling_iters);

  std::vector<char> is_eq(m);
  for (Eigen::Index i = 0; i < m; ++i) is_eq[i] = p.l[i] == p.u[i];
  double rho = set.rho;
  Eigen::VectorXd rho_vec(m);
  auto fill_rho = [&] {
    for (Eigen::Index i = 0; i < m; ++i) rho_vec[i] = is_eq[i] ? 1e3 * rho : rho;
  };
  fill_rho();

  Eigen::LLT<Eigen::MatrixXd> kkt;
  auto factor = [&] {
    Eigen::MatrixXd M = p.P + p.A.transpose() * rho_vec.asDiagonal() * p.A;
    M.diagonal().array() += set.sigma;
    kkt.compute(M);
    if (kkt.info() != Eigen::Success) throw NumericalError("QP reduced KKT factorization failed");
  };
  factor();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), z = Eigen::VectorXd::Zero(m), y = Eigen::VectorXd::Zero(m);
  Solution out;

  auto unscaled = [&](const Eigen::VectorXd& xs, const Eigen::VectorXd& ys) {
    return std::make_pair(Eigen::VectorXd(sc.D.cwiseProduct(xs)), Eigen::VectorXd(sc.E.cwiseProduct(ys) / sc.c));
  };
  auto converged = [&](const Residuals& r) {
    return r.prim <= set.eps_abs + set.eps_rel * r.prim_scale && r.dual <= set.eps_abs + set.eps_rel * r.dual_scale;
  };

  std::size_t it = 0;
  bool done = false;
  for (it = 1; it <= set.max_iter; ++it) {
    const Eigen::VectorXd rhs = set.sigma * x - p.q + p.A.transpose() * (rho_vec.cwiseProduct(z) - y);
    const Eigen::VectorXd xt = kkt.solve(rhs);
    const Eigen::VectorXd zt = p.A * xt;
    x = set.alpha * xt + (1.0 - set.alpha) * x;
    const Eigen::VectorXd zr = set.alpha * zt + (1.0 - set.alpha) * z;
    Eigen::VectorXd zn = zr + y.cwiseQuotient(rho_vec);
    for (Eigen::Index i = 0; i < m; ++i) zn[i] = std::clamp(zn[i], p.l[i], p.u[i]);
    y += rho_vec.cwiseProduct(zr - zn);
    z = zn;

    if (it % set.check_every == 0 || it == set.max_iter) {
      const auto [xu, yu] = unscaled(x, y);
      const Residuals r = kkt_residuals(original, xu, yu);
      if (converged(r)) {
        done = true;
        break;
      }
      if (it % set.adapt_every == 0) {
        // Balance normalized primal and dual residuals in the scaled space.
        const Eigen::VectorXd Ax = p.A * x;
        const double pn = m ? (Ax - z).lpNorm<Eigen::Infinity>() /
                                  std::max({Ax.lpNorm<Eigen::Infinity>(), z.lpNorm<Eigen::Infinity>(), 1e-10})
                            : 0.0;
        const Eigen::VectorXd Px = p.P * x, Aty = p.A.transpose() * y;
        const double dn = (Px + p.q + Aty).lpNorm<Eigen::Infinity>() /
                          std::max({Px.lpNorm<Eigen::Infinity>(), Aty.lpNorm<Eigen::Infinity>(),
                                    p.q.lpNorm<Eigen::Infinity>(), 1e-10});
        const double ratio = std::sqrt(pn / std::max(dn, 1e-10));
        const double new_rho = std::clamp(rho * ratio, 1e-6, 1e6);
        if (new_rho > 5.0 * rho || new_rho < 0.2 * rho) {
          rho = new_rho;
          fill_rho();
          factor();
        }
      }
    }
  }
  out.iterations = std::min(it, set.max_iter);

  auto [xu, yu] = unscaled(x, y);
  Residuals best = kkt_residuals(original, xu, yu);
  out.status = done ? Status::Solved : Status::MaxIterations;

  if (set.polish) {
    // Active-set guess from the scaled iterate, then a few exchange rounds:
    // rows whose multiplier has the wrong sign leave the set, violated rows
    // join it. Degenerate bounds (p_min u <= p <= p_max u at u = 0) need this.
    std::vector<int> active(m, 0);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (is_eq[i])
        active[i] = 1;
      else if (z[i] - p.l[i] < -y[i])
        active[i] = -1;
      else if (p.u[i] - z[i] < y[i])
        active[i] = 1;
    }
    for (int round = 0; round < 10; ++round) {
      const auto pol = detail::polish(original, active);
      if (!pol) break;
      const Residuals r = kkt_residuals(original, pol->first, pol->second);
      const Eigen::VectorXd Ax = original.A * pol->first;
      bool changed = false;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (is_eq[i]) continue;
        const double ytol = 1e-9 * (1.0 + std::abs(pol->second[i]));
        const double xtol = 1e-9 * (1.0 + std::abs(Ax[i]));
        if ((active[i] < 0 && pol->second[i] > ytol) || (active[i] > 0 && pol->second[i] < -ytol)) {
          active[i] = 0;
          changed = true;
        } else if (active[i] == 0 && Ax[i] < original.l[i] - xtol) {
          active[i] = -1;
          changed = true;
        } else if (active[i] == 0 && Ax[i] > original.u[i] + xtol) {
          active[i] = 1;
          changed = true;
        }
      }
      if (changed) continue;
      const double scale = 1.0 + r.dual_scale;
      if (r.sign == 0.0 && converged(r) && r.prim <= 1e-9 * (1.0 + r.prim_scale) && r.dual <= 1e-9 * scale) {
        xu = pol->first;
        yu = pol->second;
        best = r;
        out.polished = true;
        out.status = Status::Solved;
      }
      break;
    }
  }

  out.x = std::move(xu);
  out.y = std::move(yu);
  out.prim_res = best.prim;
  out.dual_res = best.dual;
  out.compl_res = best.compl_gap;
  out.objective = objective(original, out.x);
  return out;
}

}  // namespace qsuc::qp

#endif  // QSUC_QP_HPP

#ifndef QSUC_SUBQP_HPP
#define QSUC_SUBQP_HPP

// Per-scenario economic dispatch at a fixed commitment. The commitment enters
// through copy variables u_fixed pinned by equality rows, so the multipliers
// of those rows are the cut slopes theta.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "qsuc/errors.hpp"
#include "qsuc/model.hpp"
#include "qsuc/qp.hpp"
#include "qsuc/scenarios.hpp"

namespace qsuc {

/// Variable layout: p[g,t] (NT) | shed[t] (T) | u_fixed[g,t] (NT) | spill[t] (T, guarded only).
/// Row layout: copy (NT) | p >= p_min u (NT) | p <= p_max u (NT) | ramp (N(T-1)) | balance (T) |
/// shed >= 0 (T) | spill >= 0 (T, guarded only).
struct DispatchProblem {
  std::size_t generators = 0;
  std::size_t periods = 0;
  double probability = 1.0;
  std::vector<double> commitment;  // u targets, generator-major; binary except in relaxed re-solves
  bool guarded = false;            // over-generation slack added because min generation exceeds net load
  qp::Problem qp;

  std::size_t nt() const { return generators * periods; }
  Eigen::Index p_col(std::size_t g, std::size_t t) const { return static_cast<Eigen::Index>(g * periods + t); }
  Eigen::Index shed_col(std::size_t t) const { return static_cast<Eigen::Index>(nt() + t); }
  Eigen::Index ufix_col(std::size_t k) const { return static_cast<Eigen::Index>(nt() + periods + k); }
  Eigen::Index spill_col(std::size_t t) const { return static_cast<Eigen::Index>(2 * nt() + periods + t); }
  Eigen::Index copy_row(std::size_t k) const { return static_cast<Eigen::Index>(k); }
  Eigen::Index balance_row(std::size_t t) const {
    return static_cast<Eigen::Index>(3 * nt() + generators * (periods - 1) + t);
  }
  std::size_t num_vars() const { return static_cast<std::size_t>(qp.num_vars()); }
  std::size_t num_rows() const { return static_cast<std::size_t>(qp.num_rows()); }
};

enum class DispatchStatus { Optimal, InfeasibleGuarded };

struct DispatchSolution {
  std::vector<double> p_gen;   // generator-major
  std::vector<double> p_shed;  // per period
  std::vector<double> p_spill;  // per period; all zero unless guarded
  double objective = 0.0;      // probability-weighted
  std::vector<double> duals;   // theta per (g,t), d objective / d u
  DispatchStatus status = DispatchStatus::Optimal;
  double prim_res = 0.0, dual_res = 0.0, compl_res = 0.0;
  std::size_t iterations = 0;
};

/// Whether u * p_min dispatch plus wind already overshoots some period's load.
inline bool needs_overgeneration_guard(const SucInstance& inst, const Scenario& s, std::span<const double> u) {
  for (std::size_t t = 0; t < inst.horizon; ++t) {
    double floor = s.wind[t];
    for (std::size_t g = 0; g < inst.generators.size(); ++g)
      floor += u[commitment_index(inst, g, t)] * inst.generators[g].p_min;
    if (floor > s.load[t] + 1e-9) return true;
  }
  return false;
}

inline DispatchProblem build_subproblem(const SucInstance& inst, const Scenario& s, std::span<const double> u) {
  const std::size_t N = inst.generators.size(), T = inst.horizon, NT = N * T;
  if (u.size() != NT) throw InvalidArgument("commitment has " + std::to_string(u.size()) + " entries, expected " +
                                            std::to_string(NT));
  if (s.wind.size() != T || s.load.size() != T) throw InvalidArgument("scenario length does not match horizon");

  DispatchProblem d;
  d.generators = N;
  d.periods = T;
  d.probability = s.probability;
  d.commitment.assign(u.begin(), u.end());
  d.guarded = needs_overgeneration_guard(inst, s, u);

  const std::size_t spill = d.guarded ? T : 0;
  const auto n = static_cast<Eigen::Index>(2 * NT + T + spill);
  const auto m = static_cast<Eigen::Index>(3 * NT + N * (T - 1) + 2 * T + spill);
  auto& qp = d.qp;
  qp.P = Eigen::MatrixXd::Zero(n, n);
  qp.q = Eigen::VectorXd::Zero(n);
  qp.A = Eigen::MatrixXd::Zero(m, n);
  qp.l = Eigen::VectorXd::Constant(m, -qp::kInf);
  qp.u = Eigen::VectorXd::Constant(m, qp::kInf);

  const double pi = s.probability;
  for (std::size_t g = 0; g < N; ++g) {
    const Generator& gen = inst.generators[g];
    for (std::size_t t = 0; t < T; ++t) {
      const auto c = d.p_col(g, t);
      qp.P(c, c) = 2.0 * pi * gen.c_quad;
      qp.q[c] = pi * gen.c_prim;
    }
  }
  for (std::size_t t = 0; t < T; ++t) qp.q[d.shed_col(t)] = pi * inst.shed_cost;
  for (std::size_t t = 0; t < spill; ++t) qp.q[d.spill_col(t)] = pi * inst.shed_cost;

  Eigen::Index row = 0;
  for (std::size_t k = 0; k < NT; ++k, ++row) {
    qp.A(row, d.ufix_col(k)) = 1.0;
    qp.l[row] = qp.u[row] = u[k];
  }
  for (std::size_t g = 0; g < N; ++g)
    for (std::size_t t = 0; t < T; ++t, ++row) {
      qp.A(row, d.p_col(g, t)) = 1.0;
      qp.A(row, d.ufix_col(g * T + t)) = -inst.generators[g].p_min;
      qp.l[row] = 0.0;
    }
  for (std::size_t g = 0; g < N; ++g)
    for (std::size_t t = 0; t < T; ++t, ++row) {
      qp.A(row, d.p_col(g, t)) = 1.0;
      qp.A(row, d.ufix_col(g * T + t)) = -inst.generators[g].p_max;
      qp.u[row] = 0.0;
    }
  for (std::size_t g = 0; g < N; ++g)
    for (std::size_t t = 0; t + 1 < T; ++t, ++row) {
      qp.A(row, d.p_col(g, t + 1)) = 1.0;
      qp.A(row, d.p_col(g, t)) = -1.0;
      qp.l[row] = inst.generators[g].ramp_down;
      qp.u[row] = inst.generators[g].ramp_up;
    }
  for (std::size_t t = 0; t < T; ++t, ++row) {
    for (std::size_t g = 0; g < N; ++g) qp.A(row, d.p_col(g, t)) = 1.0;
    qp.A(row, d.shed_col(t)) = 1.0;
    if (spill) qp.A(row, d.spill_col(t)) = -1.0;
    qp.l[row] = qp.u[row] = s.load[t] - s.wind[t];
  }
  for (std::size_t t = 0; t < T; ++t, ++row) {
    qp.A(row, d.shed_col(t)) = 1.0;
    qp.l[row] = 0.0;
  }
  for (std::size_t t = 0; t < spill; ++t, ++row) {
    qp.A(row, d.spill_col(t)) = 1.0;
    qp.l[row] = 0.0;
  }
  return d;
}

inline DispatchProblem build_subproblem(const SucInstance& inst, const Scenario& s, std::span<const std::uint8_t> u) {
  std::vector<double> ud(u.begin(), u.end());
  return build_subproblem(inst, s, std::span<const double>(ud));
}

/// KKT-optimal dispatch to `tol` (absolute + relative), else NumericalError.
inline DispatchSolution solve_dispatch(const DispatchProblem& d, double tol = 1e-6, std::size_t max_iter = 50000) {
  qp::Settings set;
  set.eps_abs = tol;
  set.eps_rel = tol;
  set.max_iter = max_iter;
  const qp::Solution sol = qp::solve(d.qp, set);

  const qp::Residuals r = qp::kkt_residuals(d.qp, sol.x, sol.y);
  const double obj_scale = 1.0 + std::abs(sol.objective);
  const double y_scale = 1.0 + sol.y.lpNorm<Eigen::Infinity>();
  if (sol.status != qp::Status::Solved || r.compl_gap > tol * obj_scale || r.sign > tol * y_scale)
    throw NumericalError("dispatch QP missed tolerance after " + std::to_string(sol.iterations) +
                         " iterations (primal " + std::to_string(r.prim) + ", dual " + std::to_string(r.dual) +
                         ", complementarity " + std::to_string(r.compl_gap) +
                         ", sign " + std::to_string(r.sign) + ")");

  DispatchSolution out;
  const std::size_t N = d.generators, T = d.periods;
  out.p_gen.resize(N * T);
  out.duals.resize(N * T);
  out.p_shed.resize(T);
  out.p_spill.assign(T, 0.0);
  for (std::size_t g = 0; g < N; ++g)
    for (std::size_t t = 0; t < T; ++t) out.p_gen[g * T + t] = sol.x[d.p_col(g, t)];
  for (std::size_t t = 0; t < T; ++t) out.p_shed[t] = sol.x[d.shed_col(t)];
  if (d.guarded)
    for (std::size_t t = 0; t < T; ++t) out.p_spill[t] = sol.x[d.spill_col(t)];
  // Optimal value sensitivity to the right-hand side of u_fixed = u is -y.
  for (std::size_t k = 0; k < N * T; ++k) out.duals[k] = -sol.y[d.copy_row(k)];
  out.objective = sol.objective;
  out.status = d.guarded ? DispatchStatus::InfeasibleGuarded : DispatchStatus::Optimal;
  out.prim_res = r.prim;
  out.dual_res = r.dual;
  out.compl_res = r.compl_gap;
  out.iterations = sol.iterations;
  return out;
}

/// Runs fn(i) for i in [0, count) on up to hardware_concurrency threads.
/// Results must be written to slot i so the output order is fixed.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  pool.clear();
  if (error) std::rethrow_exception(error);
}

/// One dispatch per scenario, merged in scenario order.
inline std::vector<DispatchSolution> solve_all_dispatch(const SucInstance& inst, const ScenarioSet& set,
                                                        std::span<const std::uint8_t> u, double tol = 1e-6) {
  std::vector<DispatchSolution> out(set.scenarios.size());
  parallel_for(out.size(), [&](std::size_t h) { out[h] = solve_dispatch(build_subproblem(inst, set.scenarios[h], u), tol); });
  return out;
}

inline double commitment_cost(const SucInstance& inst, std::span<const std::uint8_t> u) {
  double c = 0.0;
  for (std::size_t g = 0; g < inst.generators.size(); ++g)
    for (std::size_t t = 0; t < inst.horizon; ++t)
      if (u[commitment_index(inst, g, t)]) c += inst.generators[g].c_cons;
  return c;
}

/// sum of (already probability-weighted) scenario costs + commitment cost.
inline double aggregate_ub(std::span<const DispatchSolution> solutions, double commitment) {
  double ub = commitment;
  for (std::size_t h = 0; h < solutions.size(); ++h) {
    if (solutions[h].status != DispatchStatus::Optimal)
      throw InvalidArgument("scenario " + std::to_string(h) + " dispatch is not optimal; upper bound undefined");
    ub += solutions[h].objective;
  }
  return ub;
}

}  // namespace qsuc

#endif  // QSUC_SUBQP_HPP

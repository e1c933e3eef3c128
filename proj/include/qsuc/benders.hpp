#ifndef QSUC_BENDERS_HPP
#define QSUC_BENDERS_HPP

// Hybrid Benders loop. The master chooses commitments u and an encoded bound
// Upsilon on the expected dispatch cost; scenario dispatch QPs at the chosen u
// give an upper bound and one aggregated optimality cut per iteration.

#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qsuc/admm.hpp"
#include "qsuc/errors.hpp"
#include "qsuc/model.hpp"
#include "qsuc/phr.hpp"
#include "qsuc/qubo.hpp"
#include "qsuc/samplers.hpp"
#include "qsuc/scenarios.hpp"
#include "qsuc/subqp.hpp"

namespace qsuc {

/// Upsilon >= constant + theta . u
struct BendersCut {
  double constant = 0.0;
  std::vector<double> theta;  // generator-major, N*T
  std::size_t source_iter = 0;
  Bits source_u;
  double second_stage = 0.0;  // expected dispatch cost at source_u

  double value_at(std::span<const std::uint8_t> u) const {
    double v = constant;
    for (std::size_t k = 0; k < theta.size(); ++k)
      if (u[k]) v += theta[k];
    return v;
  }
};

/// Aggregated cut from the scenario solutions at commitment u_l.
inline BendersCut build_cut(std::span<const DispatchSolution> solutions, std::span<const std::uint8_t> u_l,
                            std::size_t source_iter = 0) {
  if (solutions.empty()) throw InvalidArgument("a cut needs at least one scenario solution");
  BendersCut cut;
  cut.theta.assign(u_l.size(), 0.0);
  cut.source_iter = source_iter;
  cut.source_u.assign(u_l.begin(), u_l.end());
  for (std::size_t h = 0; h < solutions.size(); ++h) {
    const DispatchSolution& s = solutions[h];
    if (s.duals.size() != u_l.size())
      throw InvalidArgument("scenario " + std::to_string(h) + " duals do not match the commitment size");
    if (!std::isfinite(s.objective)) throw InvalidArgument("scenario " + std::to_string(h) + " has no finite optimum");
    cut.second_stage += s.objective;
    for (std::size_t k = 0; k < u_l.size(); ++k) {
      if (!std::isfinite(s.duals[k])) throw InvalidArgument("scenario " + std::to_string(h) + " has a non-finite dual");
      cut.theta[k] += s.duals[k];
    }
  }
  cut.constant = cut.second_stage;
  for (std::size_t k = 0; k < u_l.size(); ++k)
    if (u_l[k]) cut.constant -= cut.theta[k];
  return cut;
}

/// theta . u - chi sum 2^j b_j + constant <= 0 over the master layout.
inline LinearConstraint cut_to_constraint(const BendersCut& cut, const BinaryEncoding& enc) {
  std::vector<std::pair<std::size_t, double>> coeffs;
  for (std::size_t k = 0; k < cut.theta.size(); ++k)
    if (cut.theta[k] != 0.0) coeffs.emplace_back(k, cut.theta[k]);
  const auto w = encoding_terms(enc);
  for (std::size_t j = 0; j < enc.levels; ++j) coeffs.emplace_back(enc.base_index + j, -w[j]);
  return LinearConstraint(std::move(coeffs), cut.constant);
}

struct MasterProblem {
  Qubo objective;
  std::vector<LinearConstraint> constraints;
  BinaryEncoding encoding;  // base_index = N*T
};

inline MasterProblem build_master(const SucInstance& inst, BinaryEncoding enc, std::span<const BendersCut> cuts) {
  enc.validate();
  const std::size_t NT = num_commitment_vars(inst);
  enc.base_index = NT;
  const double top = enc.max_value();
  auto range_error = [&](const std::string& what, double v) {
    throw RangeError(what + " " + std::to_string(v) + " exceeds the encodable bound " + std::to_string(top) +
                     "; increase chi or the number of bound bits");
  };

  MasterProblem m{Qubo(NT + enc.levels), {}, enc};
  for (std::size_t g = 0; g < inst.generators.size(); ++g)
    for (std::size_t t = 0; t < inst.horizon; ++t)
      m.objective.add_linear(commitment_index(inst, g, t), inst.generators[g].c_cons);
  const auto w = encoding_terms(enc);
  for (std::size_t j = 0; j < enc.levels; ++j) m.objective.add_linear(NT + j, w[j]);

  for (const BendersCut& c : cuts) {
    if (c.theta.size() != NT) throw InvalidArgument("cut dimension does not match the instance");
    if (c.constant > top) range_error("cut constant", c.constant);
    if (c.second_stage > top) range_error("second-stage cost", c.second_stage);
    m.constraints.push_back(cut_to_constraint(c, enc));
  }
  if (inst.lb_floor > 0.0) {
    if (inst.lb_floor > top) range_error("lower-bound floor", inst.lb_floor);
    std::vector<std::pair<std::size_t, double>> coeffs;
    for (std::size_t j = 0; j < enc.levels; ++j) coeffs.emplace_back(NT + j, -w[j]);
    m.constraints.emplace_back(std::move(coeffs), inst.lb_floor);
  }
  return m;
}

namespace detail {
/// Smallest encodable value >= need, or +inf when need is out of range.
inline double ceil_to_grid(const BinaryEncoding& enc, double need) {
  if (need > enc.max_value() + 1e-12) return std::numeric_limits<double>::infinity();
  return enc.chi * std::ceil(std::max(0.0, need) / enc.chi - 1e-9);
}
}  // namespace detail

/// Cheapest encodable Upsilon that satisfies every cut and the floor at u;
/// +inf when no encodable value does (u is infeasible in the master).
inline double required_bound(const SucInstance& inst, const BinaryEncoding& enc, std::span<const BendersCut> cuts,
                             std::span<const std::uint8_t> u) {
  double need = std::max(0.0, inst.lb_floor);
  for (const auto& c : cuts) need = std::max(need, c.value_at(u));
  return detail::ceil_to_grid(enc, need);
}

/// Exact master optimum by Gray-code enumeration of every commitment, with
/// cut values updated incrementally. Ties go to the lexicographically
/// smallest commitment. For tests and desk-scale checks.
inline std::pair<Bits, double> solve_master_exact(const SucInstance& inst, const BinaryEncoding& enc,
                                                  std::span<const BendersCut> cuts) {
  const std::size_t NT = num_commitment_vars(inst);
  if (NT > kMaxExhaustiveVars)
    throw SizeLimitError("exact master limited to " + std::to_string(kMaxExhaustiveVars) + " commitment bits");
  std::vector<double> cons(NT);
  for (std::size_t g = 0; g < inst.generators.size(); ++g)
    for (std::size_t t = 0; t < inst.horizon; ++t) cons[commitment_index(inst, g, t)] = inst.generators[g].c_cons;
  std::vector<double> v(cuts.size());
  for (std::size_t i = 0; i < cuts.size(); ++i) v[i] = cuts[i].constant;
  const double floor = std::max(0.0, inst.lb_floor);

  Bits u(NT, 0), best;
  double cost = 0.0, best_v = std::numeric_limits<double>::infinity();
  auto consider = [&] {
    double need = floor;
    for (double c : v) need = std::max(need, c);
    const double val = cost + detail::ceil_to_grid(enc, need);
    if (val < best_v - 1e-9 || (val <= best_v + 1e-9 && !best.empty() && lex_less(u, best))) {
      best_v = std::min(val, best_v);
      best = u;
    }
  };
  consider();
  for (std::uint64_t k = 1; k < (std::uint64_t{1} << NT); ++k) {
    const std::size_t var = NT - 1 - static_cast<std::size_t>(std::countr_zero(k));
    const double sgn = u[var] ? -1.0 : 1.0;
    u[var] ^= 1u;
    cost += sgn * cons[var];
    for (std::size_t i = 0; i < cuts.size(); ++i) v[i] += sgn * cuts[i].theta[var];
    consider();
  }
  // Re-evaluate from scratch to drop accumulated rounding.
  best_v = commitment_cost(inst, best) + required_bound(inst, enc, cuts, best);
  return {best, best_v};
}

struct BendersConfig {
  AdmmConfig admm;
  double gap_tol = 1e-3;
  std::size_t max_k = 20;
  bool monolithic = false;
  double dispatch_tol = 1e-6;
  bool incumbent_check = true;  // also price previously visited commitments in the master

  void validate() const {
    admm.phr().validate();
    if (!(gap_tol >= 0.0)) throw InvalidArgument("gap_tol must be >= 0");
    if (max_k < 1) throw InvalidArgument("max_k must be >= 1");
    if (!(dispatch_tol > 0.0)) throw InvalidArgument("dispatch_tol must be positive");
  }
};

struct BendersIteration {
  std::size_t k = 0;
  Bits u;
  double upsilon_raw = 0.0;  // decoded from the master sample
  double upsilon = 0.0;      // smallest encodable value meeting all cuts at u
  double lb = 0.0;
  double ub = std::numeric_limits<double>::quiet_NaN();  // this iteration; NaN when a scenario was guarded
  double best_ub = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  bool guarded = false;
  bool from_incumbent = false;  // an earlier commitment beat the master sample
  bool master_converged = false;
  std::size_t master_iterations = 0;
  std::size_t master_qubits = 0;
  std::vector<PhrTraceRow> master_trace;
  BendersCut cut;
};

struct BendersTrace {
  std::vector<BendersIteration> iterations;
  std::vector<BendersCut> cuts;
  Bits best_u;
  std::vector<DispatchSolution> best_dispatch;
  double ub = std::numeric_limits<double>::infinity();
  double lb = 0.0;
  bool converged = false;
  // Master solves that stopped at the iteration cap; their LB is not certified.
  std::size_t uncertified_masters = 0;

  double gap() const { return iterations.empty() ? std::numeric_limits<double>::infinity() : iterations.back().gap; }
};

inline double relative_gap(double ub, double lb) {
  if (!std::isfinite(ub) || !std::isfinite(lb)) return std::numeric_limits<double>::infinity();
  return (ub - lb) / std::max(1.0, std::abs(ub));
}

inline BendersTrace run_benders(const SucInstance& inst, const ScenarioSet& scenarios, const BinaryEncoding& enc,
                                const BendersConfig& cfg, BlockSamplers samplers) {
  if (const auto errs = validate_instance(inst); !errs.empty()) throw InvalidArgument("instance: " + errs.front());
  if (const auto errs = validate_scenarios(scenarios, inst.horizon); !errs.empty())
    throw InvalidArgument(errs.front());
  enc.validate();
  cfg.validate();
  if (cfg.monolithic && samplers.size() != 1) throw InvalidArgument("monolithic master takes a single sampler");

  const std::size_t N = inst.generators.size(), T = inst.horizon, NT = N * T;
  const BlockPartition part = partition_by_unit(N, T, enc.levels);
  BendersTrace trace;

  for (std::size_t k = 0; k < cfg.max_k; ++k) {
    BendersIteration it;
    it.k = k;

    const MasterProblem master = build_master(inst, enc, trace.cuts);
    const PhrResult mres = cfg.monolithic
                               ? run_qphr_alm(master.objective, master.constraints, cfg.admm.phr(), *samplers[0])
                               : static_cast<PhrResult>(
                                     run_qphr_admm(master.objective, master.constraints, part, cfg.admm, samplers));
    it.u.assign(mres.bits.begin(), mres.bits.begin() + static_cast<std::ptrdiff_t>(NT));
    it.upsilon_raw = decode_from(master.encoding, mres.bits);
    it.upsilon = required_bound(inst, master.encoding, trace.cuts, it.u);
    it.lb = commitment_cost(inst, it.u) + it.upsilon;
    if (cfg.incumbent_check) {
      for (const auto& prev : trace.iterations) {
        const double ups = required_bound(inst, master.encoding, trace.cuts, prev.u);
        const double v = commitment_cost(inst, prev.u) + ups;
        if (v < it.lb - 1e-12) {
          it.u = prev.u;
          it.upsilon = ups;
          it.lb = v;
          it.from_incumbent = true;
        }
      }
    }
    it.master_converged = mres.converged;
    if (!mres.converged) ++trace.uncertified_masters;
    it.master_iterations = mres.iterations;
    it.master_qubits = mres.max_qubits;
    it.master_trace = mres.trace;

    std::vector<DispatchSolution> sols(scenarios.scenarios.size());
    parallel_for(sols.size(), [&](std::size_t h) {
      sols[h] = solve_dispatch(build_subproblem(inst, scenarios.scenarios[h], std::span<const std::uint8_t>(it.u)),
                               cfg.dispatch_tol);
    });
    for (const auto& s : sols) it.guarded = it.guarded || s.status == DispatchStatus::InfeasibleGuarded;
    if (!it.guarded) {
      it.ub = aggregate_ub(sols, commitment_cost(inst, it.u));
      if (it.ub < trace.ub) {
        trace.ub = it.ub;
        trace.best_u = it.u;
        trace.best_dispatch = sols;
      }
    }
    // Guarded dispatch still prices spill, which only lowers the recourse
    // value, so its cut remains a valid under-estimator.
    it.cut = build_cut(sols, it.u, k);
    trace.cuts.push_back(it.cut);

    trace.lb = it.lb;
    it.best_ub = trace.ub;
    it.gap = relative_gap(trace.ub, it.lb);
    trace.iterations.push_back(std::move(it));
    if (trace.iterations.back().gap <= cfg.gap_tol) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

inline BendersTrace run_benders(const SucInstance& inst, const ScenarioSet& scenarios, const BinaryEncoding& enc,
                                const BendersConfig& cfg, Sampler& sampler) {
  Sampler* one[] = {&sampler};
  return run_benders(inst, scenarios, enc, cfg, BlockSamplers(one));
}

}  // namespace qsuc

#endif  // QSUC_BENDERS_HPP

#ifndef QSUC_PHR_HPP
#define QSUC_PHR_HPP

// Slack-free PHR augmented Lagrangian for linear inequality constraints over
// binary variables. Each constraint is either dropped (its penalty is a
// constant at the reference point) or contributes the QUBO expansion of
// (sigma*g(x) + lambda)^2 / (2 sigma) - lambda^2 / (2 sigma).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qsuc/qubo.hpp"
#include "qsuc/samplers.hpp"

namespace qsuc {

/// g(x) = sum_i a_i x_i + bound, feasible when g(x) <= 0.
class LinearConstraint {
 public:
  LinearConstraint() = default;
  LinearConstraint(std::vector<std::pair<std::size_t, double>> coeffs, double bound) : bound_(bound) {
    std::sort(coeffs.begin(), coeffs.end());
    for (const auto& [i, a] : coeffs) {
      if (!std::isfinite(a)) throw InvalidArgument("constraint coefficient must be finite");
      if (!coeffs_.empty() && coeffs_.back().first == i)
        coeffs_.back().second += a;
      else
        coeffs_.emplace_back(i, a);
    }
    std::erase_if(coeffs_, [](const auto& c) { return c.second == 0.0; });
    if (coeffs_.empty()) throw InvalidArgument("constraint needs at least one nonzero coefficient");
    if (!std::isfinite(bound_)) throw InvalidArgument("constraint bound must be finite");
  }

  /// Dense coefficients; zeros are skipped.
  static LinearConstraint dense(std::span<const double> a, double bound) {
    std::vector<std::pair<std::size_t, double>> c;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != 0.0) c.emplace_back(i, a[i]);
    return {std::move(c), bound};
  }

  const std::vector<std::pair<std::size_t, double>>& coeffs() const { return coeffs_; }
  double bound() const { return bound_; }
  std::size_t max_index() const { return coeffs_.back().first; }

  double value(std::span<const std::uint8_t> x) const {
    double g = bound_;
    for (const auto& [i, a] : coeffs_) {
      if (i >= x.size()) throw InvalidArgument("constraint index exceeds assignment length");
      if (x[i]) g += a;
    }
    return g;
  }

 private:
  std::vector<std::pair<std::size_t, double>> coeffs_;
  double bound_ = 0.0;
};

enum class PenaltyCase {
  Inactive,  // lambda + sigma g(x) <= 0: penalty is the constant -lambda^2/(2 sigma)
  Active,    // lambda + sigma g(x) > 0: quadratic penalty enters the QUBO
};

struct PhrParams {
  double sigma0 = 0.3;
  double eta = 1.05;
  double delta = 0.01;
  std::size_t max_iter = 100;

  void validate() const {
    if (!(sigma0 > 0.0)) throw InvalidArgument("sigma0 must be positive");
    if (!(eta >= 1.0)) throw InvalidArgument("eta must be >= 1");
    if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
    if (max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
  }
};

struct PhrState {
  std::vector<double> lambdas;
  double sigma = 0.3;
  double eta = 1.05;
  double delta = 0.01;
  std::size_t iter = 0;
  std::size_t max_iter = 100;

  static PhrState initial(std::size_t num_constraints, const PhrParams& p) {
    p.validate();
    return {std::vector<double>(num_constraints, 0.0), p.sigma0, p.eta, p.delta, 0, p.max_iter};
  }
};

inline PenaltyCase classify(const LinearConstraint& c, double lambda, double sigma, std::span<const std::uint8_t> x) {
  return lambda + sigma * c.value(x) <= 0.0 ? PenaltyCase::Inactive : PenaltyCase::Active;
}

/// QUBO of (sigma g(x) + lambda)^2/(2 sigma) - lambda^2/(2 sigma) over `n` variables.
inline Qubo penalty_qubo(const LinearConstraint& c, double lambda, double sigma, std::size_t n) {
  if (c.max_index() >= n) throw InvalidArgument("constraint refers to variable beyond QUBO size");
  Qubo q(n);
  const double shifted = sigma * c.bound() + lambda;
  const auto& a = c.coeffs();
  for (std::size_t p = 0; p < a.size(); ++p) {
    const auto [i, ai] = a[p];
    q.add_linear(i, sigma * ai * ai / 2.0 + ai * shifted);
    for (std::size_t r = p + 1; r < a.size(); ++r) q.add_quadratic(i, a[r].first, sigma * ai * a[r].second);
  }
  q.add_offset((shifted * shifted - lambda * lambda) / (2.0 * sigma));
  return q;
}

/// Exact PHR penalty (max form) at a point; the reference for penalty_qubo.
inline double phr_penalty(double g, double lambda, double sigma) {
  const double m = std::max(sigma * g + lambda, 0.0);
  return (m * m - lambda * lambda) / (2.0 * sigma);
}

/// objective + penalties of every constraint that is Active at `x_ref`.
/// The objective coefficients are never modified.
inline Qubo assemble(const Qubo& obj, std::span<const LinearConstraint> constraints, const PhrState& state,
                     std::span<const std::uint8_t> x_ref) {
  if (x_ref.size() != obj.size()) throw InvalidArgument("reference point length does not match objective");
  if (state.lambdas.size() != constraints.size()) throw InvalidArgument("one multiplier per constraint required");
  Qubo q = obj;
  for (std::size_t i = 0; i < constraints.size(); ++i)
    if (classify(constraints[i], state.lambdas[i], state.sigma, x_ref) == PenaltyCase::Active)
      q.add(penalty_qubo(constraints[i], state.lambdas[i], state.sigma, obj.size()));
  q.prune();
  return q;
}

inline double update_multiplier(double lambda, double sigma, double g) { return std::max(lambda + sigma * g, 0.0); }

/// || max{-lambda/sigma, g(x)} ||_2
inline double residual(std::span<const double> g, std::span<const double> lambdas, double sigma) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = std::max(-lambdas[i] / sigma, g[i]);
    s += v * v;
  }
  return std::sqrt(s);
}

inline std::vector<double> constraint_values(std::span<const LinearConstraint> constraints,
                                             std::span<const std::uint8_t> x) {
  std::vector<double> g(constraints.size());
  for (std::size_t i = 0; i < constraints.size(); ++i) g[i] = constraints[i].value(x);
  return g;
}

inline double residual(std::span<const LinearConstraint> constraints, const PhrState& state,
                       std::span<const std::uint8_t> x) {
  return residual(constraint_values(constraints, x), state.lambdas, state.sigma);
}

inline constexpr double kFeasibilityTol = 1e-9;

inline bool is_feasible(std::span<const double> g) {
  return std::all_of(g.begin(), g.end(), [](double v) { return v <= kFeasibilityTol; });
}

struct PhrTraceRow {
  std::size_t iter = 0;
  Bits bits;
  double residual = 0.0;
  double sigma = 0.0;
  std::vector<double> lambdas;  // multipliers used to build this iterate's QUBO
};

struct PhrResult {
  Bits bits;
  bool converged = false;
  std::size_t iterations = 0;
  double objective = 0.0;  // unpenalized objective at `bits`
  std::vector<PhrTraceRow> trace;
  PhrState final_state;
  std::size_t max_qubits = 0;  // largest QUBO handed to a sampler
};

namespace detail {

/// Tracks the lowest-objective strictly feasible iterate.
class BestFeasible {
 public:
  void offer(const Bits& x, double objective, std::span<const double> g) {
    if (!is_feasible(g)) return;
    if (!best_ || objective < best_->second - 1e-9) best_.emplace(x, objective);
  }
  const std::optional<std::pair<Bits, double>>& get() const { return best_; }

 private:
  std::optional<std::pair<Bits, double>> best_;
};

/// Converged: keep the final iterate unless a strictly better feasible one was
/// seen. Capped: best feasible iterate if any, else the last one.
inline void pick_result(PhrResult& res, const Qubo& obj, const Bits& last, const BestFeasible& best) {
  res.bits = last;
  res.objective = qubo_value(obj, last);
  if (const auto& b = best.get(); b && (!res.converged || b->second < res.objective - 1e-9)) {
    res.bits = b->first;
    res.objective = b->second;
  }
}

}  // namespace detail

/// Monolithic QPHR-ALM. The first QUBO is the bare objective; afterwards each
/// pass classifies every constraint at the previous sample, assembles the
/// penalized QUBO, samples it, tests the residual, then updates
/// lambda <- max(lambda + sigma g, 0) and sigma <- eta sigma.
inline PhrResult run_qphr_alm(const Qubo& obj, std::span<const LinearConstraint> constraints, const PhrParams& params,
                              Sampler& sampler) {
  PhrState state = PhrState::initial(constraints.size(), params);
  PhrResult res;
  detail::BestFeasible best;
  Bits x;

  for (state.iter = 1; state.iter <= state.max_iter; ++state.iter) {
    const Qubo q = x.empty() ? obj : assemble(obj, constraints, state, x);
    res.max_qubits = std::max(res.max_qubits, q.size());
    x = sampler.sample(q).bits;
    if (x.size() != obj.size()) throw InvalidArgument("sampler returned wrong assignment length");

    const auto g = constraint_values(constraints, x);
    const double r = residual(g, state.lambdas, state.sigma);
    best.offer(x, qubo_value(obj, x), g);
    res.trace.push_back({state.iter, x, r, state.sigma, state.lambdas});
    res.iterations = state.iter;
    if (r <= state.delta) {
      res.converged = true;
      break;
    }
    for (std::size_t i = 0; i < constraints.size(); ++i)
      state.lambdas[i] = update_multiplier(state.lambdas[i], state.sigma, g[i]);
    state.sigma *= state.eta;
  }
  state.iter = std::min(state.iter, state.max_iter);
  res.final_state = state;
  detail::pick_result(res, obj, x, best);
  return res;
}

}  // namespace qsuc

#endif  // QSUC_PHR_HPP

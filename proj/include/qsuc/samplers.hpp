#ifndef QSUC_SAMPLERS_HPP
#define QSUC_SAMPLERS_HPP

// Classical QUBO minimizers standing in for an annealer: exhaustive Gray-code
// enumeration (the exact oracle) and single-flip Metropolis simulated annealing.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qsuc/qubo.hpp"
#include "qsuc/rng.hpp"

namespace qsuc {

struct SampleResult {
  Bits bits;
  double energy = 0.0;
  std::size_t reads = 0;
  std::string backend;
  double wall_time = 0.0;  // seconds
};

/// Anything that returns a (hopefully) low-energy assignment for a QUBO.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual SampleResult sample(const Qubo& q) = 0;
  virtual std::string name() const = 0;
};

namespace detail {

struct Adjacency {
  std::vector<std::vector<std::pair<std::size_t, double>>> nbrs;
  double scale = 0.0;  // sum of |coefficients|, for tie tolerances

  explicit Adjacency(const Qubo& q) : nbrs(q.size()) {
    for (const auto& [key, v] : q.quadratic()) {
      if (v == 0.0) continue;
      nbrs[key.first].emplace_back(key.second, v);
      nbrs[key.second].emplace_back(key.first, v);
      scale += std::abs(v);
    }
    for (double c : q.linear()) scale += std::abs(c);
  }
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

inline constexpr std::size_t kMaxExhaustiveVars = 26;

/// Global minimizer by full enumeration. Ties go to the lexicographically
/// smallest bitstring (x[0] most significant).
inline SampleResult solve_exhaustive(const Qubo& q) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = q.size();
  if (n > kMaxExhaustiveVars)
    throw SizeLimitError("exhaustive search limited to " + std::to_string(kMaxExhaustiveVars) + " variables");

  detail::Adjacency adj(q);
  const double tol = 1e-10 * (1.0 + adj.scale);

  Bits x(n, 0), best(n, 0);
  std::vector<double> field(q.linear());
  double energy = q.offset();
  double best_energy = energy;

  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < count; ++k) {
    // Gray code: step k flips bit ctz(k); map it to the rightmost variable first.
    const std::size_t v = n - 1 - static_cast<std::size_t>(std::countr_zero(k));
    const bool turning_on = x[v] == 0;
    energy += turning_on ? field[v] : -field[v];
    x[v] = static_cast<std::uint8_t>(turning_on);
    const double sign = turning_on ? 1.0 : -1.0;
    for (const auto& [j, b] : adj.nbrs[v]) field[j] += sign * b;

    if (energy < best_energy - tol) {
      best_energy = energy;
      best = x;
    } else if (energy <= best_energy + tol && lex_less(x, best)) {
      best_energy = std::min(best_energy, energy);
      best = x;
    }
  }

  SampleResult r;
  r.energy = qubo_value(q, best);
  r.bits = std::move(best);
  r.reads = 1;
  r.backend = "exhaustive";
  r.wall_time = detail::seconds_since(t0);
  return r;
}

struct SaSchedule {
  std::size_t sweeps = 1000;
  double beta_start = 0.1;
  double beta_end = 10.0;
  std::size_t restarts = 20;
  std::uint64_t seed = 0;

  void validate() const {
    if (sweeps < 1) throw InvalidArgument("SA schedule needs at least one sweep");
    if (!(beta_start > 0.0) || !(beta_start <= beta_end))
      throw InvalidArgument("SA schedule needs 0 < beta_start <= beta_end");
    if (restarts < 1) throw InvalidArgument("SA schedule needs at least one restart");
  }
};

/// Geometric inverse-temperature ladder, single-flip Metropolis sweeps in
/// index order. Restart r draws from Rng(derive_seed(seed, r)); the best state
/// visited over all restarts is returned, ties broken lexicographically.
inline SampleResult solve_sa(const Qubo& q, const SaSchedule& sched) {
  sched.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = q.size();
  detail::Adjacency adj(q);
  const double tol = 1e-10 * (1.0 + adj.scale);

  std::vector<double> betas(sched.sweeps);
  for (std::size_t s = 0; s < sched.sweeps; ++s) {
    const double frac = sched.sweeps == 1 ? 1.0 : static_cast<double>(s) / static_cast<double>(sched.sweeps - 1);
    betas[s] = sched.beta_start * std::pow(sched.beta_end / sched.beta_start, frac);
  }

  Bits overall;
  double overall_energy = std::numeric_limits<double>::infinity();

  for (std::size_t r = 0; r < sched.restarts; ++r) {
    Rng rng(derive_seed(sched.seed, r));
    Bits x(n);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng.next() & 1u);
    std::vector<double> field(q.linear());
    for (std::size_t i = 0; i < n; ++i)
      if (x[i])
        for (const auto& [j, b] : adj.nbrs[i]) field[j] += b;
    double energy = qubo_value(q, x);
    Bits best = x;
    double best_energy = energy;

    for (double beta : betas) {
      for (std::size_t i = 0; i < n; ++i) {
        const double delta = x[i] ? -field[i] : field[i];
        if (delta > 0.0 && rng.uniform() >= std::exp(-beta * delta)) continue;
        const bool turning_on = x[i] == 0;
        x[i] = static_cast<std::uint8_t>(turning_on);
        energy += delta;
        const double sign = turning_on ? 1.0 : -1.0;
        for (const auto& [j, b] : adj.nbrs[i]) field[j] += sign * b;
        if (energy < best_energy - tol) {
          best_energy = energy;
          best = x;
        }
      }
    }
    best_energy = qubo_value(q, best);
    if (overall.empty() || best_energy < overall_energy - tol ||
        (best_energy <= overall_energy + tol && lex_less(best, overall))) {
      overall_energy = std::min(overall_energy, best_energy);
      overall = std::move(best);
    }
  }

  SampleResult res;
  res.energy = qubo_value(q, overall);
  res.bits = std::move(overall);
  res.reads = sched.restarts;
  res.backend = "simulated-annealing";
  res.wall_time = detail::seconds_since(t0);
  return res;
}

class ExhaustiveSampler final : public Sampler {
 public:
  SampleResult sample(const Qubo& q) override { return solve_exhaustive(q); }
  std::string name() const override { return "exhaustive"; }
};

/// Each call advances an internal counter so repeated solves inside an outer
/// loop draw fresh, yet reproducible, random streams.
class AnnealingSampler final : public Sampler {
 public:
  explicit AnnealingSampler(SaSchedule sched) : sched_(sched) { sched_.validate(); }
  SampleResult sample(const Qubo& q) override {
    SaSchedule s = sched_;
    s.seed = derive_seed(sched_.seed, calls_++);
    return solve_sa(q, s);
  }
  std::string name() const override { return "simulated-annealing"; }

 private:
  SaSchedule sched_;
  std::uint64_t calls_ = 0;
};

}  // namespace qsuc

#endif  // QSUC_SAMPLERS_HPP

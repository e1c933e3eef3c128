#ifndef QSUC_ADMM_HPP
#define QSUC_ADMM_HPP

// Multi-block direct-extended ADMM over the PHR-penalized QUBO. Blocks are
// minimized one after another (Gauss-Seidel) with every other block frozen at
// its latest value; multipliers and penalty are updated once per sweep.

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qsuc/phr.hpp"
#include "qsuc/qubo.hpp"
#include "qsuc/samplers.hpp"

namespace qsuc {

struct BlockPartition {
  std::vector<std::vector<std::size_t>> blocks;

  std::size_t num_vars() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
  }
  std::size_t max_block() const {
    std::size_t m = 0;
    for (const auto& b : blocks) m = std::max(m, b.size());
    return m;
  }

  /// Disjoint, non-empty, covering [0, n).
  void validate(std::size_t n) const {
    std::vector<char> seen(n, 0);
    for (const auto& b : blocks) {
      if (b.empty()) throw InvalidArgument("partition block must be non-empty");
      for (std::size_t i : b) {
        if (i >= n) throw InvalidArgument("partition index out of range");
        if (seen[i]) throw InvalidArgument("partition blocks must be disjoint");
        seen[i] = 1;
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      throw InvalidArgument("partition must cover every variable");
  }
};

/// One block per generator schedule (T commitment bits each) followed by the
/// J-bit encoded bound; variables are laid out generator-major.
inline BlockPartition partition_by_unit(std::size_t N, std::size_t T, std::size_t J) {
  BlockPartition p;
  std::size_t next = 0;
  auto take = [&](std::size_t len) {
    std::vector<std::size_t> b(len);
    std::iota(b.begin(), b.end(), next);
    next += len;
    if (!b.empty()) p.blocks.push_back(std::move(b));
  };
  for (std::size_t g = 0; g < N; ++g) take(T);
  take(J);
  return p;
}

/// Consecutive blocks of `size` (the last one may be shorter).
inline BlockPartition partition_contiguous(std::size_t n, std::size_t size) {
  if (size == 0) throw InvalidArgument("block size must be positive");
  BlockPartition p;
  for (std::size_t s = 0; s < n; s += size) {
    std::vector<std::size_t> b(std::min(size, n - s));
    std::iota(b.begin(), b.end(), s);
    p.blocks.push_back(std::move(b));
  }
  return p;
}

inline BlockPartition single_block(std::size_t n) { return partition_contiguous(n, std::max<std::size_t>(n, 1)); }

/// QUBO over the variables of `block` with all other variables fixed at
/// `x_full`: cross terms fold into the block's linear part, fixed-fixed terms
/// and fixed linear terms fold into the offset. Exact for every block assignment.
inline Qubo restrict_to_block(const Qubo& q, std::span<const std::size_t> block, std::span<const std::uint8_t> x_full) {
  if (x_full.size() != q.size()) throw InvalidArgument("assignment length does not match QUBO");
  constexpr std::size_t kOutside = static_cast<std::size_t>(-1);
  std::vector<std::size_t> local(q.size(), kOutside);
  for (std::size_t k = 0; k < block.size(); ++k) {
    if (block[k] >= q.size()) throw InvalidArgument("block index out of range");
    local[block[k]] = k;
  }

  Qubo r(block.size());
  double offset = q.offset();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (local[i] != kOutside)
      r.add_linear(local[i], q.linear()[i]);
    else if (x_full[i])
      offset += q.linear()[i];
  }
  for (const auto& [key, v] : q.quadratic()) {
    const std::size_t li = local[key.first], lj = local[key.second];
    const bool in_i = li != kOutside, in_j = lj != kOutside;
    if (in_i && in_j)
      r.add_quadratic(li, lj, v);
    else if (in_i && x_full[key.second])
      r.add_linear(li, v);
    else if (in_j && x_full[key.first])
      r.add_linear(lj, v);
    else if (!in_i && !in_j && x_full[key.first] && x_full[key.second])
      offset += v;
  }
  r.add_offset(offset);
  r.prune();
  return r;
}

struct AdmmConfig {
  double sigma0 = 0.3;
  double eta = 1.05;
  double delta = 0.01;
  std::size_t max_sweeps = 100;

  PhrParams phr() const { return {sigma0, eta, delta, max_sweeps}; }
};

struct AdmmTraceRow {
  std::size_t sweep = 0;
  std::size_t block = 0;
  Bits bits;  // full iterate right after this block was spliced in
  double residual = 0.0;
  double sigma = 0.0;
};

struct AdmmResult : PhrResult {
  std::vector<AdmmTraceRow> block_trace;
};

/// Picks the sampler for block m; lets callers mix backends per block.
using BlockSamplers = std::span<Sampler* const>;

namespace detail {
inline Sampler& sampler_for(BlockSamplers samplers, std::size_t m) {
  return *samplers[samplers.size() == 1 ? 0 : m];
}
}  // namespace detail

/// One Gauss-Seidel pass. Before each block the Case split is refreshed at the
/// current mixed iterate (earlier blocks already updated this sweep).
inline Bits sweep(const Qubo& obj, std::span<const LinearConstraint> constraints, const BlockPartition& part,
                  const PhrState& state, Bits x, BlockSamplers samplers, std::size_t* max_qubits = nullptr,
                  std::vector<Bits>* after_block = nullptr) {
  if (samplers.empty() || (samplers.size() != 1 && samplers.size() != part.blocks.size()))
    throw InvalidArgument("need one sampler, or one per block");
  for (std::size_t m = 0; m < part.blocks.size(); ++m) {
    const auto& block = part.blocks[m];
    const Qubo full = assemble(obj, constraints, state, x);
    const Qubo local = restrict_to_block(full, block, x);
    if (max_qubits) *max_qubits = std::max(*max_qubits, local.size());
    const SampleResult s = detail::sampler_for(samplers, m).sample(local);
    if (s.bits.size() != block.size()) throw InvalidArgument("sampler returned wrong block length");
    for (std::size_t k = 0; k < block.size(); ++k) x[block[k]] = s.bits[k];
    if (after_block) after_block->push_back(x);
  }
  return x;
}

inline Bits sweep(const Qubo& obj, std::span<const LinearConstraint> constraints, const BlockPartition& part,
                  const PhrState& state, Bits x, Sampler& sampler) {
  Sampler* one[] = {&sampler};
  return sweep(obj, constraints, part, state, std::move(x), BlockSamplers(one));
}

/// QPHR-ADMM from x = 0. After every sweep the residual is measured against
/// the multipliers that built it; on failure lambda and sigma are updated.
inline AdmmResult run_qphr_admm(const Qubo& obj, std::span<const LinearConstraint> constraints,
                                const BlockPartition& part, const AdmmConfig& cfg, BlockSamplers samplers) {
  part.validate(obj.size());
  PhrState state = PhrState::initial(constraints.size(), cfg.phr());
  AdmmResult res;
  detail::BestFeasible best;
  Bits x(obj.size(), 0);

  for (state.iter = 1; state.iter <= state.max_iter; ++state.iter) {
    std::vector<Bits> stages;
    x = sweep(obj, constraints, part, state, std::move(x), samplers, &res.max_qubits, &stages);

    const auto g = constraint_values(constraints, x);
    const double r = residual(g, state.lambdas, state.sigma);
    best.offer(x, qubo_value(obj, x), g);
    res.trace.push_back({state.iter, x, r, state.sigma, state.lambdas});
    for (std::size_t m = 0; m < stages.size(); ++m)
      res.block_trace.push_back({state.iter, m, std::move(stages[m]), r, state.sigma});
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

inline AdmmResult run_qphr_admm(const Qubo& obj, std::span<const LinearConstraint> constraints,
                                const BlockPartition& part, const AdmmConfig& cfg, Sampler& sampler) {
  Sampler* one[] = {&sampler};
  return run_qphr_admm(obj, constraints, part, cfg, BlockSamplers(one));
}

}  // namespace qsuc

#endif  // QSUC_ADMM_HPP

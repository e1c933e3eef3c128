#ifndef QSUC_MODEL_HPP
#define QSUC_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

namespace qsuc {

/// Thermal unit. ramp_down is stored non-positive so the ramp rule reads
/// ramp_down <= p[t+1] - p[t] <= ramp_up.
struct Generator {
  std::size_t id = 0;
  double c_quad = 0.0;  // cost / MW^2
  double c_prim = 0.0;  // cost / MW
  double c_cons = 0.0;  // cost / period while committed
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp_up = 0.0;
  double ramp_down = 0.0;

  double marginal_cost(double p) const { return 2.0 * c_quad * p + c_prim; }
};

struct SucInstance {
  std::vector<Generator> generators;
  std::size_t horizon = 1;
  double shed_cost = 0.0;
  double lb_floor = 0.0;

  std::size_t num_generators() const { return generators.size(); }
};

inline std::size_t num_commitment_vars(const SucInstance& inst) { return inst.generators.size() * inst.horizon; }

/// Index of commitment u_{g,t} in generator-major layout.
inline std::size_t commitment_index(const SucInstance& inst, std::size_t g, std::size_t t) {
  return g * inst.horizon + t;
}

/// Human-readable list of every broken rule; empty when the instance is usable.
inline std::vector<std::string> validate_instance(const SucInstance& inst) {
  std::vector<std::string> out;
  auto fail = [&](const std::string& field, const std::string& rule) { out.push_back(field + ": " + rule); };
  auto finite = [](double v) { return std::isfinite(v); };

  if (inst.horizon < 1) fail("horizon", "must be >= 1");
  if (!finite(inst.lb_floor)) fail("lb_floor", "must be finite");
  if (!finite(inst.shed_cost)) fail("shed_cost", "must be finite");

  double worst_marginal = 0.0;
  for (std::size_t k = 0; k < inst.generators.size(); ++k) {
    const Generator& g = inst.generators[k];
    std::ostringstream tag;
    tag << "generators[" << k << "]";
    const std::string p = tag.str();
    if (!finite(g.c_quad) || !finite(g.c_prim) || !finite(g.c_cons) || !finite(g.p_min) || !finite(g.p_max) ||
        !finite(g.ramp_up) || !finite(g.ramp_down)) {
      fail(p, "all fields must be finite");
      continue;
    }
    if (g.p_min < 0.0) fail(p + ".p_min", "must be >= 0");
    if (g.p_min > g.p_max) fail(p + ".p_min/p_max", "p_min must not exceed p_max");
    if (g.c_quad < 0.0) fail(p + ".c_quad", "must be >= 0 (convex fuel cost)");
    if (g.ramp_up < 0.0) fail(p + ".ramp_up", "must be >= 0");
    if (g.ramp_down > 0.0) fail(p + ".ramp_down", "must be <= 0");
    // p = u * p_min must be a ramp-feasible schedule for every commitment,
    // otherwise some commitments admit no dispatch at all.
    if (g.p_min > g.ramp_up || g.p_min > -g.ramp_down)
      fail(p + ".p_min/ramp", "p_min must not exceed ramp limits (start-up/shut-down would be infeasible)");
    worst_marginal = std::max(worst_marginal, g.marginal_cost(g.p_max));
  }
  if (!inst.generators.empty() && !(inst.shed_cost > worst_marginal))
    fail("shed_cost", "must exceed every generator's marginal cost at p_max (shedding is last resort)");
  return out;
}

}  // namespace qsuc

#endif  // QSUC_MODEL_HPP

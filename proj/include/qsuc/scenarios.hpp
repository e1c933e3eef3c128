#ifndef QSUC_SCENARIOS_HPP
#define QSUC_SCENARIOS_HPP

// Sampled wind and load realizations. Wind speed is Weibull, mapped to power
// through a cut-in / rated / cut-out curve; load is an affine Beta draw.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qsuc/errors.hpp"
#include "qsuc/rng.hpp"

namespace qsuc {

struct Scenario {
  std::vector<double> wind;  // MW per period
  std::vector<double> load;  // MW per period
  double probability = 0.0;
};

struct ScenarioSet {
  std::vector<Scenario> scenarios;
  std::uint64_t seed = 0;

  std::size_t horizon() const { return scenarios.empty() ? 0 : scenarios.front().wind.size(); }
};

struct PowerCurve {
  double cut_in = 3.0;   // m/s
  double rated_speed = 12.0;
  double cut_out = 25.0;
  double rated_power = 1.0;  // MW
};

struct WindParams {
  double shape = 2.0;   // Weibull k
  double scale = 8.0;   // Weibull lambda, m/s
  PowerCurve turbine;
};

struct LoadParams {
  double alpha = 2.0;
  double beta = 2.0;
  double load_min = 0.0;
  double load_max = 1.0;
};

inline double turbine_power(const PowerCurve& c, double v) {
  if (v < c.cut_in || v > c.cut_out) return 0.0;
  if (v >= c.rated_speed) return c.rated_power;
  const double lo = c.cut_in * c.cut_in * c.cut_in;
  const double hi = c.rated_speed * c.rated_speed * c.rated_speed;
  return c.rated_power * (v * v * v - lo) / (hi - lo);
}

inline void validate(const WindParams& w) {
  if (!(w.shape > 0.0) || !(w.scale > 0.0)) throw InvalidArgument("Weibull shape and scale must be positive");
  const auto& c = w.turbine;
  if (!(c.cut_in >= 0.0 && c.cut_in < c.rated_speed && c.rated_speed < c.cut_out))
    throw InvalidArgument("power curve needs 0 <= cut_in < rated_speed < cut_out");
  if (!(c.rated_power >= 0.0)) throw InvalidArgument("rated power must be non-negative");
}

inline void validate(const LoadParams& l) {
  if (!(l.alpha > 0.0) || !(l.beta > 0.0)) throw InvalidArgument("Beta alpha and beta must be positive");
  if (!(l.load_min >= 0.0) || !(l.load_min <= l.load_max))
    throw InvalidArgument("load range needs 0 <= load_min <= load_max");
}

inline std::vector<double> sample_wind_series(const WindParams& p, std::size_t T, std::uint64_t seed) {
  validate(p);
  Rng rng(seed);
  std::weibull_distribution<double> speed(p.shape, p.scale);
  std::vector<double> out(T);
  for (auto& w : out) w = turbine_power(p.turbine, speed(rng.engine()));
  return out;
}

inline double sample_beta(std::mt19937_64& eng, double alpha, double beta) {
  std::gamma_distribution<double> ga(alpha, 1.0), gb(beta, 1.0);
  const double x = ga(eng);
  const double y = gb(eng);
  return x + y > 0.0 ? x / (x + y) : 0.5;
}

inline std::vector<double> sample_load_series(const LoadParams& p, std::size_t T, std::uint64_t seed) {
  validate(p);
  Rng rng(seed);
  std::vector<double> out(T);
  for (auto& d : out) d = p.load_min + (p.load_max - p.load_min) * sample_beta(rng.engine(), p.alpha, p.beta);
  return out;
}

/// K equiprobable scenarios. Scenario h uses seeds derived from (seed, h), so
/// the set does not depend on generation order.
inline ScenarioSet build_scenario_set(const WindParams& wind, const LoadParams& load, std::size_t K, std::size_t T,
                                      std::uint64_t seed) {
  if (K < 1) throw InvalidArgument("scenario count must be >= 1");
  if (T < 1) throw InvalidArgument("horizon must be >= 1");
  validate(wind);
  validate(load);
  ScenarioSet set;
  set.seed = seed;
  set.scenarios.resize(K);
  for (std::size_t h = 0; h < K; ++h) {
    const std::uint64_t s = derive_seed(seed, h);
    set.scenarios[h].wind = sample_wind_series(wind, T, derive_seed(s, 0));
    set.scenarios[h].load = sample_load_series(load, T, derive_seed(s, 1));
    set.scenarios[h].probability = 1.0 / static_cast<double>(K);
  }
  return set;
}

inline std::vector<std::string> validate_scenarios(const ScenarioSet& set, std::size_t T) {
  std::vector<std::string> out;
  if (set.scenarios.empty()) out.emplace_back("scenarios: at least one scenario required");
  double total = 0.0;
  for (std::size_t h = 0; h < set.scenarios.size(); ++h) {
    const auto& s = set.scenarios[h];
    const std::string p = "scenarios[" + std::to_string(h) + "]";
    if (s.wind.size() != T || s.load.size() != T) out.push_back(p + ": series length must equal horizon");
    for (double w : s.wind)
      if (!(w >= 0.0) || !std::isfinite(w)) {
        out.push_back(p + ".wind: values must be finite and >= 0");
        break;
      }
    for (double d : s.load)
      if (!(d >= 0.0) || !std::isfinite(d)) {
        out.push_back(p + ".load: values must be finite and >= 0");
        break;
      }
    if (!(s.probability >= 0.0)) out.push_back(p + ".probability: must be >= 0");
    total += s.probability;
  }
  if (!set.scenarios.empty() && std::abs(total - 1.0) > 1e-9) out.emplace_back("probabilities must sum to 1");
  return out;
}

}  // namespace qsuc

#endif  // QSUC_SCENARIOS_HPP

#ifndef QSUC_IO_HPP
#define QSUC_IO_HPP

// JSON and CSV serialization for instances, scenario sets, QUBOs, run
// configurations and solver traces.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsuc/admm.hpp"
#include "qsuc/benders.hpp"
#include "qsuc/errors.hpp"
#include "qsuc/model.hpp"
#include "qsuc/qubo.hpp"
#include "qsuc/samplers.hpp"
#include "qsuc/scenarios.hpp"

namespace qsuc {

using json = nlohmann::json;

/// Malformed or inconsistent user input (maps to exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
template <class T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type");
  }
}

template <class T>
T field_or(const json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? field<T>(j, key, where) : fallback;
}
}  // namespace detail

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

// ---- instance -------------------------------------------------------------

inline json to_json(const SucInstance& inst) {
  json gens = json::array();
  for (const auto& g : inst.generators)
    gens.push_back({{"id", g.id},
                    {"c_quad", g.c_quad},
                    {"c_prim", g.c_prim},
                    {"c_cons", g.c_cons},
                    {"p_min", g.p_min},
                    {"p_max", g.p_max},
                    {"ramp_up", g.ramp_up},
                    {"ramp_down", g.ramp_down}});
  return {{"generators", gens}, {"horizon", inst.horizon}, {"shed_cost", inst.shed_cost}, {"lb_floor", inst.lb_floor}};
}

inline SucInstance instance_from_json(const json& j) {
  using detail::field;
  SucInstance inst;
  if (!j.is_object()) throw ConfigError("instance: expected an object");
  const json& gens = j.contains("generators") ? j.at("generators") : json();
  if (!gens.is_array() || gens.empty()) throw ConfigError("instance: 'generators' must be a non-empty array");
  for (std::size_t k = 0; k < gens.size(); ++k) {
    const std::string w = "generators[" + std::to_string(k) + "]";
    const json& g = gens[k];
    Generator gen;
    gen.id = detail::field_or<std::size_t>(g, "id", k, w);
    gen.c_quad = field<double>(g, "c_quad", w);
    gen.c_prim = field<double>(g, "c_prim", w);
    gen.c_cons = field<double>(g, "c_cons", w);
    gen.p_min = field<double>(g, "p_min", w);
    gen.p_max = field<double>(g, "p_max", w);
    gen.ramp_up = field<double>(g, "ramp_up", w);
    gen.ramp_down = field<double>(g, "ramp_down", w);
    inst.generators.push_back(gen);
  }
  inst.horizon = field<std::size_t>(j, "horizon", "instance");
  inst.shed_cost = field<double>(j, "shed_cost", "instance");
  inst.lb_floor = j.contains("benders_lb_floor") ? field<double>(j, "benders_lb_floor", "instance")
                                                 : detail::field_or<double>(j, "lb_floor", 0.0, "instance");
  if (const auto errs = validate_instance(inst); !errs.empty()) {
    std::string msg = "instance is invalid:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return inst;
}

// ---- scenarios ------------------------------------------------------------

inline json to_json(const ScenarioSet& set) {
  json arr = json::array();
  for (const auto& s : set.scenarios) arr.push_back({{"wind", s.wind}, {"load", s.load}, {"probability", s.probability}});
  return {{"seed", set.seed}, {"scenarios", arr}};
}

inline ScenarioSet scenarios_from_json(const json& j, std::size_t horizon) {
  ScenarioSet set;
  if (!j.is_object() || !j.contains("scenarios") || !j.at("scenarios").is_array())
    throw ConfigError("scenario file: expected an object with a 'scenarios' array");
  set.seed = detail::field_or<std::uint64_t>(j, "seed", 0, "scenario file");
  const json& arr = j.at("scenarios");
  for (std::size_t h = 0; h < arr.size(); ++h) {
    const std::string w = "scenarios[" + std::to_string(h) + "]";
    Scenario s;
    s.wind = detail::field<std::vector<double>>(arr[h], "wind", w);
    s.load = detail::field<std::vector<double>>(arr[h], "load", w);
    s.probability = detail::field<double>(arr[h], "probability", w);
    set.scenarios.push_back(std::move(s));
  }
  if (const auto errs = validate_scenarios(set, horizon); !errs.empty()) {
    std::string msg = "scenario file is invalid:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return set;
}

// ---- QUBO / Ising ---------------------------------------------------------

inline json to_json(const Qubo& q) {
  json quad = json::array();
  for (const auto& [key, v] : q.quadratic()) quad.push_back({key.first, key.second, v});
  return {{"n", q.size()}, {"linear", q.linear()}, {"quadratic", quad}, {"offset", q.offset()}};
}

inline json to_json(const IsingModel& m) {
  json quad = json::array();
  for (const auto& [key, v] : m.J) quad.push_back({key.first, key.second, v});
  return {{"n", m.n}, {"linear", m.h}, {"quadratic", quad}, {"offset", m.offset}};
}

/// Accepts the wire layout {n, linear[], quadratic[[i,j,v]...], offset}.
inline Qubo qubo_from_json(const json& j) {
  if (!j.is_object()) throw ProtocolError("QUBO payload must be an object");
  try {
    const auto n = j.at("n").get<std::size_t>();
    Qubo q(n);
    const auto lin = j.value("linear", std::vector<double>{});
    if (!lin.empty() && lin.size() != n) throw ProtocolError("linear[] length does not match n");
    for (std::size_t i = 0; i < lin.size(); ++i) q.add_linear(i, lin[i]);
    for (const auto& t : j.value("quadratic", json::array())) {
      if (!t.is_array() || t.size() != 3) throw ProtocolError("quadratic entries must be [i, j, v]");
      q.add_quadratic(t[0].get<std::size_t>(), t[1].get<std::size_t>(), t[2].get<double>());
    }
    q.add_offset(j.value("offset", 0.0));
    return q;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed QUBO payload: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ProtocolError(std::string("malformed QUBO payload: ") + e.what());
  }
}

// ---- run configuration ----------------------------------------------------

struct SamplerConfig {
  std::string backend = "exhaustive";  // exhaustive | sa | remote
  SaSchedule schedule;
  std::string endpoint;
  std::string token;
  std::string token_env = "QSUC_TOKEN";
  std::size_t reads = 1;
  double timeout_s = 30.0;
};

struct GenerateConfig {
  std::size_t count = 10;
  std::uint64_t seed = 0;
  WindParams wind;
  LoadParams load;
};

struct RunConfig {
  std::filesystem::path instance;
  std::filesystem::path scenarios;  // empty: generate from `generate`
  GenerateConfig generate;
  BinaryEncoding encoding{0.01, 8, 0};
  BendersConfig benders;
  SamplerConfig sampler;
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
  bool write_dispatch = true;
};

inline WindParams wind_from_json(const json& j, WindParams w = {}) {
  const std::string where = "wind";
  w.shape = detail::field_or(j, "shape", w.shape, where);
  w.scale = detail::field_or(j, "scale", w.scale, where);
  w.turbine.cut_in = detail::field_or(j, "cut_in", w.turbine.cut_in, where);
  w.turbine.rated_speed = detail::field_or(j, "rated_speed", w.turbine.rated_speed, where);
  w.turbine.cut_out = detail::field_or(j, "cut_out", w.turbine.cut_out, where);
  w.turbine.rated_power = detail::field_or(j, "rated_power", w.turbine.rated_power, where);
  return w;
}

inline LoadParams load_from_json(const json& j, LoadParams l = {}) {
  const std::string where = "load";
  l.alpha = detail::field_or(j, "alpha", l.alpha, where);
  l.beta = detail::field_or(j, "beta", l.beta, where);
  l.load_min = detail::field_or(j, "load_min", l.load_min, where);
  l.load_max = detail::field_or(j, "load_max", l.load_max, where);
  return l;
}

inline GenerateConfig generate_from_json(const json& j, GenerateConfig g = {}) {
  g.count = detail::field_or(j, "count", g.count, "generate");
  g.seed = detail::field_or(j, "seed", g.seed, "generate");
  if (j.contains("wind")) g.wind = wind_from_json(j.at("wind"), g.wind);
  if (j.contains("load")) g.load = load_from_json(j.at("load"), g.load);
  return g;
}

/// Relative paths inside the file resolve against the file's directory.
inline RunConfig run_config_from_json(const json& j, const std::filesystem::path& base = {}) {
  using detail::field_or;
  RunConfig c;
  if (!j.is_object()) throw ConfigError("config: expected an object");
  auto path = [&](const char* key) -> std::filesystem::path {
    if (!j.contains(key)) return {};
    std::filesystem::path p = detail::field<std::string>(j, key, "config");
    return p.is_relative() && !base.empty() ? base / p : p;
  };
  c.instance = path("instance");
  c.scenarios = path("scenarios");
  if (j.contains("out")) c.out = path("out");
  c.seed = field_or(j, "seed", c.seed, "config");
  c.generate.seed = c.seed;
  if (j.contains("generate")) c.generate = generate_from_json(j.at("generate"), c.generate);

  if (j.contains("encoding")) {
    const json& e = j.at("encoding");
    c.encoding.chi = field_or(e, "chi", c.encoding.chi, "encoding");
    c.encoding.levels = field_or(e, "levels", c.encoding.levels, "encoding");
  }
  if (j.contains("phr")) {
    const json& p = j.at("phr");
    auto& a = c.benders.admm;
    a.sigma0 = field_or(p, "sigma0", a.sigma0, "phr");
    a.eta = field_or(p, "eta", a.eta, "phr");
    a.delta = field_or(p, "delta", a.delta, "phr");
    a.max_sweeps = field_or(p, "max_iter", a.max_sweeps, "phr");
  }
  if (j.contains("partition")) {
    const auto part = detail::field<std::string>(j, "partition", "config");
    if (part != "unit" && part != "monolithic") throw ConfigError("partition must be 'unit' or 'monolithic'");
    c.benders.monolithic = part == "monolithic";
  }
  c.benders.gap_tol = field_or(j, "gap_tol", c.benders.gap_tol, "config");
  c.benders.max_k = field_or(j, "max_k", c.benders.max_k, "config");
  c.benders.incumbent_check = field_or(j, "incumbent_check", c.benders.incumbent_check, "config");
  c.write_dispatch = field_or(j, "write_dispatch", c.write_dispatch, "config");

  c.sampler.schedule.seed = c.seed;
  if (j.contains("sampler")) {
    const json& s = j.at("sampler");
    auto& sc = c.sampler;
    sc.backend = field_or(s, "backend", sc.backend, "sampler");
    sc.schedule.sweeps = field_or(s, "sweeps", sc.schedule.sweeps, "sampler");
    sc.schedule.beta_start = field_or(s, "beta_start", sc.schedule.beta_start, "sampler");
    sc.schedule.beta_end = field_or(s, "beta_end", sc.schedule.beta_end, "sampler");
    sc.schedule.restarts = field_or(s, "restarts", sc.schedule.restarts, "sampler");
    sc.endpoint = field_or(s, "endpoint", sc.endpoint, "sampler");
    sc.token = field_or(s, "token", sc.token, "sampler");
    sc.token_env = field_or(s, "token_env", sc.token_env, "sampler");
    sc.reads = field_or(s, "reads", sc.reads, "sampler");
    sc.timeout_s = field_or(s, "timeout_s", sc.timeout_s, "sampler");
  }
  return c;
}

/// Checks every parameter against its module's invariants.
inline void validate(const RunConfig& c) {
  try {
    c.encoding.validate();
    c.benders.validate();
    if (c.sampler.backend == "sa") c.sampler.schedule.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (c.sampler.backend != "exhaustive" && c.sampler.backend != "sa" && c.sampler.backend != "remote")
    throw ConfigError("sampler.backend must be exhaustive, sa or remote");
  if (c.sampler.backend == "remote" && c.sampler.endpoint.empty())
    throw ConfigError("sampler.endpoint is required for the remote backend");
  if (c.sampler.reads < 1) throw ConfigError("sampler.reads must be >= 1");
  if (c.instance.empty()) throw ConfigError("config: 'instance' path is required");
  if (!std::filesystem::exists(c.instance)) throw ConfigError("instance file not found: " + c.instance.string());
  if (!c.scenarios.empty() && !std::filesystem::exists(c.scenarios))
    throw ConfigError("scenario file not found: " + c.scenarios.string());
  if (c.generate.count < 1) throw ConfigError("generate.count must be >= 1");
}

// ---- traces ---------------------------------------------------------------

namespace detail {
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}
}  // namespace detail

inline std::string benders_trace_csv(const BendersTrace& tr) {
  std::ostringstream os;
  os << "k,ub,best_ub,lb,gap,upsilon,upsilon_sample,guarded,from_incumbent,master_converged,master_iterations,"
        "master_qubits,u\n";
  for (const auto& it : tr.iterations)
    os << it.k << ',' << detail::num(it.ub) << ',' << detail::num(it.best_ub) << ',' << detail::num(it.lb) << ','
       << detail::num(it.gap) << ',' << detail::num(it.upsilon) << ',' << detail::num(it.upsilon_raw) << ','
       << it.guarded << ',' << it.from_incumbent << ',' << it.master_converged << ',' << it.master_iterations << ','
       << it.master_qubits << ',' << to_string(it.u) << '\n';
  return os.str();
}

/// PHR rows: (k, iter, bitstring, residual, sigma, lambda_0, lambda_1, ...).
inline std::string phr_trace_csv(const BendersTrace& tr) {
  std::size_t width = 0;
  for (const auto& it : tr.iterations)
    for (const auto& r : it.master_trace) width = std::max(width, r.lambdas.size());
  std::ostringstream os;
  os << "k,iter,bits,residual,sigma";
  for (std::size_t i = 0; i < width; ++i) os << ",lambda_" << i;
  os << '\n';
  for (const auto& it : tr.iterations)
    for (const auto& r : it.master_trace) {
      os << it.k << ',' << r.iter << ',' << to_string(r.bits) << ',' << detail::num(r.residual) << ','
         << detail::num(r.sigma);
      for (std::size_t i = 0; i < width; ++i) os << ',' << (i < r.lambdas.size() ? detail::num(r.lambdas[i]) : "");
      os << '\n';
    }
  return os.str();
}

inline std::string phr_trace_csv(std::span<const PhrTraceRow> rows) {
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.lambdas.size());
  std::ostringstream os;
  os << "iter,bits,residual,sigma";
  for (std::size_t i = 0; i < width; ++i) os << ",lambda_" << i;
  os << '\n';
  for (const auto& r : rows) {
    os << r.iter << ',' << to_string(r.bits) << ',' << detail::num(r.residual) << ',' << detail::num(r.sigma);
    for (std::size_t i = 0; i < width; ++i) os << ',' << (i < r.lambdas.size() ? detail::num(r.lambdas[i]) : "");
    os << '\n';
  }
  return os.str();
}

inline std::string admm_trace_csv(std::span<const AdmmTraceRow> rows) {
  std::ostringstream os;
  os << "sweep,block,bits,residual,sigma\n";
  for (const auto& r : rows)
    os << r.sweep << ',' << r.block << ',' << to_string(r.bits) << ',' << detail::num(r.residual) << ','
       << detail::num(r.sigma) << '\n';
  return os.str();
}

inline std::string dispatch_csv(const SucInstance& inst, const DispatchSolution& s) {
  std::ostringstream os;
  os << "t";
  for (std::size_t g = 0; g < inst.generators.size(); ++g) os << ",p_" << inst.generators[g].id;
  os << ",shed,spill\n";
  for (std::size_t t = 0; t < inst.horizon; ++t) {
    os << t;
    for (std::size_t g = 0; g < inst.generators.size(); ++g)
      os << ',' << detail::num(s.p_gen[commitment_index(inst, g, t)]);
    os << ',' << detail::num(s.p_shed[t]) << ',' << detail::num(s.p_spill[t]) << '\n';
  }
  return os.str();
}

inline json cut_to_json(const BendersCut& c) {
  return {{"source_iter", c.source_iter},
          {"constant", c.constant},
          {"second_stage", c.second_stage},
          {"theta", c.theta},
          {"source_u", to_string(c.source_u)}};
}

namespace detail {
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
}  // namespace detail

inline json result_json(const SucInstance& inst, const BendersTrace& tr) {
  json u = json::array();
  for (std::size_t g = 0; g < inst.generators.size(); ++g) {
    json row = json::array();
    for (std::size_t t = 0; t < inst.horizon; ++t)
      row.push_back(tr.best_u.empty() ? 0 : int(tr.best_u[commitment_index(inst, g, t)]));
    u.push_back(row);
  }
  json hist = json::array(), cuts = json::array();
  for (const auto& it : tr.iterations)
    hist.push_back({{"k", it.k},
                    {"ub", detail::finite_or_null(it.ub)},
                    {"best_ub", detail::finite_or_null(it.best_ub)},
                    {"lb", it.lb},
                    {"gap", detail::finite_or_null(it.gap)},
                    {"u", to_string(it.u)},
                    {"master_converged", it.master_converged},
                    {"from_incumbent", it.from_incumbent},
                    {"guarded", it.guarded}});
  for (const auto& c : tr.cuts) cuts.push_back(cut_to_json(c));
  return {{"converged", tr.converged},
          {"iterations", tr.iterations.size()},
          {"ub", detail::finite_or_null(tr.ub)},
          {"lb", tr.lb},
          {"gap", detail::finite_or_null(tr.gap())},
          {"uncertified_masters", tr.uncertified_masters},
          {"commitment", u},
          {"history", hist},
          {"cuts", cuts}};
}

}  // namespace qsuc

#endif  // QSUC_IO_HPP

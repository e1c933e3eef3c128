#ifndef QSUC_CLI_HPP
#define QSUC_CLI_HPP

// Command-line front end. Every command is a function returning a process
// exit code so the test suite can drive it in-process.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsuc/admm.hpp"
#include "qsuc/benders.hpp"
#include "qsuc/io.hpp"
#include "qsuc/reference.hpp"
#include "qsuc/remote.hpp"
#include "qsuc/samplers.hpp"
#include "qsuc/scenarios.hpp"

namespace qsuc::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNotConverged = 2, kBackendError = 3 };

inline std::unique_ptr<Sampler> make_sampler(const SamplerConfig& c) {
  if (c.backend == "exhaustive") return std::make_unique<ExhaustiveSampler>();
  if (c.backend == "sa") return std::make_unique<AnnealingSampler>(c.schedule);
  if (c.backend == "remote")
    return std::make_unique<RemoteSampler>(
        RemoteOptions{c.endpoint, resolve_token(c.token, c.token_env), c.reads, c.timeout_s});
  throw ConfigError("unknown sampler backend '" + c.backend + "'");
}

// ---- generate -------------------------------------------------------------

struct GenerateArgs {
  std::string config;
  std::string output = "scenarios.json";
  std::size_t horizon = 24;
  std::optional<std::size_t> count;
  std::optional<std::uint64_t> seed;
};

inline int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  GenerateConfig g;
  std::size_t T = a.horizon;
  if (!a.config.empty()) {
    const std::filesystem::path cfg_path(a.config);
    const RunConfig rc = run_config_from_json(read_json_file(cfg_path), cfg_path.parent_path());
    g = rc.generate;
    if (!rc.instance.empty()) T = instance_from_json(read_json_file(rc.instance)).horizon;
  }
  if (a.count) g.count = *a.count;
  if (a.seed) g.seed = *a.seed;
  if (g.count < 1) throw ConfigError("scenario count must be >= 1");
  if (T < 1) throw ConfigError("horizon must be >= 1");
  ScenarioSet set;
  try {
    set = build_scenario_set(g.wind, g.load, g.count, T, g.seed);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  write_text_file(a.output, to_json(set).dump(2) + "\n");
  out << "wrote " << set.scenarios.size() << " scenarios (T=" << T << ", seed=" << g.seed << ") to " << a.output
      << "\n";
  return kOk;
}

// ---- solve ----------------------------------------------------------------

struct SolveArgs {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool monolithic = false;
  std::optional<std::string> backend;
  std::optional<std::string> endpoint;
  std::optional<double> gap_tol, sigma0, eta, delta, chi;
  std::optional<std::size_t> max_k, max_iter, levels;
};

inline RunConfig load_run_config(const SolveArgs& a) {
  const std::filesystem::path cfg_path(a.config);
  RunConfig c = run_config_from_json(read_json_file(cfg_path), cfg_path.parent_path());
  if (a.out) c.out = *a.out;
  if (a.seed) {
    c.seed = *a.seed;
    c.generate.seed = *a.seed;
    c.sampler.schedule.seed = *a.seed;
  }
  if (a.monolithic) c.benders.monolithic = true;
  if (a.backend) c.sampler.backend = *a.backend;
  if (a.endpoint) c.sampler.endpoint = *a.endpoint;
  if (a.gap_tol) c.benders.gap_tol = *a.gap_tol;
  if (a.sigma0) c.benders.admm.sigma0 = *a.sigma0;
  if (a.eta) c.benders.admm.eta = *a.eta;
  if (a.delta) c.benders.admm.delta = *a.delta;
  if (a.chi) c.encoding.chi = *a.chi;
  if (a.max_k) c.benders.max_k = *a.max_k;
  if (a.max_iter) c.benders.admm.max_sweeps = *a.max_iter;
  if (a.levels) c.encoding.levels = *a.levels;
  validate(c);
  return c;
}

inline int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const RunConfig c = load_run_config(a);
  const SucInstance inst = instance_from_json(read_json_file(c.instance));
  const ScenarioSet set =
      c.scenarios.empty()
          ? build_scenario_set(c.generate.wind, c.generate.load, c.generate.count, inst.horizon, c.generate.seed)
          : scenarios_from_json(read_json_file(c.scenarios), inst.horizon);

  auto sampler = make_sampler(c.sampler);
  const auto t0 = std::chrono::steady_clock::now();
  BendersTrace tr;
  try {
    tr = run_benders(inst, set, c.encoding, c.benders, *sampler);
  } catch (const RangeError& e) {
    throw ConfigError(e.what());
  } catch (const SizeLimitError& e) {
    throw ConfigError(e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::filesystem::create_directories(c.out);
  json res = result_json(inst, tr);
  res["wall_time_s"] = secs;
  res["sampler"] = sampler->name();
  res["master"] = c.benders.monolithic ? "qphr-alm" : "qphr-admm";
  res["scenarios"] = set.scenarios.size();
  write_text_file(c.out / "result.json", res.dump(2) + "\n");
  write_text_file(c.out / "benders_trace.csv", benders_trace_csv(tr));
  write_text_file(c.out / "phr_trace.csv", phr_trace_csv(tr));
  if (c.write_dispatch)
    for (std::size_t h = 0; h < tr.best_dispatch.size(); ++h)
      write_text_file(c.out / ("dispatch_" + std::to_string(h) + ".csv"), dispatch_csv(inst, tr.best_dispatch[h]));

  out << "k    UB            LB            gap\n";
  for (const auto& it : tr.iterations) {
    char line[160];
    std::snprintf(line, sizeof line, "%-4zu %-13.6g %-13.6g %.3e%s\n", it.k, it.best_ub, it.lb, it.gap,
                  it.master_converged ? "" : "  (master capped)");
    out << line;
  }
  out << (tr.converged ? "converged" : "not converged") << " after " << tr.iterations.size()
      << " iterations; cost " << tr.ub << "; results in " << c.out.string() << "\n";
  if (tr.uncertified_masters > 0)
    out << "warning: " << tr.uncertified_masters
        << " master solve(s) hit the iteration cap, so the lower bound is not certified\n";
  return tr.converged ? kOk : kNotConverged;
}

// ---- verify-paper ---------------------------------------------------------

struct VerifyArgs {
  std::vector<double> sigma0;  // one per row, or one for all rows
  double eta = 1.05;
  double delta = 0.01;
  std::size_t max_iter = 50;
  std::optional<std::string> out;
};

struct VerifyRow {
  std::string label;
  std::string target;
  std::string result;
  double sigma0 = 0.0;
  double eta = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool matched = false;
  AdmmResult run;
};

inline VerifyRow run_lbo_row(const reference::LboCase& c, double sigma0, double eta, double delta,
                             std::size_t max_iter) {
  ExhaustiveSampler ex;
  const AdmmConfig cfg{sigma0, eta, delta, max_iter};
  VerifyRow r;
  r.label = c.label;
  r.target = c.target;
  r.sigma0 = sigma0;
  r.eta = eta;
  r.run = run_qphr_admm(reference::lbo_objective(), c.constraints, reference::lbo_partition(), cfg, ex);
  r.result = to_string(r.run.bits);
  r.iterations = r.run.iterations;
  r.converged = r.run.converged;
  r.matched = r.result == r.target;
  return r;
}

struct VerifyReport {
  std::vector<VerifyRow> rows;
  VerifyRow fast;  // large sigma0 and eta on constraints b and c
  VerifyRow gray;  // parameters past the stable region
  double seconds = 0.0;

  bool rows_matched() const {
    return std::all_of(rows.begin(), rows.end(), [](const VerifyRow& r) { return r.matched; });
  }
  bool fast_ok() const { return fast.converged && fast.iterations <= 8; }
};

inline VerifyReport verify_paper(const VerifyArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  auto cases = reference::lbo_cases();
  if (!a.sigma0.empty() && a.sigma0.size() != 1 && a.sigma0.size() != cases.size())
    throw ConfigError("--sigma0 takes one value or one per row (" + std::to_string(cases.size()) + ")");
  VerifyReport rep;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const double s = a.sigma0.empty() ? cases[i].sigma0 : a.sigma0[a.sigma0.size() == 1 ? 0 : i];
    rep.rows.push_back(run_lbo_row(cases[i], s, a.eta, a.delta, a.max_iter));
  }
  rep.fast = run_lbo_row(cases[2], 0.8, 1.14, a.delta, a.max_iter);
  rep.fast.label = "b+c fast";
  rep.fast.target = "";
  rep.gray = run_lbo_row(cases[2], 0.9, 1.16, a.delta, a.max_iter);
  rep.gray.label = "b+c unstable";
  rep.gray.target = "";
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

inline int cmd_verify_paper(const VerifyArgs& a, std::ostream& out) {
  const VerifyReport rep = verify_paper(a);
  auto line = [&](const VerifyRow& r, const std::string& verdict) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-14s %-5.2f %-5.2f %-8s %-8s %-6zu %-10s %s\n", r.label.c_str(), r.sigma0, r.eta,
                  r.target.empty() ? "-" : r.target.c_str(), r.result.c_str(), r.iterations,
                  r.converged ? "yes" : "no", verdict.c_str());
    out << buf;
  };
  out << "case           sigma eta   target   result   iters  converged  verdict\n";
  for (const auto& r : rep.rows) line(r, r.matched ? "PASS" : "FAIL");
  line(rep.fast, rep.fast_ok() ? "PASS (<= 8 iterations)" : "FAIL (expected <= 8 iterations)");
  line(rep.gray, rep.gray.converged ? "converged" : "flagged non-converged");
  out << "elapsed " << rep.seconds << " s\n";

  if (a.out) {
    const std::filesystem::path dir(*a.out);
    std::ostringstream csv;
    csv << "case,sigma0,eta,target,result,iterations,converged,matched\n";
    auto row = [&](const VerifyRow& r) {
      csv << r.label << ',' << r.sigma0 << ',' << r.eta << ',' << r.target << ',' << r.result << ',' << r.iterations
          << ',' << r.converged << ',' << r.matched << '\n';
    };
    std::size_t idx = 0;
    for (const auto& r : rep.rows) {
      row(r);
      write_text_file(dir / ("admm_trace_" + std::to_string(idx) + ".csv"), admm_trace_csv(r.run.block_trace));
      write_text_file(dir / ("phr_trace_" + std::to_string(idx++) + ".csv"), phr_trace_csv(r.run.trace));
    }
    row(rep.fast);
    row(rep.gray);
    write_text_file(dir / "verify.csv", csv.str());
  }
  return rep.rows_matched() && rep.fast_ok() ? kOk : kNotConverged;
}

// ---- qubo-dump ------------------------------------------------------------

struct DumpArgs {
  std::optional<std::string> input;   // QUBO JSON file
  std::optional<std::string> config;  // run config: dump the cut-free master
  std::string constraints;            // reference problem: subset of "bcd"
  double sigma = 0.3;
  std::optional<std::string> output;
};

inline int cmd_qubo_dump(const DumpArgs& a, std::ostream& out) {
  const int sources = int(a.input.has_value()) + int(a.config.has_value());
  if (sources > 1) throw ConfigError("choose one of --input or --config");
  Qubo q;
  if (a.input) {
    try {
      q = qubo_from_json(read_json_file(*a.input));
    } catch (const ProtocolError& e) {
      throw ConfigError(e.what());
    }
  } else if (a.config) {
    const std::filesystem::path p(*a.config);
    const RunConfig rc = run_config_from_json(read_json_file(p), p.parent_path());
    const SucInstance inst = instance_from_json(read_json_file(rc.instance));
    q = build_master(inst, rc.encoding, {}).objective;
  } else {
    // Reference problem with the requested constraints penalized at lambda = 0.
    std::vector<LinearConstraint> cons;
    for (char ch : a.constraints) {
      if (ch == 'b') cons.push_back(reference::lbo_cut_b());
      else if (ch == 'c') cons.push_back(reference::lbo_cut_c());
      else if (ch == 'd') cons.push_back(reference::lbo_cut_d());
      else throw ConfigError("--constraints accepts the letters b, c and d");
    }
    if (!(a.sigma > 0.0)) throw ConfigError("--sigma must be positive");
    PhrState st = PhrState::initial(cons.size(), PhrParams{a.sigma, 1.0, 0.01, 1});
    const Bits zero(6, 0);
    q = assemble(reference::lbo_objective(), cons, st, zero);
  }
  const json doc = {{"qubo", to_json(q)}, {"ising", to_json(qubo_to_ising(q))}};
  if (a.output)
    write_text_file(*a.output, doc.dump(2) + "\n");
  else
    out << doc.dump(2) << "\n";
  return kOk;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  std::vector<std::size_t> sizes{4, 8, 12};
  std::string backend = "exhaustive";
  std::size_t reps = 5;
  std::uint64_t seed = 0;
  SaSchedule schedule;
  std::optional<std::string> output;
};

struct BenchRow {
  std::size_t n = 0;
  double mean_wall_time = 0.0;
  double mean_energy = 0.0;
  double min_energy = 0.0;
};

inline std::vector<BenchRow> bench(const BenchArgs& a) {
  if (a.reps < 1) throw ConfigError("--reps must be >= 1");
  if (a.backend != "exhaustive" && a.backend != "sa") throw ConfigError("bench backend must be exhaustive or sa");
  std::vector<BenchRow> rows;
  for (std::size_t n : a.sizes) {
    if (n < 1) throw ConfigError("sizes must be >= 1");
    if (a.backend == "exhaustive" && n > kMaxExhaustiveVars)
      throw ConfigError("exhaustive bench limited to n <= " + std::to_string(kMaxExhaustiveVars));
    BenchRow row;
    row.n = n;
    row.min_energy = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < a.reps; ++r) {
      const Qubo q = random_qubo(n, derive_seed(derive_seed(a.seed, n), r));
      SampleResult s;
      if (a.backend == "exhaustive") {
        s = solve_exhaustive(q);
      } else {
        SaSchedule sched = a.schedule;
        sched.seed = derive_seed(derive_seed(a.seed, n), r);
        s = solve_sa(q, sched);
      }
      row.mean_wall_time += s.wall_time;
      row.mean_energy += s.energy;
      row.min_energy = std::min(row.min_energy, s.energy);
    }
    row.mean_wall_time /= static_cast<double>(a.reps);
    row.mean_energy /= static_cast<double>(a.reps);
    rows.push_back(row);
  }
  return rows;
}

inline std::string bench_csv(std::span<const BenchRow> rows) {
  std::ostringstream os;
  os << "n,mean_wall_time_s,mean_energy,min_energy\n";
  for (const auto& r : rows)
    os << r.n << ',' << detail::num(r.mean_wall_time) << ',' << detail::num(r.mean_energy) << ','
       << detail::num(r.min_energy) << '\n';
  return os.str();
}

inline int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.backend == "sa") {
    try {
      a.schedule.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
  const std::string csv = bench_csv(bench(a));
  if (a.output)
    write_text_file(*a.output, csv);
  else
    out << csv;
  return kOk;
}

// ---- mock-annealer --------------------------------------------------------

namespace detail {
inline std::atomic<MockAnnealer*> g_foreground_server{nullptr};
inline void stop_on_signal(int) {
  if (auto* s = g_foreground_server.load()) s->stop();
}
}  // namespace detail

inline int cmd_mock_annealer(const MockOptions& opt, std::ostream& out) {
  if (opt.port <= 0) throw ConfigError("--port must be a positive port number");
  if (opt.fixed_bits) {
    try {
      parse_bits(*opt.fixed_bits);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
  MockAnnealer server(opt);
  out << "mock annealer listening on " << server.url() << std::endl;
  detail::g_foreground_server = &server;
  std::signal(SIGINT, detail::stop_on_signal);
  std::signal(SIGTERM, detail::stop_on_signal);
  server.run();
  detail::g_foreground_server = nullptr;
  return kOk;
}

// ---- dispatcher -----------------------------------------------------------

/// Parses argv, runs the chosen command, maps failures to exit codes.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Hybrid QUBO / Benders stochastic unit commitment solver"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Sample a wind/load scenario set");
  g->add_option("-c,--config", gen.config, "run config JSON (generate block and instance horizon)");
  g->add_option("-o,--output", gen.output, "scenario JSON to write")->capture_default_str();
  g->add_option("--horizon", gen.horizon, "periods per scenario when no config is given")->capture_default_str();
  g->add_option("-k,--count", gen.count, "number of scenarios");
  g->add_option("--seed", gen.seed, "master seed");

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "Run the hybrid Benders loop");
  s->add_option("-c,--config", sol.config, "run config JSON")->required();
  s->add_option("--out", sol.out, "output directory");
  s->add_option("--seed", sol.seed, "master seed");
  s->add_flag("--monolithic", sol.monolithic, "solve the master with QPHR-ALM instead of per-unit ADMM");
  s->add_option("--backend", sol.backend, "exhaustive | sa | remote");
  s->add_option("--endpoint", sol.endpoint, "remote sampler URL");
  s->add_option("--gap-tol", sol.gap_tol, "relative Benders gap tolerance");
  s->add_option("--max-k", sol.max_k, "Benders iteration cap");
  s->add_option("--sigma0", sol.sigma0, "initial penalty");
  s->add_option("--eta", sol.eta, "penalty growth factor");
  s->add_option("--delta", sol.delta, "residual tolerance");
  s->add_option("--max-iter", sol.max_iter, "master iteration cap");
  s->add_option("--chi", sol.chi, "bound encoding precision");
  s->add_option("--levels", sol.levels, "bound encoding bits");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify-paper", "Re-run the six-variable reference cases");
  v->add_option("--sigma0", ver.sigma0, "initial penalty, one value or one per row")->delimiter(',');
  v->add_option("--eta", ver.eta, "penalty growth factor")->capture_default_str();
  v->add_option("--delta", ver.delta, "residual tolerance")->capture_default_str();
  v->add_option("--max-iter", ver.max_iter, "iteration cap")->capture_default_str();
  v->add_option("--out", ver.out, "directory for per-row traces");

  DumpArgs dump;
  auto* d = app.add_subcommand("qubo-dump", "Write a QUBO and its Ising form as JSON");
  d->add_option("--input", dump.input, "QUBO JSON to convert");
  d->add_option("-c,--config", dump.config, "run config: dump the master QUBO without cuts");
  d->add_option("--constraints", dump.constraints, "reference problem constraints to penalize (letters b, c, d)");
  d->add_option("--sigma", dump.sigma, "penalty for --constraints")->capture_default_str();
  d->add_option("-o,--output", dump.output, "file to write (default stdout)");

  BenchArgs ben;
  auto* b = app.add_subcommand("bench", "Time a sampler on random QUBOs");
  b->add_option("--sizes", ben.sizes, "problem sizes")->delimiter(',');
  b->add_option("--backend", ben.backend, "exhaustive | sa")->capture_default_str();
  b->add_option("--reps", ben.reps, "instances per size")->capture_default_str();
  b->add_option("--seed", ben.seed, "master seed")->capture_default_str();
  b->add_option("--sweeps", ben.schedule.sweeps, "annealing sweeps")->capture_default_str();
  b->add_option("--restarts", ben.schedule.restarts, "annealing restarts")->capture_default_str();
  b->add_option("-o,--output", ben.output, "CSV to write (default stdout)");

  MockOptions mock;
  std::string fixed;
  auto* m = app.add_subcommand("mock-annealer", "Serve the annealer wire protocol locally");
  m->add_option("--host", mock.host, "bind address")->capture_default_str();
  m->add_option("--port", mock.port, "port")->required();
  m->add_option("--path", mock.path, "request path")->capture_default_str();
  m->add_option("--token", mock.token, "require this Bearer token");
  m->add_option("--fixed-bits", fixed, "always answer with this bitstring");
  m->add_option("--energy-bias", mock.energy_bias, "add to reported energies")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*s) return cmd_solve(sol, out);
    if (*v) return cmd_verify_paper(ver, out);
    if (*d) return cmd_qubo_dump(dump, out);
    if (*b) return cmd_bench(ben, out);
    if (*m) {
      if (!fixed.empty()) mock.fixed_bits = fixed;
      return cmd_mock_annealer(mock, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const RangeError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SizeLimitError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << "\n";
    return kBackendError;
  } catch (const ProtocolError& e) {
    err << "protocol error: " << e.what() << "\n";
    return kBackendError;
  } catch (const VerificationError& e) {
    err << "verification error: " << e.what() << "\n";
    return kBackendError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNotConverged;
  }
  return kConfigError;
}

}  // namespace qsuc::cli

#endif  // QSUC_CLI_HPP

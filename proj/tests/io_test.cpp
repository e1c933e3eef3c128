#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "qsuc/io.hpp"
#include "test_support.hpp"

using namespace qsuc;

namespace {

json tiny_instance_json() { return read_json_file(testkit::data_dir() / "tiny" / "instance.json"); }

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST(InstanceJson, RoundTrip) {
  const SucInstance a = instance_from_json(tiny_instance_json());
  const SucInstance b = instance_from_json(to_json(a));
  ASSERT_EQ(a.generators.size(), b.generators.size());
  EXPECT_EQ(a.horizon, b.horizon);
  EXPECT_EQ(a.shed_cost, b.shed_cost);
  EXPECT_EQ(a.generators[1].p_max, b.generators[1].p_max);
  EXPECT_EQ(a.generators[1].ramp_down, b.generators[1].ramp_down);
}

TEST(InstanceJson, MissingFieldIsNamed) {
  json j = tiny_instance_json();
  j["generators"][1].erase("p_max");
  try {
    instance_from_json(j);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("generators[1]"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("p_max"), std::string::npos);
  }
}

TEST(InstanceJson, InvariantViolationsListed) {
  json j = tiny_instance_json();
  j["shed_cost"] = 0.0;
  EXPECT_THROW(instance_from_json(j), ConfigError);
  j = tiny_instance_json();
  j["horizon"] = "three";
  EXPECT_THROW(instance_from_json(j), ConfigError);
}

TEST(InstanceJson, FloorAliases) {
  json j = tiny_instance_json();
  j.erase("lb_floor");
  j["benders_lb_floor"] = 1.5;
  EXPECT_EQ(instance_from_json(j).lb_floor, 1.5);
  j.erase("benders_lb_floor");
  EXPECT_EQ(instance_from_json(j).lb_floor, 0.0);
}

TEST(ScenarioJson, RoundTripAndChecks) {
  const auto set = build_scenario_set({}, {}, 4, 5, 3);
  const auto back = scenarios_from_json(to_json(set), 5);
  EXPECT_EQ(back.seed, 3u);
  ASSERT_EQ(back.scenarios.size(), 4u);
  EXPECT_EQ(back.scenarios[2].load, set.scenarios[2].load);
  EXPECT_THROW(scenarios_from_json(to_json(set), 6), ConfigError);
}

TEST(QuboJson, WireLayoutRoundTrip) {
  Qubo q(3);
  q.add_linear(0, 1.5);
  q.add_quadratic(0, 2, -2.0);
  q.add_offset(0.25);
  const json j = to_json(q);
  EXPECT_EQ(j.at("n"), 3);
  EXPECT_EQ(j.at("quadratic").size(), 1u);
  EXPECT_EQ(qubo_from_json(j), q);
}

TEST(QuboJson, MalformedPayloads) {
  EXPECT_THROW(qubo_from_json(json::array()), ProtocolError);
  EXPECT_THROW(qubo_from_json(json{{"n", 2}, {"linear", {1.0}}}), ProtocolError);
  EXPECT_THROW(qubo_from_json(json{{"n", 2}, {"quadratic", {{0, 5, 1.0}}}}), ProtocolError);
  EXPECT_THROW(qubo_from_json(json{{"linear", {1.0}}}), ProtocolError);
}

TEST(IsingJson, Layout) {
  Qubo q(2);
  q.add_quadratic(0, 1, 4.0);
  const json j = to_json(qubo_to_ising(q));
  EXPECT_EQ(j.at("linear"), json({-1.0, -1.0}));
  EXPECT_EQ(j.at("quadratic"), json({{0, 1, 1.0}}));
  EXPECT_EQ(j.at("offset"), 1.0);
}

TEST(RunConfigJson, ShippedConfigsParse) {
  for (const char* which : {"tiny", "reference"}) {
    const RunConfig c = testkit::load_config(which);
    EXPECT_NO_THROW(validate(c));
    EXPECT_TRUE(std::filesystem::exists(c.instance));
    EXPECT_TRUE(std::filesystem::exists(c.scenarios));
  }
  const RunConfig ref = testkit::load_config("reference");
  EXPECT_EQ(ref.encoding.levels, 8u);
  EXPECT_EQ(ref.generate.count, 10u);
}

TEST(RunConfigJson, OverridesAndDefaults) {
  const json j = {{"instance", "/abs/instance.json"},
                  {"seed", 11},
                  {"encoding", {{"chi", 0.5}}},
                  {"phr", {{"sigma0", 0.7}, {"max_iter", 9}}},
                  {"partition", "monolithic"},
                  {"sampler", {{"backend", "sa"}, {"sweeps", 50}}}};
  const RunConfig c = run_config_from_json(j, "/base");
  EXPECT_EQ(c.instance, "/abs/instance.json");
  EXPECT_EQ(c.encoding.chi, 0.5);
  EXPECT_EQ(c.encoding.levels, 8u);
  EXPECT_EQ(c.benders.admm.sigma0, 0.7);
  EXPECT_EQ(c.benders.admm.max_sweeps, 9u);
  EXPECT_TRUE(c.benders.monolithic);
  EXPECT_EQ(c.sampler.schedule.sweeps, 50u);
  EXPECT_EQ(c.sampler.schedule.seed, 11u);
  EXPECT_EQ(c.generate.seed, 11u);
  EXPECT_EQ(run_config_from_json(json{{"out", "res"}}, "/base").out, std::filesystem::path("/base/res"));
}

TEST(RunConfigJson, Rejections) {
  EXPECT_THROW(run_config_from_json(json{{"partition", "blocks"}}), ConfigError);
  EXPECT_THROW(run_config_from_json(json{{"gap_tol", "small"}}), ConfigError);
  RunConfig c = testkit::load_config("tiny");
  c.sampler.backend = "qpu";
  EXPECT_THROW(validate(c), ConfigError);
  c = testkit::load_config("tiny");
  c.sampler.backend = "remote";
  EXPECT_THROW(validate(c), ConfigError);
  c = testkit::load_config("tiny");
  c.instance = "/nonexistent/instance.json";
  EXPECT_THROW(validate(c), ConfigError);
  c = testkit::load_config("tiny");
  c.benders.admm.eta = 0.5;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Files, ReadErrors) {
  EXPECT_THROW(read_json_file("/nonexistent.json"), ConfigError);
  const auto dir = testkit::scratch_dir("io_files");
  write_text_file(dir / "bad.json", "{not json");
  EXPECT_THROW(read_json_file(dir / "bad.json"), ConfigError);
  write_text_file(dir / "nested" / "ok.json", "{\"a\": 1}");
  EXPECT_EQ(read_json_file(dir / "nested" / "ok.json").at("a"), 1);
}

TEST(Csv, HeadersAndRows) {
  const auto inst = testkit::load_instance("tiny");
  const auto set = testkit::load_scenarios("tiny", inst.horizon);
  const auto cfg = testkit::load_config("tiny");
  ExhaustiveSampler ex;
  const auto tr = run_benders(inst, set, cfg.encoding, cfg.benders, ex);

  const std::string bt = benders_trace_csv(tr);
  EXPECT_EQ(first_line(bt),
            "k,ub,best_ub,lb,gap,upsilon,upsilon_sample,guarded,from_incumbent,master_converged,master_iterations,"
            "master_qubits,u");
  EXPECT_EQ(static_cast<std::size_t>(std::count(bt.begin(), bt.end(), '\n')), tr.iterations.size() + 1);

  const std::string pt = phr_trace_csv(tr);
  EXPECT_EQ(pt.rfind("k,iter,bits,residual,sigma", 0), 0u);

  const std::string dc = dispatch_csv(inst, tr.best_dispatch[0]);
  EXPECT_EQ(first_line(dc), "t,p_0,p_1,shed,spill");
  EXPECT_EQ(static_cast<std::size_t>(std::count(dc.begin(), dc.end(), '\n')), inst.horizon + 1);

  const json r = result_json(inst, tr);
  EXPECT_EQ(r.at("commitment").size(), 2u);
  EXPECT_EQ(r.at("history").size(), tr.iterations.size());
  EXPECT_EQ(r.at("cuts").size(), tr.cuts.size());
  EXPECT_EQ(r.at("converged"), tr.converged);
}

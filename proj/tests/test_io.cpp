#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mtmv/config.hpp"
#include "mtmv/csv.hpp"
#include "mtmv/json_io.hpp"
#include "mtmv/svg.hpp"
#include "test_support.hpp"

using namespace mtmv;
using namespace mtmv::testing;

namespace {

std::string strip_timestamp(const std::string& csv) {
  if (csv.rfind("# generated ", 0) == 0) {
    return csv.substr(csv.find("\r\n") + 2);
  }
  return csv;
}

const char* kGoodConfig = R"({
  "market": {"horizon": 2.0, "rate": 0.04, "drift": 0.12, "vol": 0.2},
  "checkpoints": [0.0, 1.0, 2.0],
  "initial_wealth": 1.0,
  "targets": [1.087628893808826, 1.2214027581601699],
  "simulation": {"paths": 1000, "step": 0.001, "seed": 7, "record_step": 0.01},
  "outputs": {"dir": "out", "formats": ["csv", "json"], "timestamp": false}
})";

}  // namespace

TEST_CASE("csv bodies carry 17 significant digits and CRLF rows") {
  CsvWriter csv({"t", "value"}, /*timestamp=*/false);
  csv.add_row({0.1, 1.0 / 3.0});
  const std::string out = csv.to_string();
  CHECK(out == "t,value\r\n0.10000000000000001,0.33333333333333331\r\n");
  CHECK(CsvWriter::format_value(1.0) == "1");
}

TEST_CASE("csv timestamp line is present by default and suppressible") {
  CsvWriter with({"a"}, true);
  with.add_row({1.0});
  CsvWriter without({"a"}, false);
  without.add_row({1.0});
  CHECK(with.to_string().rfind("# generated ", 0) == 0);
  CHECK(without.to_string().rfind("# generated ", 0) == std::string::npos);
  CHECK(strip_timestamp(with.to_string()) == without.to_string());
}

TEST_CASE("row width is validated") {
  CsvWriter csv({"a", "b"}, false);
  CHECK_THROWS_AS(csv.add_row({1.0}), std::invalid_argument);
}

TEST_CASE("json serializers round-trip through a parser") {
  const ProblemSpec spec = reference_problem();
  const MultiplierSolution sol = solve_multipliers(spec);

  const auto doc = nlohmann::json::parse(to_json(sol, spec));
  CHECK(doc.at("mu").size() == 2);
  CHECK(rel_diff(doc.at("mu")[1].get<double>(), kMu2) < 1e-12);
  CHECK(doc.at("feasibility").at("ok").get<bool>());
  CHECK(doc.at("riccati").at("segments").size() == 2);

  const PolicyReport report = solve_policy_report(spec, 0.5);
  const auto policy_doc = nlohmann::json::parse(to_json(report));
  CHECK(policy_doc.contains("classical_baseline"));
  CHECK(policy_doc.at("model").at("time").size() == report.model.time.size());

  const ComparisonReport cmp = compare_models(spec);
  const auto cmp_doc = nlohmann::json::parse(to_json(cmp));
  CHECK(rel_diff(cmp_doc.at("window").at("hi").get<double>(), kWindowHi) < 1e-12);
}

TEST_CASE("riccati chain matches the golden snapshot") {
  const ProblemSpec spec = reference_problem();
  const MultiplierSolution sol = solve_multipliers(spec);
  const auto current = nlohmann::json::parse(to_json(sol.chain));

  const char* dir = std::getenv("MTMV_TEST_DATA");
  REQUIRE_MESSAGE(dir != nullptr, "MTMV_TEST_DATA not set");
  std::ifstream golden_file(std::string(dir) + "/chain_golden.json");
  REQUIRE(golden_file.good());
  nlohmann::json golden;
  golden_file >> golden;

  const auto& cur_segments = current.at("segments");
  const auto& gold_segments = golden.at("segments");
  REQUIRE(cur_segments.size() == gold_segments.size());
  for (std::size_t i = 0; i < cur_segments.size(); ++i) {
    for (const char* key : {"t_lo", "t_hi", "rho", "p_end", "g_end", "ratio_end",
                            "p_start", "g_start", "offset"}) {
      CHECK(rel_diff(cur_segments[i].at(key).get<double>(),
                     gold_segments[i].at(key).get<double>()) < 1e-12);
    }
  }
}

TEST_CASE("experiment config parses scalars and schedules") {
  const ExperimentConfig config = parse_experiment_config(kGoodConfig, "test");
  CHECK(config.problem.segment_count() == 2);
  CHECK(config.problem.market().rate(0.5) == doctest::Approx(0.04));
  CHECK(config.simulation.n_paths == 1000);
  CHECK(config.simulation.seed == 7);
  CHECK(!config.outputs.timestamp);
  CHECK(config.outputs.wants("csv"));
  CHECK(!config.outputs.wants("svg"));

  const char* scheduled = R"({
    "market": {
      "horizon": 2.0,
      "rate": {"schedule": [[0.0, 0.03], [1.0, 0.05]]},
      "drift": [0.10, 0.12],
      "vol": [[0.2, 0.0], [0.05, 0.25]]
    },
    "checkpoints": [0.0, 2.0],
    "initial_wealth": 1.0,
    "targets": [1.3]
  })";
  const ExperimentConfig config2 = parse_experiment_config(scheduled, "test");
  CHECK(config2.problem.market().asset_count() == 2);
  CHECK(config2.problem.market().rate(1.5) == doctest::Approx(0.05));
  CHECK(config2.problem.market().rate(0.5) == doctest::Approx(0.03));
}

TEST_CASE("config errors carry the offending field") {
  const char* missing_rate = R"({
    "market": {"horizon": 2.0, "drift": 0.12, "vol": 0.2},
    "checkpoints": [0.0, 2.0],
    "initial_wealth": 1.0,
    "targets": [1.2]
  })";
  try {
    (void)parse_experiment_config(missing_rate, "bad.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("bad.json") != std::string::npos);
    CHECK(what.find("/market") != std::string::npos);
    CHECK(what.find("rate") != std::string::npos);
  }

  try {
    (void)parse_experiment_config("{\n  \"market\": oops\n}", "syntax.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("syntax.json") != std::string::npos);
    CHECK(what.find("line 2") != std::string::npos);
  }

  const char* bad_targets = R"({
    "market": {"horizon": 2.0, "rate": 0.04, "drift": 0.12, "vol": 0.2},
    "checkpoints": [0.0, 1.0, 2.0],
    "initial_wealth": 1.0,
    "targets": [1.2]
  })";
  try {
    (void)parse_experiment_config(bad_targets, "targets.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/targets") != std::string::npos);
  }

  CHECK_THROWS_AS((void)load_experiment_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("svg chart emits polylines, bands and labels") {
  SvgChart chart("demo", "t", "wealth");
  chart.add_line("a", {0.0, 1.0, 2.0}, {1.0, 1.1, 1.2});
  chart.add_band("b", {0.0, 1.0, 2.0}, {0.9, 0.95, 1.0}, {1.1, 1.25, 1.4});
  const std::string svg = chart.to_string();
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("<polygon") != std::string::npos);
  CHECK(svg.find("demo") != std::string::npos);
  CHECK(svg.find("wealth") != std::string::npos);
  CHECK_THROWS_AS((void)SvgChart("x", "y", "z").to_string(), std::invalid_argument);
}

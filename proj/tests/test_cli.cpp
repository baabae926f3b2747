#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("MTMV_CLI");
  REQUIRE_MESSAGE(p != nullptr, "MTMV_CLI not set");
  return p;
}

std::string config_dir() {
  const char* p = std::getenv("MTMV_CONFIG_DIR");
  REQUIRE_MESSAGE(p != nullptr, "MTMV_CONFIG_DIR not set");
  return p;
}

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "mtmv_cli_test.log";
  const std::string cmd = cli_path() + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream is(log);
  std::ostringstream buf;
  buf << is.rdbuf();
  return {WEXITSTATUS(status), buf.str()};
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

std::string strip_timestamp(const std::string& csv) {
  if (csv.rfind("# generated ", 0) == 0) return csv.substr(csv.find("\r\n") + 2);
  return csv;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("solve writes the expected multipliers for the bundled config") {
  const fs::path out = fresh_dir("mtmv_cli_solve");
  const RunResult r = run("solve -c " + config_dir() + "/two_checkpoint.json -o " +
                          out.string());
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(out / "multipliers.json"));
  REQUIRE(fs::exists(out / "policy.csv"));

  const auto doc = nlohmann::json::parse(read_file(out / "multipliers.json"));
  CHECK(doc.at("mu")[1].get<double>() == doctest::Approx(1.9411221992695627).epsilon(1e-10));
  CHECK(doc.at("mu")[0].get<double>() == doctest::Approx(5.771490366665375).epsilon(1e-10));
}

TEST_CASE("decreasing targets exit with the infeasibility code and report") {
  const fs::path dir = fresh_dir("mtmv_cli_infeasible");
  const fs::path config = dir / "bad.json";
  std::ofstream(config) << R"({
    "market": {"horizon": 2.0, "rate": 0.04, "drift": 0.12, "vol": 0.2},
    "checkpoints": [0.0, 1.0, 2.0],
    "initial_wealth": 1.0,
    "targets": [1.2, 1.0]
  })";
  const RunResult r = run("solve -c " + config.string() + " -o " + dir.string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("infeasible") != std::string::npos);
  CHECK(r.output.find("growth_ok") != std::string::npos);
}

TEST_CASE("missing config exits with the environment code and names the path") {
  const RunResult r = run("solve -c /no/such/config.json");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("/no/such/config.json") != std::string::npos);
}

TEST_CASE("verify passes on the bundled config") {
  const RunResult r = run("verify -c " + config_dir() + "/two_checkpoint.json");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("[FAIL]") == std::string::npos);
}

TEST_CASE("csv outputs are deterministic for a fixed seed") {
  const fs::path out_a = fresh_dir("mtmv_cli_det_a");
  const fs::path out_b = fresh_dir("mtmv_cli_det_b");
  const std::string base = "simulate -c " + config_dir() +
                           "/two_checkpoint.json --paths 500 --step 0.01 --seed 7 "
                           "--csv-rows 2000 ";
  CHECK(run(base + "-o " + out_a.string()).exit_code == 0);
  CHECK(run(base + "-o " + out_b.string()).exit_code == 0);

  const std::string a = read_file(out_a / "paths.csv");
  const std::string b = read_file(out_b / "paths.csv");
  CHECK(strip_timestamp(a) == strip_timestamp(b));
  CHECK(!strip_timestamp(a).empty());

  // With --no-timestamp the whole file is byte-identical.
  const fs::path out_c = fresh_dir("mtmv_cli_det_c");
  const fs::path out_d = fresh_dir("mtmv_cli_det_d");
  CHECK(run(base + "--no-timestamp -o " + out_c.string()).exit_code == 0);
  CHECK(run(base + "--no-timestamp -o " + out_d.string()).exit_code == 0);
  CHECK(read_file(out_c / "paths.csv") == read_file(out_d / "paths.csv"));

  // A different seed changes the body.
  const fs::path out_e = fresh_dir("mtmv_cli_det_e");
  const std::string other = "simulate -c " + config_dir() +
                            "/two_checkpoint.json --paths 500 --step 0.01 --seed 8 "
                            "--csv-rows 2000 --no-timestamp -o " +
                            out_e.string();
  CHECK(run(other).exit_code == 0);
  CHECK(read_file(out_c / "paths.csv") != read_file(out_e / "paths.csv"));
}

TEST_CASE("compare emits figure data and the corollary verdicts") {
  const fs::path out = fresh_dir("mtmv_cli_compare");
  const RunResult r = run("compare -c " + config_dir() +
                          "/two_checkpoint.json --paths 2000 --step 0.01 -o " +
                          out.string());
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(out / "corollary.json"));
  REQUIRE(fs::exists(out / "figure1.csv"));
  REQUIRE(fs::exists(out / "figure2.csv"));
  REQUIRE(fs::exists(out / "figure1.svg"));

  const auto doc = nlohmann::json::parse(read_file(out / "corollary.json"));
  CHECK(doc.at("var1_strictly_smaller").get<bool>());
  CHECK(doc.at("var2_strictly_larger").get<bool>());
}

TEST_CASE("sweep writes one row per theta and skips infeasible entries") {
  const fs::path out = fresh_dir("mtmv_cli_sweep");
  const RunResult r = run("sweep 2.9 3.4 0.1 -c " + config_dir() +
                          "/two_checkpoint.json --paths 400 --step 0.01 -o " +
                          out.string());
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(out / "figure3.csv"));
  const std::string csv = read_file(out / "figure3.csv");
  // Header plus six theta rows (2.9 ... 3.4); entries above ~3.13 are
  // infeasible and marked with a zero flag.
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 7);
  CHECK(csv.find(",0,") != std::string::npos);  // a skipped row
}

TEST_CASE("classical single-checkpoint config runs end to end") {
  const fs::path out = fresh_dir("mtmv_cli_classical");
  const RunResult r = run("solve -c " + config_dir() + "/classical.json -o " + out.string());
  CHECK(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(read_file(out / "multipliers.json"));
  CHECK(doc.at("mu")[0].get<double>() == doctest::Approx(2.7305207902960018).epsilon(1e-10));
}

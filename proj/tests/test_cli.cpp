// End-to-end checks of the command line binary, driven as a subprocess.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#ifndef CMABFS_CLI_PATH
#error "CMABFS_CLI_PATH must point at the built binary"
#endif

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = fs::temp_directory_path() / ("cli_out_" + std::to_string(++counter));
  const fs::path err = fs::temp_directory_path() / ("cli_err_" + std::to_string(counter));
  const std::string command = std::string(CMABFS_CLI_PATH) + " " + args + " > " + out.string() +
                              " 2> " + err.string();
  const int status = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  fs::remove(out);
  fs::remove(err);
  return result;
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / name; }

}  // namespace

TEST_CASE("cli: simulate writes a log and a truth sidecar") {
  const fs::path csv = temp_file("cli_sim.csv");
  const auto result =
      run_cli("simulate --output " + csv.string() + " --n 500 --seed 9 --arms 3");
  CHECK(result.exit_code == 0);
  REQUIRE(fs::exists(csv));
  REQUIRE(fs::exists(csv.string() + ".truth.json"));
  const auto truth = nlohmann::json::parse(slurp(csv.string() + ".truth.json"));
  CHECK(truth["classes"].size() == 10);
  CHECK(truth["best_arm"].size() == 500);
  const std::string header = slurp(csv).substr(0, 10);
  CHECK(header.rfind("arm,reward", 0) == 0);
}

TEST_CASE("cli: simulate is byte-deterministic in the seed") {
  const fs::path a = temp_file("cli_sim_a.csv");
  const fs::path b = temp_file("cli_sim_b.csv");
  CHECK(run_cli("simulate --output " + a.string() + " --n 300 --seed 4").exit_code == 0);
  CHECK(run_cli("simulate --output " + b.string() + " --n 300 --seed 4").exit_code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a.string() + ".truth.json") == slurp(b.string() + ".truth.json"));
}

TEST_CASE("cli: score writes a sorted report and prints a table") {
  const fs::path csv = temp_file("cli_score_in.csv");
  REQUIRE(run_cli("simulate --output " + csv.string() + " --n 4000 --seed 2").exit_code == 0);
  const fs::path report = temp_file("cli_score.json");
  const auto result =
      run_cli("score --input " + csv.string() + " --output " + report.string() + " --bins 6");
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("feature") != std::string::npos);
  const auto parsed = nlohmann::json::parse(slurp(report));
  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == 10);
  for (std::size_t i = 1; i < parsed.size(); ++i)
    CHECK(parsed[i - 1]["combined"].get<double>() >= parsed[i]["combined"].get<double>());

  // csv format by extension
  const fs::path report_csv = temp_file("cli_score.csv");
  CHECK(run_cli("score --input " + csv.string() + " --output " + report_csv.string())
            .exit_code == 0);
  CHECK(slurp(report_csv).rfind("feature,hie,hdd", 0) == 0);
}

TEST_CASE("cli: alpha projections reduce the combined score") {
  const fs::path csv = temp_file("cli_alpha_in.csv");
  REQUIRE(run_cli("simulate --output " + csv.string() + " --n 3000 --seed 3").exit_code == 0);
  const fs::path report = temp_file("cli_alpha.json");
  CHECK(run_cli("score --input " + csv.string() + " --output " + report.string() +
                " --alpha1 1 --alpha2 0")
            .exit_code == 0);
  const auto parsed = nlohmann::json::parse(slurp(report));
  for (const auto& row : parsed)
    CHECK(row["combined"].get<double>() == row["hie_norm"].get<double>());
}

TEST_CASE("cli: missing input exits 2 and names the path") {
  const auto result = run_cli("score --input /no/such/file.csv --output /tmp/x.json");
  CHECK(result.exit_code == 2);
  CHECK(result.err.find("/no/such/file.csv") != std::string::npos);
}

TEST_CASE("cli: invalid data exits 2 with the offending row") {
  const fs::path csv = temp_file("cli_bad.csv");
  std::ofstream(csv) << "arm,reward,x\n0,1,1\n1,2,2\n";
  const auto result = run_cli("score --input " + csv.string() + " --output /tmp/x.json");
  CHECK(result.exit_code == 2);
  CHECK(result.err.find("row 2") != std::string::npos);
}

TEST_CASE("cli: unknown flags exit 1") {
  CHECK(run_cli("score --frobnicate 1").exit_code == 1);
  CHECK(run_cli("").exit_code == 1);
}

TEST_CASE("cli: replay runs end to end, deterministically") {
  const fs::path csv = temp_file("cli_replay_in.csv");
  REQUIRE(run_cli("simulate --output " + csv.string() + " --n 4000 --seed 6").exit_code == 0);
  const fs::path out_a = temp_file("cli_replay_a.json");
  const fs::path out_b = temp_file("cli_replay_b.json");
  const std::string base = "replay --input " + csv.string() +
                           " --policy cohort-ts --feature hte_0 --seed 12 --bins 6 --output ";
  CHECK(run_cli(base + out_a.string()).exit_code == 0);
  CHECK(run_cli(base + out_b.string()).exit_code == 0);
  CHECK(slurp(out_a) == slurp(out_b));
  const auto parsed = nlohmann::json::parse(slurp(out_a));
  CHECK(parsed.contains("matched_count"));
  CHECK(parsed.contains("average_reward"));
  CHECK_FALSE(parsed.contains("duration_seconds"));  // timing is opt-in

  const fs::path timed = temp_file("cli_replay_t.json");
  CHECK(run_cli(base + timed.string() + " --timing").exit_code == 0);
  CHECK(nlohmann::json::parse(slurp(timed)).contains("duration_seconds"));

  CHECK(run_cli("replay --input " + csv.string() +
                " --policy linucb --feature hte_0 --output " + out_a.string())
            .exit_code == 0);
}

TEST_CASE("cli: bench smoke run with deterministic outputs") {
  const fs::path report = temp_file("cli_bench.json");
  const fs::path report2 = temp_file("cli_bench2.json");
  const fs::path plot = temp_file("cli_bench.csv");
  const fs::path plot2 = temp_file("cli_bench2.csv");
  const std::string base = "bench --trials 1 --n 1000 --seed 5 ";
  const auto result = run_cli(base + "--output " + report.string() + " --csv-output " +
                              plot.string());
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("scoring (hie+hdd)") != std::string::npos);
  const auto parsed = nlohmann::json::parse(slurp(report));
  CHECK(parsed["trials"] == 1);
  CHECK(parsed["samples"] == 1000);
  REQUIRE(parsed["rows"].size() == 10);
  for (const auto& row : parsed["rows"]) {
    CHECK(row.contains("class"));
    CHECK(row.contains("reward_linucb"));
    CHECK(row.contains("reward_cohort-ts"));
  }
  CHECK_FALSE(parsed.contains("scoring_seconds"));  // deterministic by default

  CHECK(run_cli(base + "--output " + report2.string() + " --csv-output " + plot2.string())
            .exit_code == 0);
  CHECK(slurp(report) == slurp(report2));
  CHECK(slurp(plot) == slurp(plot2));
  CHECK(slurp(plot).rfind("feature,class,hie,hdd,combined", 0) == 0);

  const fs::path timing = temp_file("cli_bench_timing.json");
  CHECK(run_cli(base + "--output " + report.string() + " --timing-output " + timing.string())
            .exit_code == 0);
  const auto timing_json = nlohmann::json::parse(slurp(timing));
  CHECK(timing_json["scoring_seconds"].get<double>() > 0.0);
}

TEST_CASE("cli: config file supplies defaults, flags win") {
  const fs::path csv = temp_file("cli_cfg_in.csv");
  REQUIRE(run_cli("simulate --output " + csv.string() + " --n 2000 --seed 8").exit_code == 0);
  const fs::path config = temp_file("cli_cfg.json");
  const fs::path report = temp_file("cli_cfg_report.json");
  std::ofstream(config) << nlohmann::json{{"input", csv.string()},
                                          {"output", report.string()},
                                          {"bins", 4},
                                          {"alpha1", 1.0},
                                          {"alpha2", 0.0}};
  CHECK(run_cli("score --config " + config.string()).exit_code == 0);
  auto parsed = nlohmann::json::parse(slurp(report));
  for (const auto& row : parsed) CHECK(row["bins_used"].get<int>() <= 4);
  for (const auto& row : parsed)
    CHECK(row["combined"].get<double>() == row["hie_norm"].get<double>());

  // explicit flag overrides the config value
  CHECK(run_cli("score --config " + config.string() + " --alpha1 0 --alpha2 1").exit_code == 0);
  parsed = nlohmann::json::parse(slurp(report));
  for (const auto& row : parsed)
    CHECK(row["combined"].get<double>() == row["hdd_norm"].get<double>());

  CHECK(run_cli("score --config /no/such/config.json").exit_code == 2);
}

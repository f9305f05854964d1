#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "cmabfs/bandit_log.hpp"
#include "oracles.hpp"

using namespace cmabfs;
namespace fs = std::filesystem;

namespace {

fs::path write_temp_csv(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("ingest: three-row file with one numeric column") {
  const auto path = write_temp_csv("ingest_basic.csv",
                                   "arm,reward,age\n"
                                   "0,1,10\n"
                                   "1,0,20\n"
                                   "0,1,30\n");
  const BanditLog log = ingest_csv(path);
  CHECK(log.size() == 3);
  CHECK(log.arm_count() == 2);
  REQUIRE(log.feature_count() == 1);
  CHECK(log.column(0).kind == FeatureKind::continuous);
  CHECK(log.column(0).numeric == std::vector<double>{10, 20, 30});
  const auto descriptors = log.descriptors();
  REQUIRE(descriptors.size() == 1);
  CHECK(descriptors[0].name == "age");
  CHECK(descriptors[0].column_index == 0);
}

TEST_CASE("ingest: bad reward value names the row") {
  const auto path = write_temp_csv("ingest_bad_reward.csv",
                                   "arm,reward\n0,1\n1,0\n0,0\n1,1\n0,2\n");
  CHECK_THROWS_WITH_AS(ingest_csv(path), doctest::Contains("row 5"), ValidationError);
  try {
    ingest_csv(path);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("reward must be 0 or 1") != std::string::npos);
  }
}

TEST_CASE("ingest: token column auto-types categorical") {
  const auto path = write_temp_csv("ingest_tokens.csv",
                                   "arm,reward,country\n0,1,US\n1,0,CA\n0,1,US\n");
  const BanditLog log = ingest_csv(path);
  CHECK(log.column(0).kind == FeatureKind::categorical);
  CHECK(log.column(0).tokens == std::vector<std::string>{"US", "CA", "US"});
}

TEST_CASE("ingest: quoted numeric cells stay categorical") {
  const auto path = write_temp_csv("ingest_quoted.csv",
                                   "arm,reward,code\n0,1,\"1\"\n1,0,\"2\"\n");
  const BanditLog log = ingest_csv(path);
  CHECK(log.column(0).kind == FeatureKind::categorical);
}

TEST_CASE("ingest: error cases") {
  CHECK_THROWS_WITH_AS(ingest_csv("/nonexistent/file.csv"),
                       doctest::Contains("/nonexistent/file.csv"), ValidationError);

  const auto no_arm = write_temp_csv("ingest_noarm.csv", "id,reward\n0,1\n");
  CHECK_THROWS_WITH_AS(ingest_csv(no_arm), doctest::Contains("arm"), ValidationError);

  const auto no_reward = write_temp_csv("ingest_noreward.csv", "arm,click\n0,1\n");
  CHECK_THROWS_WITH_AS(ingest_csv(no_reward), doctest::Contains("reward"), ValidationError);

  const auto neg_arm = write_temp_csv("ingest_negarm.csv", "arm,reward\n-1,0\n0,1\n");
  CHECK_THROWS_AS(ingest_csv(neg_arm), ValidationError);

  const auto frac_arm = write_temp_csv("ingest_fracarm.csv", "arm,reward\n0.5,0\n1,1\n");
  CHECK_THROWS_AS(ingest_csv(frac_arm), ValidationError);

  // "nan" is not a finite decimal, so unschema'd it auto-types categorical;
  // forced continuous it must fail.
  const auto nan_cell = write_temp_csv("ingest_nan.csv", "arm,reward,x\n0,1,nan\n1,0,2\n");
  CHECK(ingest_csv(nan_cell).column(0).kind == FeatureKind::categorical);
  CsvSchema force;
  force.kinds["x"] = FeatureKind::continuous;
  CHECK_THROWS_WITH_AS(ingest_csv(nan_cell, force), doctest::Contains("row 1"), ValidationError);

  const auto hole = write_temp_csv("ingest_hole.csv", "arm,reward,x\n0,1,1.5\n1,0,\n0,1,2.5\n");
  CsvSchema cont;
  cont.kinds["x"] = FeatureKind::continuous;
  CHECK_THROWS_WITH_AS(ingest_csv(hole, cont), doctest::Contains("row 2"), ValidationError);
}

TEST_CASE("ingest: missing categorical cells become the reserved token") {
  const auto path = write_temp_csv("ingest_missing.csv",
                                   "arm,reward,country\n0,1,US\n1,0,\n0,1,CA\n");
  const BanditLog log = ingest_csv(path);
  CHECK(log.column(0).tokens[1] == kMissingToken);
}

TEST_CASE("ingest: sparse arm ids rejected without an explicit arm count") {
  const auto path = write_temp_csv("ingest_sparse.csv", "arm,reward\n0,1\n2,0\n0,1\n");
  CHECK_THROWS_WITH_AS(ingest_csv(path), doctest::Contains("sparse"), ValidationError);
  CsvSchema schema;
  schema.arm_count = 3;
  const BanditLog log = ingest_csv(path, schema);
  CHECK(log.arm_count() == 3);
  const LogSummary summary = summarize(log);
  CHECK(summary.arms[1].pulls == 0);
  CHECK_FALSE(summary.arms[1].success_rate.has_value());
}

TEST_CASE("ingest: declared arm count below a logged id is an error") {
  const auto path = write_temp_csv("ingest_kcap.csv", "arm,reward\n0,1\n3,0\n");
  CsvSchema schema;
  schema.arm_count = 2;
  CHECK_THROWS_AS(ingest_csv(path, schema), ValidationError);
}

TEST_CASE("BanditLog constructor enforces invariants") {
  CHECK_THROWS_AS(BanditLog(1, {0}, {1}, {}), ValidationError);          // k < 2
  CHECK_THROWS_AS(BanditLog(2, {0, 2}, {1, 0}, {}), ValidationError);   // arm out of range
  CHECK_THROWS_AS(BanditLog(2, {0, 1}, {1, 2}, {}), ValidationError);   // reward not 0/1
  CHECK_THROWS_AS(BanditLog(2, {0}, {1, 0}, {}), ValidationError);      // length mismatch

  FeatureColumn short_col{"x", FeatureKind::continuous, {1.0}, {}};
  CHECK_THROWS_AS(BanditLog(2, {0, 1}, {1, 0}, {short_col}), ValidationError);

  FeatureColumn inf_col{"x", FeatureKind::continuous,
                        {1.0, std::numeric_limits<double>::infinity()}, {}};
  CHECK_THROWS_AS(BanditLog(2, {0, 1}, {1, 0}, {inf_col}), ValidationError);

  FeatureColumn a{"x", FeatureKind::continuous, {1.0, 2.0}, {}};
  FeatureColumn b{"x", FeatureKind::continuous, {3.0, 4.0}, {}};
  CHECK_THROWS_AS(BanditLog(2, {0, 1}, {1, 0}, {a, b}), ValidationError);  // duplicate name
}

TEST_CASE("summarize: per-arm pulls, successes, rates") {
  const BanditLog log(2, {0, 0, 1}, {1, 0, 1}, {});
  const LogSummary summary = summarize(log);
  CHECK(summary.events == 3);
  CHECK(summary.arms[0].pulls == 2);
  CHECK(summary.arms[0].successes == 1);
  CHECK(summary.arms[0].success_rate == 0.5);
  CHECK(summary.arms[1].success_rate == 1.0);
}

TEST_CASE("summarize: empty log flags every arm absent") {
  const BanditLog log(2, {}, {}, {});
  const LogSummary summary = summarize(log);
  CHECK(summary.events == 0);
  for (const auto& arm : summary.arms) {
    CHECK(arm.pulls == 0);
    CHECK_FALSE(arm.success_rate.has_value());
  }
}

TEST_CASE("csv round-trip reproduces the log exactly") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 5; ++rep) {
    BanditLog log = oracles::random_log(rng, 60, 3, 2, 1);
    // Awkward tokens: commas, quotes, unicode, leading spaces.
    {
      std::vector<int> arms(log.arms().begin(), log.arms().end());
      std::vector<std::uint8_t> rewards(log.rewards().begin(), log.rewards().end());
      std::vector<FeatureColumn> columns;
      for (std::size_t f = 0; f < log.feature_count(); ++f) columns.push_back(log.column(f));
      columns[2].tokens[0] = "a,b";
      columns[2].tokens[1] = "with \"quotes\"";
      columns[2].tokens[2] = " spaced ";
      columns[2].tokens[3] = "naïve";
      columns[2].tokens[4] = "line\nbreak";
      columns[0].numeric[0] = -0.0;
      columns[0].numeric[1] = 1e-308;
      columns[0].numeric[2] = 12345678.987654321;
      log = BanditLog(log.arm_count(), std::move(arms), std::move(rewards), std::move(columns));
    }
    const fs::path path = fs::temp_directory_path() / "roundtrip.csv";
    write_csv(log, path);
    const BanditLog back = ingest_csv(path);
    REQUIRE(back.size() == log.size());
    CHECK(back.arm_count() == log.arm_count());
    CHECK(std::equal(back.arms().begin(), back.arms().end(), log.arms().begin()));
    CHECK(std::equal(back.rewards().begin(), back.rewards().end(), log.rewards().begin()));
    REQUIRE(back.feature_count() == log.feature_count());
    for (std::size_t f = 0; f < log.feature_count(); ++f) {
      CHECK(back.column(f).name == log.column(f).name);
      CHECK(back.column(f).kind == log.column(f).kind);
      CHECK(back.column(f).numeric == log.column(f).numeric);
      CHECK(back.column(f).tokens == log.column(f).tokens);
    }
  }
}

TEST_CASE("pull counts sum to the event count") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const BanditLog log = oracles::random_log(rng, 50 + rep * 13, 2 + rep % 3, 1, 0);
    const LogSummary summary = summarize(log);
    std::int64_t total = 0;
    for (const auto& arm : summary.arms) total += arm.pulls;
    CHECK(total == log.size());
  }
}

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cmabfs/replay.hpp"
#include "cmabfs/scoring.hpp"
#include "cmabfs/synthgen.hpp"

namespace cmabfs {

// Synthetic study driver: per trial, generate a log with known feature
// classes, score every feature (timed), and evaluate every feature with each
// policy by replay (timed). Defaults reproduce the benchmark protocol:
// 10 trials of 50000 samples, 3 arms, 5 hte / 2 correlational / 3 irrelevant
// features, 6 quantile bins (aligned with the generator's arm segments).
struct BenchConfig {
  GeneratorConfig generator;
  BinConfig bin{.target_bins = 6};
  CombineConfig combine;
  int trials = 10;
  double alpha_ucb = 1.0;
  std::vector<PolicyKind> policies = {PolicyKind::linucb, PolicyKind::qlinucb,
                                      PolicyKind::cohort_ts};
  std::uint64_t seed = 1;

  void validate() const;
};

struct BenchFeatureRow {
  std::string feature;
  FeatureClass feature_class = FeatureClass::irrelevant;
  // Means across trials.
  double hie = 0.0;
  double hdd = 0.0;
  double combined = 0.0;
  std::map<std::string, double> reward_by_policy;
};

struct BenchReport {
  int trials = 0;
  std::int64_t samples = 0;
  int features = 0;
  // Mean replay reward of the arm with the best overall success rate,
  // ignoring context.
  double global_winner_reward = 0.0;
  std::vector<BenchFeatureRow> rows;  // sorted by mean combined, descending
  std::map<std::string, double> mean_combined_by_class;
  std::map<std::string, double> mean_hie_by_class;
  // Wall-clock totals across trials; ratios are replay time over scoring
  // time for the same feature set.
  double scoring_seconds = 0.0;
  std::map<std::string, double> replay_seconds_by_policy;
  std::map<std::string, double> speedup_by_policy;
};

// Sequential over trials; per-trial and per-replay seeds are pre-split from
// config.seed, so results do not depend on execution order. Timed sections
// run single-threaded.
BenchReport run_benchmark(const BenchConfig& config);

// Deterministic report (scores, rewards, aggregates). Timing fields are
// wall-clock measurements and only included when include_timing is set.
std::string bench_report_to_json(const BenchReport& report, bool include_timing = false);

// Plot-ready table: feature, class, hie, hdd, combined, reward_<policy>...
std::string bench_report_to_csv(const BenchReport& report);

// Timing table alone (always non-deterministic).
std::string bench_timing_to_json(const BenchReport& report);

}  // namespace cmabfs

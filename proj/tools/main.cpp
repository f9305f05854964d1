// cmabfs command line: rank bandit-log features by their contribution to
// heterogeneous treatment effects, generate synthetic benchmark logs,
// replay-evaluate reference policies, and run the timing study.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cmabfs/bench.hpp"
#include "cmabfs/errors.hpp"
#include "cmabfs/replay.hpp"
#include "cmabfs/scoring.hpp"
#include "cmabfs/synthgen.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

// Flat JSON config whose keys match long flag names (without dashes).
// Command-line flags win over config values.
class ConfigDefaults {
 public:
  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cmabfs::ValidationError("cannot open config file: " + path);
    try {
      in >> values_;
    } catch (const nlohmann::json::exception& e) {
      throw cmabfs::ValidationError("config file " + path + ": " + e.what());
    }
    if (!values_.is_object())
      throw cmabfs::ValidationError("config file " + path + " must hold a flat JSON object");
  }

  template <typename T>
  void apply(const CLI::Option* opt, const std::string& key, T& target) const {
    if (opt != nullptr && opt->count() > 0) return;
    if (!values_.contains(key)) return;
    try {
      target = values_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw cmabfs::ValidationError("config key '" + key + "' has the wrong type");
    }
  }

 private:
  nlohmann::json values_ = nlohmann::json::object();
};

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void print_top_reports(const std::vector<cmabfs::FeatureReport>& reports) {
  std::printf("%-24s %12s %12s %10s %6s %7s\n", "feature", "hie", "hdd", "combined", "bins",
              "merges");
  const std::size_t shown = std::min<std::size_t>(reports.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& r = reports[i];
    std::printf("%-24s %12.6f %12.6f %10.4f %6d %7d\n", r.feature.c_str(), r.hie, r.hdd,
                r.combined, r.bins_used, r.merges);
  }
  if (reports.size() > shown)
    std::printf("... (%zu more)\n", reports.size() - shown);
}

struct ScoreArgs {
  std::string input;
  std::string output;
  std::string format;  // "", "json", "csv"
  std::string arm_column = "arm";
  std::string reward_column = "reward";
  std::optional<int> arm_count;
  cmabfs::BinConfig bin;
  cmabfs::CombineConfig combine;
  std::string hie_offset = "global";
};

int run_score(const ScoreArgs& args) {
  cmabfs::CsvSchema schema;
  schema.arm_column = args.arm_column;
  schema.reward_column = args.reward_column;
  schema.arm_count = args.arm_count;
  cmabfs::CombineConfig combine = args.combine;
  if (args.hie_offset == "global") {
    combine.hie_offset = cmabfs::HieOffset::global;
  } else if (args.hie_offset == "per-bin" || args.hie_offset == "per_bin") {
    combine.hie_offset = cmabfs::HieOffset::per_bin;
  } else {
    throw cmabfs::ValidationError("--hie-offset must be global or per-bin");
  }

  const cmabfs::BanditLog log = cmabfs::ingest_csv(args.input, schema);
  const auto reports = cmabfs::score_all_features(log, args.bin, combine);

  std::string format = args.format;
  if (format.empty())
    format = std::filesystem::path(args.output).extension() == ".csv" ? "csv" : "json";
  if (format == "json") {
    write_text_file(args.output, cmabfs::reports_to_json(reports));
  } else if (format == "csv") {
    write_text_file(args.output, cmabfs::reports_to_csv(reports));
  } else {
    throw cmabfs::ValidationError("--format must be json or csv");
  }
  print_top_reports(reports);
  return kExitOk;
}

struct SimulateArgs {
  cmabfs::GeneratorConfig gen;
  std::string output;
  std::string truth_output;
};

int run_simulate(const SimulateArgs& args) {
  auto [log, truth] = cmabfs::generate(args.gen);
  cmabfs::write_csv(log, args.output);
  const std::string truth_path =
      args.truth_output.empty() ? args.output + ".truth.json" : args.truth_output;
  write_text_file(truth_path, cmabfs::ground_truth_to_json(args.gen, truth));
  std::printf("wrote %lld events, %d arms, %d features -> %s (truth: %s)\n",
              static_cast<long long>(log.size()), log.arm_count(),
              static_cast<int>(log.feature_count()), args.output.c_str(), truth_path.c_str());
  return kExitOk;
}

struct ReplayArgs {
  std::string input;
  std::string output;
  std::string policy = "cohort-ts";
  std::string feature;
  cmabfs::ReplayConfig config;
  bool timing = false;
};

int run_replay(const ReplayArgs& args) {
  cmabfs::ReplayConfig config = args.config;
  config.policy = cmabfs::policy_kind_from_string(args.policy);
  config.features = {args.feature};
  const cmabfs::BanditLog log = cmabfs::ingest_csv(args.input);
  const cmabfs::ReplayResult result = cmabfs::replay_evaluate(log, config);
  write_text_file(args.output, cmabfs::replay_result_to_json(result, args.timing));
  std::printf("policy=%s feature=%s matched=%lld avg_reward=%.6f (%.3fs)\n", args.policy.c_str(),
              args.feature.c_str(), static_cast<long long>(result.matched_count),
              result.average_reward, result.duration_seconds);
  return kExitOk;
}

struct BenchArgs {
  cmabfs::BenchConfig config;
  std::vector<std::string> policies;
  std::string output;
  std::string csv_output;
  std::string timing_output;
  bool timing_in_report = false;
};

int run_bench(const BenchArgs& args) {
  cmabfs::BenchConfig config = args.config;
  if (!args.policies.empty()) {
    config.policies.clear();
    for (const auto& name : args.policies)
      config.policies.push_back(cmabfs::policy_kind_from_string(name));
  }
  const cmabfs::BenchReport report = cmabfs::run_benchmark(config);

  if (!args.output.empty())
    write_text_file(args.output, cmabfs::bench_report_to_json(report, args.timing_in_report));
  if (!args.csv_output.empty())
    write_text_file(args.csv_output, cmabfs::bench_report_to_csv(report));
  if (!args.timing_output.empty())
    write_text_file(args.timing_output, cmabfs::bench_timing_to_json(report));

  std::printf("trials=%d samples=%lld features=%d\n", report.trials,
              static_cast<long long>(report.samples), report.features);
  std::printf("%-22s %10s %10s\n", "method", "seconds", "vs scoring");
  std::printf("%-22s %10.3f %10s\n", "scoring (hie+hdd)", report.scoring_seconds, "1.0x");
  for (const auto& [key, seconds] : report.replay_seconds_by_policy)
    std::printf("%-22s %10.3f %9.1fx\n", (key + " replay").c_str(), seconds,
                report.speedup_by_policy.count(key) ? report.speedup_by_policy.at(key) : 0.0);
  std::printf("\nmean combined score by class:\n");
  for (const auto& [cls, value] : report.mean_combined_by_class)
    std::printf("  %-14s %.4f\n", cls.c_str(), value);
  std::printf("global-winner baseline reward: %.4f\n", report.global_winner_reward);
  std::printf("\n%-24s %-14s %10s %10s %10s\n", "feature", "class", "hie", "hdd", "combined");
  for (const auto& row : report.rows)
    std::printf("%-24s %-14s %10.5f %10.5f %10.4f\n", row.feature.c_str(),
                cmabfs::to_string(row.feature_class).c_str(), row.hie, row.hdd, row.combined);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature importance for contextual bandits via heterogeneous treatment effects"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "Flat JSON config; keys match long flag names")
      ->expected(1);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Rank the features of a logged-bandit CSV");
  auto* score_in = score_cmd->add_option("--input", score.input, "Input CSV");
  auto* score_out = score_cmd->add_option("--output", score.output, "Report path (.json or .csv)");
  auto* score_fmt = score_cmd->add_option("--format", score.format, "json|csv");
  auto* score_bins = score_cmd->add_option("--bins", score.bin.target_bins, "Quantile bins");
  auto* score_maxcat =
      score_cmd->add_option("--max-categories", score.bin.max_categories, "Categorical bin cap");
  auto* score_minarm = score_cmd->add_option("--min-arm-samples", score.bin.min_arm_samples,
                                             "Minimum pulls per (bin, arm)");
  auto* score_a1 = score_cmd->add_option("--alpha1", score.combine.alpha1, "Weight on hie_norm");
  auto* score_a2 = score_cmd->add_option("--alpha2", score.combine.alpha2, "Weight on hdd_norm");
  auto* score_clamp =
      score_cmd->add_option("--kl-clamp", score.combine.kl_clamp, "KL probability floor");
  auto* score_offset =
      score_cmd->add_option("--hie-offset", score.hie_offset, "global|per-bin baseline reading");
  auto* score_armcol = score_cmd->add_option("--arm-column", score.arm_column, "Arm column name");
  auto* score_rewcol =
      score_cmd->add_option("--reward-column", score.reward_column, "Reward column name");
  int score_arms = 0;
  auto* score_k = score_cmd->add_option("--arms", score_arms, "Declared arm count");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic benchmark log");
  auto* sim_out = sim_cmd->add_option("--output", sim.output, "Log CSV path");
  auto* sim_truth =
      sim_cmd->add_option("--truth-output", sim.truth_output, "Ground-truth JSON sidecar path");
  auto* sim_n = sim_cmd->add_option("--n", sim.gen.samples, "Event count");
  auto* sim_k = sim_cmd->add_option("--arms", sim.gen.arm_count, "Arm count");
  auto* sim_hte = sim_cmd->add_option("--hte", sim.gen.hte_features, "HTE feature count");
  auto* sim_corr =
      sim_cmd->add_option("--corr", sim.gen.correlational_features, "Correlational features");
  auto* sim_irrel =
      sim_cmd->add_option("--irrel", sim.gen.irrelevant_features, "Irrelevant features");
  auto* sim_effect = sim_cmd->add_option("--effect", sim.gen.effect, "HTE amplitude");
  auto* sim_base = sim_cmd->add_option("--base", sim.gen.base_rate, "Baseline success rate");
  auto* sim_seed = sim_cmd->add_option("--seed", sim.gen.seed, "RNG seed");

  ReplayArgs replay;
  auto* replay_cmd = app.add_subcommand("replay", "Offline matching evaluation of one policy");
  auto* replay_in = replay_cmd->add_option("--input", replay.input, "Input CSV");
  auto* replay_policy =
      replay_cmd->add_option("--policy", replay.policy, "linucb|qlinucb|cohort-ts");
  auto* replay_feature = replay_cmd->add_option("--feature", replay.feature, "Context feature");
  auto* replay_alpha =
      replay_cmd->add_option("--alpha-ucb", replay.config.alpha_ucb, "LinUCB exploration weight");
  auto* replay_seed = replay_cmd->add_option("--seed", replay.config.seed, "RNG seed");
  auto* replay_out = replay_cmd->add_option("--output", replay.output, "Result JSON path");
  auto* replay_bins =
      replay_cmd->add_option("--bins", replay.config.bin.target_bins, "Cohort bins");
  auto* replay_timing =
      replay_cmd->add_flag("--timing", replay.timing, "Include wall-clock duration in the JSON");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Synthetic study: scores vs replay rewards");
  auto* bench_n = bench_cmd->add_option("--n", bench.config.generator.samples, "Events per trial");
  auto* bench_k = bench_cmd->add_option("--arms", bench.config.generator.arm_count, "Arm count");
  auto* bench_hte =
      bench_cmd->add_option("--hte", bench.config.generator.hte_features, "HTE features");
  auto* bench_corr = bench_cmd->add_option("--corr", bench.config.generator.correlational_features,
                                           "Correlational features");
  auto* bench_irrel = bench_cmd->add_option(
      "--irrel", bench.config.generator.irrelevant_features, "Irrelevant features");
  auto* bench_effect =
      bench_cmd->add_option("--effect", bench.config.generator.effect, "HTE amplitude");
  auto* bench_base =
      bench_cmd->add_option("--base", bench.config.generator.base_rate, "Baseline success rate");
  auto* bench_trials = bench_cmd->add_option("--trials", bench.config.trials, "Trial count");
  auto* bench_seed = bench_cmd->add_option("--seed", bench.config.seed, "Master seed");
  auto* bench_bins = bench_cmd->add_option("--bins", bench.config.bin.target_bins,
                                           "Quantile bins (protocol default 6)");
  auto* bench_minarm = bench_cmd->add_option(
      "--min-arm-samples", bench.config.bin.min_arm_samples, "Minimum pulls per (bin, arm)");
  auto* bench_a1 =
      bench_cmd->add_option("--alpha1", bench.config.combine.alpha1, "Weight on hie_norm");
  auto* bench_a2 =
      bench_cmd->add_option("--alpha2", bench.config.combine.alpha2, "Weight on hdd_norm");
  auto* bench_alpha =
      bench_cmd->add_option("--alpha-ucb", bench.config.alpha_ucb, "LinUCB exploration weight");
  auto* bench_policies = bench_cmd->add_option(
      "--policies", bench.policies, "Policies to replay (default: linucb qlinucb cohort-ts)");
  auto* bench_out = bench_cmd->add_option("--output", bench.output, "Report JSON path");
  auto* bench_csv = bench_cmd->add_option("--csv-output", bench.csv_output, "Plot-ready CSV path");
  auto* bench_timing_out =
      bench_cmd->add_option("--timing-output", bench.timing_output, "Timing JSON path");
  auto* bench_timing_flag = bench_cmd->add_flag("--timing", bench.timing_in_report,
                                                "Include wall-clock timing in the report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    ConfigDefaults config;
    if (!config_path.empty()) config.load(config_path);

    if (score_cmd->parsed()) {
      config.apply(score_in, "input", score.input);
      config.apply(score_out, "output", score.output);
      config.apply(score_fmt, "format", score.format);
      config.apply(score_bins, "bins", score.bin.target_bins);
      config.apply(score_maxcat, "max-categories", score.bin.max_categories);
      config.apply(score_minarm, "min-arm-samples", score.bin.min_arm_samples);
      config.apply(score_a1, "alpha1", score.combine.alpha1);
      config.apply(score_a2, "alpha2", score.combine.alpha2);
      config.apply(score_clamp, "kl-clamp", score.combine.kl_clamp);
      config.apply(score_offset, "hie-offset", score.hie_offset);
      config.apply(score_armcol, "arm-column", score.arm_column);
      config.apply(score_rewcol, "reward-column", score.reward_column);
      config.apply(score_k, "arms", score_arms);
      if (score_k->count() > 0 || score_arms > 0) score.arm_count = score_arms;
      if (score.input.empty()) throw cmabfs::ValidationError("score requires --input");
      if (score.output.empty()) throw cmabfs::ValidationError("score requires --output");
      return run_score(score);
    }
    if (sim_cmd->parsed()) {
      config.apply(sim_out, "output", sim.output);
      config.apply(sim_truth, "truth-output", sim.truth_output);
      config.apply(sim_n, "n", sim.gen.samples);
      config.apply(sim_k, "arms", sim.gen.arm_count);
      config.apply(sim_hte, "hte", sim.gen.hte_features);
      config.apply(sim_corr, "corr", sim.gen.correlational_features);
      config.apply(sim_irrel, "irrel", sim.gen.irrelevant_features);
      config.apply(sim_effect, "effect", sim.gen.effect);
      config.apply(sim_base, "base", sim.gen.base_rate);
      config.apply(sim_seed, "seed", sim.gen.seed);
      if (sim.output.empty()) throw cmabfs::ValidationError("simulate requires --output");
      sim.gen.validate();
      return run_simulate(sim);
    }
    if (replay_cmd->parsed()) {
      config.apply(replay_in, "input", replay.input);
      config.apply(replay_policy, "policy", replay.policy);
      config.apply(replay_feature, "feature", replay.feature);
      config.apply(replay_alpha, "alpha-ucb", replay.config.alpha_ucb);
      config.apply(replay_seed, "seed", replay.config.seed);
      config.apply(replay_out, "output", replay.output);
      config.apply(replay_bins, "bins", replay.config.bin.target_bins);
      config.apply(replay_timing, "timing", replay.timing);
      if (replay.input.empty()) throw cmabfs::ValidationError("replay requires --input");
      if (replay.feature.empty()) throw cmabfs::ValidationError("replay requires --feature");
      if (replay.output.empty()) throw cmabfs::ValidationError("replay requires --output");
      return run_replay(replay);
    }
    if (bench_cmd->parsed()) {
      config.apply(bench_n, "n", bench.config.generator.samples);
      config.apply(bench_k, "arms", bench.config.generator.arm_count);
      config.apply(bench_hte, "hte", bench.config.generator.hte_features);
      config.apply(bench_corr, "corr", bench.config.generator.correlational_features);
      config.apply(bench_irrel, "irrel", bench.config.generator.irrelevant_features);
      config.apply(bench_effect, "effect", bench.config.generator.effect);
      config.apply(bench_base, "base", bench.config.generator.base_rate);
      config.apply(bench_trials, "trials", bench.config.trials);
      config.apply(bench_seed, "seed", bench.config.seed);
      config.apply(bench_bins, "bins", bench.config.bin.target_bins);
      config.apply(bench_minarm, "min-arm-samples", bench.config.bin.min_arm_samples);
      config.apply(bench_a1, "alpha1", bench.config.combine.alpha1);
      config.apply(bench_a2, "alpha2", bench.config.combine.alpha2);
      config.apply(bench_alpha, "alpha-ucb", bench.config.alpha_ucb);
      config.apply(bench_policies, "policies", bench.policies);
      config.apply(bench_out, "output", bench.output);
      config.apply(bench_csv, "csv-output", bench.csv_output);
      config.apply(bench_timing_out, "timing-output", bench.timing_output);
      config.apply(bench_timing_flag, "timing", bench.timing_in_report);
      return run_bench(bench);
    }
    return kExitUsage;
  } catch (const cmabfs::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

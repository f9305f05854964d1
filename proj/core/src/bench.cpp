#include "cmabfs/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cmabfs {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 1));
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void BenchConfig::validate() const {
  generator.validate();
  bin.validate();
  combine.validate();
  if (trials < 1) throw ValidationError("trials must be at least 1");
  if (alpha_ucb < 0) throw ValidationError("alpha_ucb must be >= 0");
}

BenchReport run_benchmark(const BenchConfig& config) {
  config.validate();
  const int feature_count = config.generator.feature_count();

  BenchReport report;
  report.trials = config.trials;
  report.samples = config.generator.samples;
  report.features = feature_count;

  // Untimed warmup so one-time costs (page faults, lazy binding, allocator
  // growth) and frequency-governor ramp-up stay out of the timing table.
  // Repeats until enough busy wall time has passed for clocks to settle.
  {
    GeneratorConfig warm = config.generator;
    warm.samples = std::min<std::int64_t>(warm.samples, 5000);
    warm.seed = mix(config.seed, 0xfeedULL);
    auto [warm_log, warm_truth] = generate(warm);
    const auto warm_start = std::chrono::steady_clock::now();
    do {
      score_all_features(warm_log, config.bin, config.combine);
      for (const PolicyKind kind : config.policies) {
        ReplayConfig rc;
        rc.policy = kind;
        rc.features = {warm_log.column(0).name};
        rc.alpha_ucb = config.alpha_ucb;
        rc.bin = config.bin;
        rc.seed = mix(config.seed, 0xbeefULL);
        replay_evaluate(warm_log, rc);
      }
    } while (elapsed_seconds(warm_start) < 0.2);
  }

  // Accumulators keyed by feature position (stable across trials).
  std::vector<BenchFeatureRow> rows(static_cast<std::size_t>(feature_count));
  std::vector<std::string> names;
  double baseline_sum = 0.0;

  for (int t = 0; t < config.trials; ++t) {
    GeneratorConfig gen = config.generator;
    gen.seed = mix(config.seed, static_cast<std::uint64_t>(t));
    auto [log, truth] = generate(gen);
    if (names.empty()) {
      for (std::size_t f = 0; f < log.feature_count(); ++f) {
        names.push_back(log.column(f).name);
        rows[f].feature = names.back();
        rows[f].feature_class = truth.classes[f];
      }
    }

    const auto score_start = std::chrono::steady_clock::now();
    const std::vector<FeatureReport> reports =
        score_all_features(log, config.bin, config.combine);
    report.scoring_seconds += elapsed_seconds(score_start);

    for (const FeatureReport& r : reports) {
      const auto idx = log.column_index(r.feature);
      auto& row = rows[*idx];
      row.hie += r.hie;
      row.hdd += r.hdd;
      row.combined += r.combined;
    }

    for (std::size_t p = 0; p < config.policies.size(); ++p) {
      const PolicyKind kind = config.policies[p];
      const std::string key = to_string(kind);
      const auto replay_start = std::chrono::steady_clock::now();
      for (std::size_t f = 0; f < names.size(); ++f) {
        ReplayConfig rc;
        rc.policy = kind;
        rc.features = {names[f]};
        rc.alpha_ucb = config.alpha_ucb;
        rc.bin = config.bin;
        rc.seed = mix(mix(gen.seed, 0x7000 + p), f);
        const ReplayResult result = replay_evaluate(log, rc);
        rows[f].reward_by_policy[key] += result.average_reward;
      }
      report.replay_seconds_by_policy[key] += elapsed_seconds(replay_start);
    }

    // Context-free baseline: always play the arm with the best overall
    // success rate. Its replay reward equals that rate by construction.
    const LogSummary summary = summarize(log);
    int winner = 0;
    double best_rate = -1.0;
    for (const ArmSummary& arm : summary.arms) {
      if (arm.success_rate && *arm.success_rate > best_rate) {
        best_rate = *arm.success_rate;
        winner = arm.arm;
      }
    }
    const ReplayResult baseline = replay_loop(
        log.arms(), log.rewards(), [&](std::size_t) { return winner; },
        [](std::size_t, int, int) {});
    baseline_sum += baseline.average_reward;
  }

  const double trials = static_cast<double>(config.trials);
  report.global_winner_reward = baseline_sum / trials;
  std::map<std::string, double> class_combined_sum, class_hie_sum;
  std::map<std::string, int> class_count;
  for (auto& row : rows) {
    row.hie /= trials;
    row.hdd /= trials;
    row.combined /= trials;
    for (auto& [key, value] : row.reward_by_policy) value /= trials;
    const std::string cls = to_string(row.feature_class);
    class_combined_sum[cls] += row.combined;
    class_hie_sum[cls] += row.hie;
    ++class_count[cls];
  }
  for (const auto& [cls, count] : class_count) {
    report.mean_combined_by_class[cls] = class_combined_sum[cls] / count;
    report.mean_hie_by_class[cls] = class_hie_sum[cls] / count;
  }

  std::sort(rows.begin(), rows.end(), [](const BenchFeatureRow& a, const BenchFeatureRow& b) {
    if (a.combined != b.combined) return a.combined > b.combined;
    return a.feature < b.feature;
  });
  report.rows = std::move(rows);

  if (report.scoring_seconds > 0)
    for (const auto& [key, seconds] : report.replay_seconds_by_policy)
      report.speedup_by_policy[key] = seconds / report.scoring_seconds;
  return report;
}

std::string bench_report_to_json(const BenchReport& report, bool include_timing) {
  nlohmann::ordered_json j;
  j["trials"] = report.trials;
  j["samples"] = report.samples;
  j["features"] = report.features;
  j["global_winner_reward"] = report.global_winner_reward;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const BenchFeatureRow& row : report.rows) {
    nlohmann::ordered_json r{{"feature", row.feature},
                             {"class", to_string(row.feature_class)},
                             {"hie", row.hie},
                             {"hdd", row.hdd},
                             {"combined", row.combined}};
    for (const auto& [key, value] : row.reward_by_policy) r["reward_" + key] = value;
    rows.push_back(std::move(r));
  }
  j["rows"] = rows;
  j["mean_combined_by_class"] = report.mean_combined_by_class;
  j["mean_hie_by_class"] = report.mean_hie_by_class;
  if (include_timing) {
    j["scoring_seconds"] = report.scoring_seconds;
    j["replay_seconds"] = report.replay_seconds_by_policy;
    j["speedup"] = report.speedup_by_policy;
  }
  return j.dump(2) + "\n";
}

std::string bench_report_to_csv(const BenchReport& report) {
  auto num = [](double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
  };
  std::vector<std::string> policy_keys;
  if (!report.rows.empty())
    for (const auto& [key, value] : report.rows.front().reward_by_policy)
      policy_keys.push_back(key);
  std::ostringstream os;
  os << "feature,class,hie,hdd,combined";
  for (const auto& key : policy_keys) os << ",reward_" << key;
  os << '\n';
  for (const BenchFeatureRow& row : report.rows) {
    os << row.feature << ',' << to_string(row.feature_class) << ',' << num(row.hie) << ','
       << num(row.hdd) << ',' << num(row.combined);
    for (const auto& key : policy_keys) os << ',' << num(row.reward_by_policy.at(key));
    os << '\n';
  }
  return os.str();
}

std::string bench_timing_to_json(const BenchReport& report) {
  nlohmann::ordered_json j;
  j["trials"] = report.trials;
  j["samples"] = report.samples;
  j["features"] = report.features;
  j["scoring_seconds"] = report.scoring_seconds;
  j["replay_seconds"] = report.replay_seconds_by_policy;
  j["speedup"] = report.speedup_by_policy;
  return j.dump(2) + "\n";
}

}  // namespace cmabfs

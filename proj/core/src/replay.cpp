#include "cmabfs/replay.hpp"

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace cmabfs {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::linucb: return "linucb";
    case PolicyKind::qlinucb: return "qlinucb";
    case PolicyKind::cohort_ts: return "cohort-ts";
  }
  return "cohort-ts";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "linucb") return PolicyKind::linucb;
  if (name == "qlinucb") return PolicyKind::qlinucb;
  if (name == "cohort-ts" || name == "cohort_ts") return PolicyKind::cohort_ts;
  throw ValidationError("unknown policy '" + name + "' (expected linucb|qlinucb|cohort-ts)");
}

namespace {

// Flags logs whose arm allocation looks far from uniform; the matching
// estimator is only unbiased under uniform logging.
bool looks_uniform(const BanditLog& log) {
  if (log.size() == 0) return true;
  const double n = static_cast<double>(log.size());
  const int k = log.arm_count();
  std::vector<std::int64_t> pulls(static_cast<std::size_t>(k), 0);
  for (int a : log.arms()) ++pulls[static_cast<std::size_t>(a)];
  const double expected = n / k;
  const double sigma = std::sqrt(n * (1.0 / k) * (1.0 - 1.0 / k));
  for (int a = 0; a < k; ++a)
    if (std::abs(static_cast<double>(pulls[static_cast<std::size_t>(a)]) - expected) >
        5.0 * sigma + 1.0)
      return false;
  return true;
}

}  // namespace

Eigen::MatrixXd build_linear_contexts(const BanditLog& log,
                                      std::span<const std::string> features,
                                      const BinConfig& bin_config, bool quadratic) {
  const std::size_t n = static_cast<std::size_t>(log.size());
  std::vector<std::vector<double>> base_columns;
  for (const std::string& name : features) {
    const FeatureColumn& col = log.column(name);
    if (col.kind == FeatureKind::continuous) {
      const double mean =
          std::accumulate(col.numeric.begin(), col.numeric.end(), 0.0) / static_cast<double>(n);
      double var = 0.0;
      for (double v : col.numeric) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / static_cast<double>(n));
      std::vector<double> standardized(n, 0.0);
      if (sd > 0)
        for (std::size_t e = 0; e < n; ++e) standardized[e] = (col.numeric[e] - mean) / sd;
      base_columns.push_back(std::move(standardized));
    } else {
      // One indicator column per bin.
      const BinAssignment assignment = bin_categorical(col.tokens, bin_config, col.name);
      for (int b = 0; b < assignment.bin_count; ++b) {
        std::vector<double> indicator(n, 0.0);
        for (std::size_t e = 0; e < n; ++e)
          if (assignment.bins[e] == b) indicator[e] = 1.0;
        base_columns.push_back(std::move(indicator));
      }
    }
  }

  const std::size_t d = base_columns.size();
  const std::size_t width = (quadratic ? 2 * d : d) + 1;  // + intercept
  Eigen::MatrixXd contexts(n, width);
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t e = 0; e < n; ++e) contexts(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(c)) = base_columns[c][e];
  if (quadratic)
    for (std::size_t c = 0; c < d; ++c)
      for (std::size_t e = 0; e < n; ++e)
        contexts(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(d + c)) =
            base_columns[c][e] * base_columns[c][e];
  contexts.col(static_cast<Eigen::Index>(width - 1)).setOnes();
  return contexts;
}

ReplayResult replay_evaluate(const BanditLog& log, const ReplayConfig& config) {
  if (config.features.empty()) throw ValidationError("replay needs at least one feature");
  for (const std::string& name : config.features) log.column(name);  // throws on unknown names
  config.bin.validate();

  ReplayResult result;
  const auto arms = log.arms();
  const auto rewards = log.rewards();

  if (config.policy == PolicyKind::cohort_ts) {
    if (config.features.size() != 1)
      throw ValidationError("cohort-ts replay takes exactly one feature");
    const FeatureColumn& col = log.column(config.features.front());
    const BinAssignment assignment =
        col.kind == FeatureKind::continuous
            ? bin_continuous(col.numeric, config.bin, col.name)
            : bin_categorical(col.tokens, config.bin, col.name);
    CohortTSPolicy policy(log.arm_count(), assignment.bin_count, config.seed);
    result = replay_loop(
        arms, rewards, [&](std::size_t i) { return policy.select(assignment.bins[i]); },
        [&](std::size_t i, int arm, int reward) { policy.update(assignment.bins[i], arm, reward); });
  } else {
    const bool quadratic = config.policy == PolicyKind::qlinucb;
    const Eigen::MatrixXd contexts =
        build_linear_contexts(log, config.features, config.bin, quadratic);
    LinUCBPolicy policy(log.arm_count(), static_cast<int>(contexts.cols()), config.alpha_ucb);
    result = replay_loop(
        arms, rewards,
        [&](std::size_t i) { return policy.select(contexts.row(static_cast<Eigen::Index>(i)).transpose()); },
        [&](std::size_t i, int arm, int reward) {
          policy.update(arm, contexts.row(static_cast<Eigen::Index>(i)).transpose(), reward);
        });
  }

  if (!looks_uniform(log)) result.flags.push_back("non_uniform_logging");
  return result;
}

std::string replay_result_to_json(const ReplayResult& result, bool include_timing) {
  nlohmann::ordered_json j{{"matched_count", result.matched_count},
                           {"matched_reward_sum", result.matched_reward_sum},
                           {"average_reward", result.average_reward},
                           {"flags", result.flags}};
  if (include_timing) j["duration_seconds"] = result.duration_seconds;
  return j.dump(2) + "\n";
}

}  // namespace cmabfs

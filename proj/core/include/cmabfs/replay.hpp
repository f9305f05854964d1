#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmabfs/bandit_log.hpp"
#include "cmabfs/binning.hpp"
#include "cmabfs/policies.hpp"

namespace cmabfs {

enum class PolicyKind { linucb, qlinucb, cohort_ts };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);  // throws ValidationError

struct ReplayConfig {
  PolicyKind policy = PolicyKind::cohort_ts;
  // Feature subset forming the context. cohort_ts requires exactly one
  // feature; LinUCB variants accept several.
  std::vector<std::string> features;
  double alpha_ucb = 1.0;
  std::uint64_t seed = 1;
  // Used to bin the cohort feature (and to one-hot categorical features for
  // LinUCB variants).
  BinConfig bin;
};

struct ReplayResult {
  std::int64_t matched_count = 0;
  std::int64_t matched_reward_sum = 0;
  // matched_reward_sum / matched_count, 0 when nothing matched.
  double average_reward = 0.0;
  double duration_seconds = 0.0;
  // "no_matches", "non_uniform_logging"
  std::vector<std::string> flags;
};

// Offline matching evaluation: one pass in log order; the policy selects an
// arm from the event's context, and only when the selection equals the
// logged arm is the reward counted and the policy updated. Under uniform
// logging this estimates the policy's online average reward; a
// non-uniform-looking log is flagged, not rejected.
//
// Context construction: continuous features are standardized over the log
// with an intercept appended for LinUCB variants (qlinucb squares the
// standardized values first); categorical features are one-hot encoded over
// their bins; cohort_ts uses the feature's bin index directly.
ReplayResult replay_evaluate(const BanditLog& log, const ReplayConfig& config);

std::string replay_result_to_json(const ReplayResult& result, bool include_timing = false);

// ---------------------------------------------------------------------------
// Generic replay loop, exposed so callers can evaluate custom policies (a
// fixed-arm baseline, test stubs) with the exact same matching estimator.
// select(i) proposes an arm for event i; update(i, arm, reward) runs only on
// matched events.
// ---------------------------------------------------------------------------
template <typename SelectFn, typename UpdateFn>
ReplayResult replay_loop(std::span<const int> arms, std::span<const std::uint8_t> rewards,
                         SelectFn&& select, UpdateFn&& update) {
  ReplayResult result;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const int chosen = select(i);
    if (chosen != arms[i]) continue;
    const int reward = rewards[i];
    ++result.matched_count;
    result.matched_reward_sum += reward;
    update(i, chosen, reward);
  }
  const auto stop = std::chrono::steady_clock::now();
  result.duration_seconds = std::chrono::duration<double>(stop - start).count();
  if (result.matched_count > 0) {
    result.average_reward =
        static_cast<double>(result.matched_reward_sum) / static_cast<double>(result.matched_count);
  } else {
    result.flags.push_back("no_matches");
  }
  return result;
}

// Standardized continuous values (mean 0, unit variance over the log;
// constant columns become all zeros) or one-hot bins for categorical
// columns, with an intercept appended. Shared by the LinUCB replay paths.
Eigen::MatrixXd build_linear_contexts(const BanditLog& log,
                                      std::span<const std::string> features,
                                      const BinConfig& bin_config, bool quadratic);

}  // namespace cmabfs

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmabfs/bandit_log.hpp"

namespace cmabfs {

enum class FeatureClass { hte, correlational, irrelevant };

std::string to_string(FeatureClass c);

// Synthetic logged-bandit benchmark with three feature classes:
//  - hte features flip which arm is best across their value range,
//  - correlational features shift the success rate of every arm equally,
//  - irrelevant features never enter the reward model.
//
// Reward model, all features x ~ iid Uniform(0,1), logged arm uniform on k:
//   P(Y=1 | arm a, x) = clip(base_rate + corr(x) + effect * g_a(x), 0.01, 0.99)
//   corr(x)  = (effect / d_corr) * sum_corr 2 * (x_j - 0.5)
//   g_a(x)   = mean over hte features j of: +1 if x_j falls in the segment of
//              [0,1) (split into k equal parts) owned by arm a for feature j,
//              else -1/(k-1). Segment ownership cycles with j so the features
//              are not redundant: segment s of feature j favors arm (s+j) % k.
struct GeneratorConfig {
  std::int64_t samples = 50000;
  int arm_count = 3;
  int hte_features = 5;
  int correlational_features = 2;
  int irrelevant_features = 3;
  // Amplitude of the heterogeneous effect (and of the correlational shift).
  double effect = 0.24;
  double base_rate = 0.5;
  std::uint64_t seed = 1;

  int feature_count() const { return hte_features + correlational_features + irrelevant_features; }
  // Throws ValidationError; in particular base_rate +- (effect + the maximal
  // correlational shift) must stay inside (0, 1).
  void validate() const;
};

struct GroundTruth {
  std::vector<FeatureClass> classes;  // per feature, by column index
  std::vector<int> best_arm;          // per event, argmax of the noiseless reward model
};

// Deterministic in the seed. Feature columns are named hte_0.., corr_0..,
// irrel_0.. in class order.
std::pair<BanditLog, GroundTruth> generate(const GeneratorConfig& config);

// argmax over arms of the noiseless P(Y=1 | arm, features); ties go to the
// lowest arm id. `features` must hold config.feature_count() values in [0,1].
int true_best_arm(const GeneratorConfig& config, std::span<const double> features);

// Ground-truth sidecar: config echo, per-feature classes, per-event best arm.
std::string ground_truth_to_json(const GeneratorConfig& config, const GroundTruth& truth);

}  // namespace cmabfs

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmabfs/binning.hpp"

namespace cmabfs {

// Two readings of the baseline term subtracted inside the incremental-effect
// score: the global winner's overall success rate (constant across bins, the
// default) or its per-bin success rate.
enum class HieOffset { global, per_bin };

struct CombineConfig {
  double alpha1 = 0.5;  // weight on the normalized incremental-effect score
  double alpha2 = 0.5;  // weight on the normalized divergence score
  // Probability floor for KL terms; estimates are clamped to
  // [kl_clamp, 1 - kl_clamp] so every divergence is finite.
  double kl_clamp = 1e-6;
  HieOffset hie_offset = HieOffset::global;

  void validate() const;  // throws ValidationError (requires alpha1 + alpha2 > 0)
};

struct FeatureReport {
  std::string feature;
  double hie = 0.0;
  double hdd = 0.0;
  double hie_norm = 0.0;
  double hdd_norm = 0.0;
  double combined = 0.0;
  int bins_used = 1;
  int merges = 0;
  // "constant_feature", "merged_bins", "single_bin"
  std::vector<std::string> flags;
};

// argmax over arms with at least one pull; ties go to the lowest arm id.
// Throws ValidationError when no arm has a defined probability.
int winning_arm(std::span<const double> probabilities, std::span<const std::int64_t> pulls);

// KL divergence between Bernoulli(p) and Bernoulli(q) in nats, with both
// parameters clamped to [clamp, 1 - clamp]. Always finite and >= 0;
// exactly 0 when p == q.
double pairwise_kl(double p, double q, double clamp);

// Pull-weighted double sum of pairwise KL divergences across arms:
//   sum_i sum_j (n_i * n_j / total^2) * KL(p_i, p_j).
// Diagonal terms and arms with zero pulls contribute nothing.
double generalized_divergence(std::span<const double> probabilities,
                              std::span<const std::int64_t> pulls, std::int64_t total,
                              double clamp);

// Heterogeneous incremental effect: the sample-weighted gain of each bin's
// winning arm over the global winner,
//   sum_b (N_b / N) * (p[b, w_b] - offset_b),
// where w_b is the bin's best arm and offset_b is the global winner's rate
// under the chosen reading. A single-bin table scores exactly 0.
double hie_score(const CountsTable& counts, HieOffset offset = HieOffset::global);

// Heterogeneous distribution divergence: the sample-weighted within-bin
// generalized divergence minus the all-data generalized divergence. May be
// negative when arm allocation is uneven across bins. A single-bin table
// scores exactly 0.
double hdd_score(const CountsTable& counts, double clamp = 1e-6);

// (s - min) / (max - min) per element; all zeros when max == min.
std::vector<double> min_max_normalize(std::span<const double> scores);

// alpha1 * hie_norm + alpha2 * hdd_norm, elementwise. Throws on length
// mismatch.
std::vector<double> combined_score(std::span<const double> hie_norm,
                                   std::span<const double> hdd_norm,
                                   const CombineConfig& config);

// Scores every feature of the log: bin, tally, score, then min-max
// normalization across exactly this feature set, combination, and a sort by
// combined score descending (ties by feature name). Requires k >= 2.
// Pure function of its inputs; calls on distinct logs may run concurrently.
std::vector<FeatureReport> score_all_features(const BanditLog& log, const BinConfig& bin_config,
                                              const CombineConfig& combine_config);

// JSON array of objects with keys: feature, hie, hdd, hie_norm, hdd_norm,
// combined, bins_used, merges, flags. Deterministic byte-for-byte.
std::string reports_to_json(std::span<const FeatureReport> reports);

// CSV with the same columns; flags joined by ';'.
std::string reports_to_csv(std::span<const FeatureReport> reports);

}  // namespace cmabfs

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmabfs/bandit_log.hpp"

namespace cmabfs {

struct BinConfig {
  // Requested bin count m for continuous features (quantile cuts at j/m).
  int target_bins = 10;
  // Cap on categorical bins; overflow tokens share one "__other__" bin.
  int max_categories = 20;
  // Minimum pulls required per (bin, arm) cell; bins below it get merged.
  int min_arm_samples = 10;

  void validate() const;  // throws ValidationError
};

// Label of the merged overflow/low-support categorical bin.
inline constexpr const char* kOtherLabel = "__other__";

// Maps every event of one feature to a bin index in [0, bin_count).
struct BinAssignment {
  std::string feature;
  FeatureKind kind = FeatureKind::continuous;
  int bin_count = 1;
  // Continuous: strictly increasing cut points; value v lands in the first
  // bin j with v <= boundaries[j], else in the last bin (right-closed
  // intervals, ties at a cut point go to the lower bin).
  std::vector<double> boundaries;
  // Categorical: token -> bin index for every distinct token.
  std::vector<std::pair<std::string, int>> category_map;
  // Categorical: per-bin display label (token or kOtherLabel).
  std::vector<std::string> bin_labels;
  // Per-event bin index.
  std::vector<int> bins;
  // Continuous diagnostics from the binning scan.
  double value_min = 0.0;
  double value_max = 0.0;

  bool constant_input() const {
    return kind == FeatureKind::continuous ? value_min == value_max : category_map.size() == 1;
  }
};

// Equal-frequency binning: cut points are the empirical quantiles at j/m
// (j = 1..m-1, sort-and-index definition), with duplicate and non-splitting
// cuts dropped, so bin_count <= m and every bin is non-empty. The induced
// partition of event indices is invariant under strictly increasing
// transforms of the values. Throws on empty or non-finite input.
BinAssignment bin_continuous(std::span<const double> values, const BinConfig& config,
                             std::string feature_name = {});

// One bin per distinct token, ordered by descending frequency (ties broken
// lexicographically). With more than max_categories distinct tokens, the top
// max_categories - 1 keep their own bins and the rest share kOtherLabel at
// the last index. Throws on empty input.
BinAssignment bin_categorical(std::span<const std::string> values, const BinConfig& config,
                              std::string feature_name = {});

// Per-(bin, arm) pull and success counts: the sufficient statistic for the
// importance scores. Cells are row-major [bin * k + arm].
struct CountsTable {
  int bin_count = 0;
  int k = 0;
  std::int64_t total = 0;                     // N
  std::vector<std::int64_t> bin_totals;       // N_b
  std::vector<std::int64_t> cell_pulls;       // N_{b,i}
  std::vector<std::int64_t> cell_successes;   // s_{b,i}
  std::vector<std::int64_t> arm_pulls;        // N_i
  std::vector<std::int64_t> arm_successes;    // s_i
  // Low-support merges applied by build_counts.
  int merges = 0;

  std::int64_t pulls(int bin, int arm) const { return cell_pulls[static_cast<std::size_t>(bin) * k + arm]; }
  std::int64_t successes(int bin, int arm) const { return cell_successes[static_cast<std::size_t>(bin) * k + arm]; }
};

// Tallies the counts table for one feature, then repairs low support: while
// some bin has an arm with fewer than min_arm_samples pulls, the smallest
// such bin is merged (continuous: into the adjacent bin with the smaller
// N_b; categorical: into the "__other__" bin, creating it if needed) until
// every bin passes or one bin remains. A one-bin table is valid output.
CountsTable build_counts(const BanditLog& log, const BinAssignment& assignment,
                         const BinConfig& config);

}  // namespace cmabfs

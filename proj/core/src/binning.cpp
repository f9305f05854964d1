#include "cmabfs/binning.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_map>

namespace cmabfs {
namespace {

// Exact multi-quantile selection via MSD radix partitioning on the
// order-preserving integer image of a double. Comparison selection costs
// ~3N branchy compares per cut; the histogram passes here are branchless
// and shared across all cuts, which is what keeps scoring cheap relative
// to replay-based evaluation at protocol sizes.

inline std::uint64_t ordered_key(double d) {
  const std::uint64_t u = std::bit_cast<std::uint64_t>(d);
  return (u & 0x8000000000000000ULL) ? ~u : (u | 0x8000000000000000ULL);
}

inline double key_to_double(std::uint64_t k) {
  const std::uint64_t u = (k & 0x8000000000000000ULL) ? (k & 0x7fffffffffffffffULL) : ~k;
  return std::bit_cast<double>(u);
}

constexpr int kRadixBits = 11;
constexpr std::size_t kRadixBuckets = std::size_t{1} << kRadixBits;

// Appends the rank-th smallest key for every rank in `ranks` (ascending,
// unique, 0-based within `keys`). Reorders `keys`. `counts`, when non-null,
// is the precomputed bucket histogram for this level.
void radix_select(std::vector<std::uint64_t>& keys, std::span<const std::size_t> ranks,
                  int shift, const std::uint32_t* counts_in, std::vector<std::uint64_t>& out) {
  if (ranks.empty()) return;
  if (keys.size() <= 128 || shift < 0) {
    std::size_t done = 0;
    bool first = true;
    for (std::size_t r : ranks) {
      std::nth_element(keys.begin() + static_cast<std::ptrdiff_t>(first ? 0 : done),
                       keys.begin() + static_cast<std::ptrdiff_t>(r), keys.end());
      out.push_back(keys[r]);
      done = r;
      first = false;
    }
    return;
  }

  const std::uint64_t mask = kRadixBuckets - 1;
  std::vector<std::uint32_t> local_counts;
  const std::uint32_t* counts = counts_in;
  if (counts == nullptr) {
    local_counts.assign(kRadixBuckets, 0);
    for (std::uint64_t k : keys) ++local_counts[(k >> shift) & mask];
    counts = local_counts.data();
  }

  // starts[b] = number of elements in buckets below b.
  std::vector<std::size_t> starts(kRadixBuckets + 1, 0);
  for (std::size_t b = 0; b < kRadixBuckets; ++b) starts[b + 1] = starts[b] + counts[b];

  // Group the requested ranks by bucket; buckets and ranks both ascend, so
  // the output order is preserved.
  struct BucketJob {
    std::size_t bucket;
    std::vector<std::size_t> local_ranks;
  };
  std::vector<BucketJob> jobs;
  for (std::size_t r : ranks) {
    const std::size_t b =
        static_cast<std::size_t>(std::upper_bound(starts.begin(), starts.end(), r) -
                                 starts.begin()) -
        1;
    if (jobs.empty() || jobs.back().bucket != b) jobs.push_back({b, {}});
    jobs.back().local_ranks.push_back(r - starts[b]);
  }

  // One gather pass collects every needed bucket.
  std::vector<int> job_of_bucket(kRadixBuckets, -1);
  for (std::size_t j = 0; j < jobs.size(); ++j)
    job_of_bucket[jobs[j].bucket] = static_cast<int>(j);
  std::vector<std::vector<std::uint64_t>> gathered(jobs.size());
  for (std::size_t j = 0; j < jobs.size(); ++j)
    gathered[j].reserve(counts[jobs[j].bucket]);
  for (std::uint64_t k : keys) {
    const int j = job_of_bucket[(k >> shift) & mask];
    if (j >= 0) gathered[static_cast<std::size_t>(j)].push_back(k);
  }

  for (std::size_t j = 0; j < jobs.size(); ++j)
    radix_select(gathered[j], jobs[j].local_ranks, shift - kRadixBits, nullptr, out);
}

// Right-closed intervals: the bin index is the number of cuts strictly
// below the value, so ties at a cut point stay in the lower bin. The fixed
// trip count lets the compiler vectorize the comparisons.
template <int NumCuts>
void assign_fixed(std::span<const double> values, const double* cuts, std::vector<int>& bins) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    int bin = 0;
    for (int c = 0; c < NumCuts; ++c) bin += v > cuts[c];
    bins[i] = bin;
  }
}

void assign_continuous_bins(std::span<const double> values, const std::vector<double>& cuts,
                            std::vector<int>& bins) {
  const double* c = cuts.data();
  switch (cuts.size()) {
    case 0: std::fill(bins.begin(), bins.end(), 0); return;
    case 1: assign_fixed<1>(values, c, bins); return;
    case 2: assign_fixed<2>(values, c, bins); return;
    case 3: assign_fixed<3>(values, c, bins); return;
    case 4: assign_fixed<4>(values, c, bins); return;
    case 5: assign_fixed<5>(values, c, bins); return;
    case 6: assign_fixed<6>(values, c, bins); return;
    case 7: assign_fixed<7>(values, c, bins); return;
    case 8: assign_fixed<8>(values, c, bins); return;
    case 9: assign_fixed<9>(values, c, bins); return;
    default:
      for (std::size_t i = 0; i < values.size(); ++i) {
        const auto it = std::lower_bound(cuts.begin(), cuts.end(), values[i]);
        bins[i] = static_cast<int>(it - cuts.begin());
      }
      return;
  }
}

// Order statistics of `values` at the given ascending unique 0-based ranks.
std::vector<double> select_order_statistics(std::span<const double> values,
                                            std::span<const std::size_t> ranks) {
  constexpr int kTopShift = 64 - kRadixBits;
  // Key mapping and the top-level histogram fuse into one pass; the key
  // buffer is reused across calls.
  thread_local std::vector<std::uint64_t> keys;
  keys.resize(values.size());
  std::array<std::uint32_t, kRadixBuckets> counts{};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint64_t k = ordered_key(values[i]);
    keys[i] = k;
    ++counts[k >> kTopShift];
  }
  std::vector<std::uint64_t> selected;
  selected.reserve(ranks.size());
  radix_select(keys, ranks, kTopShift, counts.data(), selected);
  std::vector<double> out(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) out[i] = key_to_double(selected[i]);
  return out;
}

}  // namespace

void BinConfig::validate() const {
  if (target_bins < 2) throw ValidationError("target_bins must be at least 2");
  if (max_categories < 1) throw ValidationError("max_categories must be positive");
  if (min_arm_samples < 1) throw ValidationError("min_arm_samples must be positive");
}

BinAssignment bin_continuous(std::span<const double> values, const BinConfig& config,
                             std::string feature_name) {
  config.validate();
  if (values.empty()) throw ValidationError("cannot bin an empty value list");

  double max_value = values[0];
  double min_value = values[0];
  bool finite = true;
  for (const double v : values) {
    finite &= std::isfinite(v);
    max_value = std::max(max_value, v);
    min_value = std::min(min_value, v);
  }
  if (!finite) throw ValidationError("cannot bin non-finite values");

  // Empirical quantile at j/m: smallest order statistic covering that
  // fraction of the sample, i.e. rank ceil(j*n/m) - 1. Duplicates collapse;
  // a cut at the maximum cannot split and is dropped, so every bin keeps at
  // least one value.
  const std::size_t n = values.size();
  const int m = config.target_bins;
  std::vector<std::size_t> ranks;
  for (int j = 1; j < m; ++j) {
    const std::size_t rank = (static_cast<std::size_t>(j) * n + m - 1) / m - 1;
    if (ranks.empty() || rank > ranks.back()) ranks.push_back(rank);
  }
  const std::vector<double> quantiles = select_order_statistics(values, ranks);
  std::vector<double> cuts;
  for (const double cut : quantiles) {
    if (cut >= max_value) continue;
    if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
  }

  BinAssignment out;
  out.feature = std::move(feature_name);
  out.kind = FeatureKind::continuous;
  out.boundaries = std::move(cuts);
  out.bin_count = static_cast<int>(out.boundaries.size()) + 1;
  out.value_min = min_value;
  out.value_max = max_value;
  out.bins.resize(values.size());
  assign_continuous_bins(values, out.boundaries, out.bins);
  return out;
}

BinAssignment bin_categorical(std::span<const std::string> values, const BinConfig& config,
                              std::string feature_name) {
  config.validate();
  if (values.empty()) throw ValidationError("cannot bin an empty value list");

  std::unordered_map<std::string, std::int64_t> freq;
  for (const auto& v : values) ++freq[v];

  std::vector<std::pair<std::string, std::int64_t>> ordered(freq.begin(), freq.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  BinAssignment out;
  out.feature = std::move(feature_name);
  out.kind = FeatureKind::categorical;

  const std::size_t distinct = ordered.size();
  const std::size_t cap = static_cast<std::size_t>(config.max_categories);
  std::unordered_map<std::string, int> token_to_bin;
  if (distinct <= cap) {
    out.bin_count = static_cast<int>(distinct);
    for (std::size_t r = 0; r < distinct; ++r) {
      token_to_bin[ordered[r].first] = static_cast<int>(r);
      out.bin_labels.push_back(ordered[r].first);
    }
  } else {
    out.bin_count = static_cast<int>(cap);
    const int other_bin = static_cast<int>(cap) - 1;
    for (std::size_t r = 0; r < distinct; ++r) {
      const int bin = r < cap - 1 ? static_cast<int>(r) : other_bin;
      token_to_bin[ordered[r].first] = bin;
      if (r < cap - 1) out.bin_labels.push_back(ordered[r].first);
    }
    out.bin_labels.push_back(kOtherLabel);
  }

  out.category_map.assign(token_to_bin.begin(), token_to_bin.end());
  std::sort(out.category_map.begin(), out.category_map.end());
  out.bins.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out.bins[i] = token_to_bin[values[i]];
  return out;
}

namespace {

// Working view of the table during low-support repair.
struct MutableCounts {
  int k = 0;
  std::vector<std::int64_t> bin_totals;
  std::vector<std::int64_t> pulls;      // row-major bin*k+arm
  std::vector<std::int64_t> successes;
  std::vector<std::string> labels;      // categorical only

  int bin_count() const { return static_cast<int>(bin_totals.size()); }

  bool bin_passes(int b, std::int64_t min_arm_samples) const {
    for (int a = 0; a < k; ++a)
      if (pulls[static_cast<std::size_t>(b) * k + a] < min_arm_samples) return false;
    return true;
  }

  void merge_into(int src, int dst) {
    bin_totals[dst] += bin_totals[src];
    for (int a = 0; a < k; ++a) {
      pulls[static_cast<std::size_t>(dst) * k + a] += pulls[static_cast<std::size_t>(src) * k + a];
      successes[static_cast<std::size_t>(dst) * k + a] +=
          successes[static_cast<std::size_t>(src) * k + a];
    }
    bin_totals.erase(bin_totals.begin() + src);
    pulls.erase(pulls.begin() + static_cast<std::ptrdiff_t>(src) * k,
                pulls.begin() + static_cast<std::ptrdiff_t>(src + 1) * k);
    successes.erase(successes.begin() + static_cast<std::ptrdiff_t>(src) * k,
                    successes.begin() + static_cast<std::ptrdiff_t>(src + 1) * k);
    if (!labels.empty()) labels.erase(labels.begin() + src);
  }

  // Failing bin with the smallest N_b, lowest index on ties; -1 if all pass.
  int worst_failing(std::int64_t min_arm_samples) const {
    int worst = -1;
    for (int b = 0; b < bin_count(); ++b) {
      if (bin_passes(b, min_arm_samples)) continue;
      if (worst < 0 || bin_totals[b] < bin_totals[worst]) worst = b;
    }
    return worst;
  }
};

}  // namespace

CountsTable build_counts(const BanditLog& log, const BinAssignment& assignment,
                         const BinConfig& config) {
  config.validate();
  if (static_cast<std::int64_t>(assignment.bins.size()) != log.size())
    throw ValidationError("bin assignment does not cover the log");

  MutableCounts mc;
  mc.k = log.arm_count();
  mc.bin_totals.assign(static_cast<std::size_t>(assignment.bin_count), 0);
  mc.pulls.assign(static_cast<std::size_t>(assignment.bin_count) * mc.k, 0);
  mc.successes.assign(static_cast<std::size_t>(assignment.bin_count) * mc.k, 0);
  if (assignment.kind == FeatureKind::categorical) mc.labels = assignment.bin_labels;

  const auto arms = log.arms();
  const auto rewards = log.rewards();
  for (std::int64_t e = 0; e < log.size(); ++e) {
    const int b = assignment.bins[static_cast<std::size_t>(e)];
    const int a = arms[e];
    ++mc.bin_totals[static_cast<std::size_t>(b)];
    ++mc.pulls[static_cast<std::size_t>(b) * mc.k + a];
    mc.successes[static_cast<std::size_t>(b) * mc.k + a] += rewards[e];
  }

  int merges = 0;
  while (mc.bin_count() > 1) {
    const int bad = mc.worst_failing(config.min_arm_samples);
    if (bad < 0) break;
    int target;
    if (assignment.kind == FeatureKind::continuous) {
      // Adjacent bin with the smaller N_b; ties and edges resolve leftward.
      if (bad == 0) {
        target = 1;
      } else if (bad == mc.bin_count() - 1) {
        target = bad - 1;
      } else {
        target = mc.bin_totals[bad - 1] <= mc.bin_totals[bad + 1] ? bad - 1 : bad + 1;
      }
    } else {
      // Merge into the overflow bin. Without one, absorb the smallest other
      // bin so the union becomes it; if the overflow bin itself fails, pull
      // the smallest other bin in.
      int other = -1;
      for (int b = 0; b < mc.bin_count(); ++b)
        if (mc.labels[static_cast<std::size_t>(b)] == kOtherLabel) other = b;
      if (other >= 0 && other != bad) {
        target = other;
      } else {
        target = -1;
        for (int b = 0; b < mc.bin_count(); ++b) {
          if (b == bad) continue;
          if (target < 0 || mc.bin_totals[b] < mc.bin_totals[target]) target = b;
        }
      }
      mc.labels[static_cast<std::size_t>(target)] = kOtherLabel;
    }
    mc.merge_into(bad, target);
    ++merges;
  }

  CountsTable table;
  table.bin_count = mc.bin_count();
  table.k = mc.k;
  table.total = log.size();
  table.bin_totals = std::move(mc.bin_totals);
  table.cell_pulls = std::move(mc.pulls);
  table.cell_successes = std::move(mc.successes);
  table.merges = merges;
  table.arm_pulls.assign(static_cast<std::size_t>(table.k), 0);
  table.arm_successes.assign(static_cast<std::size_t>(table.k), 0);
  for (int b = 0; b < table.bin_count; ++b) {
    for (int a = 0; a < table.k; ++a) {
      table.arm_pulls[static_cast<std::size_t>(a)] += table.pulls(b, a);
      table.arm_successes[static_cast<std::size_t>(a)] += table.successes(b, a);
    }
  }
  return table;
}

}  // namespace cmabfs

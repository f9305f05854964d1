#include "cmabfs/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cmabfs {

void CombineConfig::validate() const {
  if (alpha1 < 0 || alpha2 < 0) throw ValidationError("alpha weights must be non-negative");
  if (alpha1 + alpha2 <= 0) throw ValidationError("alpha1 + alpha2 must be positive");
  if (kl_clamp <= 0 || kl_clamp >= 0.5) throw ValidationError("kl_clamp must be in (0, 0.5)");
}

int winning_arm(std::span<const double> probabilities, std::span<const std::int64_t> pulls) {
  if (probabilities.size() != pulls.size())
    throw ValidationError("probability and pull vectors differ in length");
  int best = -1;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (pulls[i] <= 0) continue;
    if (best < 0 || probabilities[i] > probabilities[static_cast<std::size_t>(best)])
      best = static_cast<int>(i);
  }
  if (best < 0) throw ValidationError("no arm has a defined probability");
  return best;
}

double pairwise_kl(double p, double q, double clamp) {
  const double pc = std::clamp(p, clamp, 1.0 - clamp);
  const double qc = std::clamp(q, clamp, 1.0 - clamp);
  return pc * std::log(pc / qc) + (1.0 - pc) * std::log((1.0 - pc) / (1.0 - qc));
}

double generalized_divergence(std::span<const double> probabilities,
                              std::span<const std::int64_t> pulls, std::int64_t total,
                              double clamp) {
  if (probabilities.size() != pulls.size())
    throw ValidationError("probability and pull vectors differ in length");
  if (total <= 0) return 0.0;
  const double denom = static_cast<double>(total) * static_cast<double>(total);
  double sum = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (pulls[i] <= 0) continue;
    for (std::size_t j = 0; j < probabilities.size(); ++j) {
      if (j == i || pulls[j] <= 0) continue;
      const double weight = static_cast<double>(pulls[i]) * static_cast<double>(pulls[j]) / denom;
      sum += weight * pairwise_kl(probabilities[i], probabilities[j], clamp);
    }
  }
  return sum;
}

namespace {

void check_counts(const CountsTable& counts) {
  if (counts.bin_count < 1 || counts.k < 1)
    throw ValidationError("counts table is empty");
  if (counts.bin_totals.size() != static_cast<std::size_t>(counts.bin_count) ||
      counts.cell_pulls.size() != static_cast<std::size_t>(counts.bin_count) * counts.k ||
      counts.cell_successes.size() != counts.cell_pulls.size())
    throw ValidationError("counts table has inconsistent dimensions");
}

std::vector<double> cell_probabilities(const CountsTable& counts, int bin,
                                       std::vector<std::int64_t>& pulls_out) {
  std::vector<double> probs(static_cast<std::size_t>(counts.k), 0.0);
  pulls_out.assign(static_cast<std::size_t>(counts.k), 0);
  for (int a = 0; a < counts.k; ++a) {
    const std::int64_t n = counts.pulls(bin, a);
    pulls_out[static_cast<std::size_t>(a)] = n;
    if (n > 0)
      probs[static_cast<std::size_t>(a)] =
          static_cast<double>(counts.successes(bin, a)) / static_cast<double>(n);
  }
  return probs;
}

std::vector<double> global_probabilities(const CountsTable& counts) {
  std::vector<double> probs(static_cast<std::size_t>(counts.k), 0.0);
  for (int a = 0; a < counts.k; ++a)
    if (counts.arm_pulls[static_cast<std::size_t>(a)] > 0)
      probs[static_cast<std::size_t>(a)] =
          static_cast<double>(counts.arm_successes[static_cast<std::size_t>(a)]) /
          static_cast<double>(counts.arm_pulls[static_cast<std::size_t>(a)]);
  return probs;
}

}  // namespace

double hie_score(const CountsTable& counts, HieOffset offset) {
  check_counts(counts);
  if (counts.bin_count == 1) return 0.0;
  const std::vector<double> global = global_probabilities(counts);
  const int global_winner = winning_arm(global, counts.arm_pulls);
  const double global_rate = global[static_cast<std::size_t>(global_winner)];

  double score = 0.0;
  std::vector<std::int64_t> pulls;
  for (int b = 0; b < counts.bin_count; ++b) {
    if (counts.bin_totals[static_cast<std::size_t>(b)] == 0) continue;
    const std::vector<double> probs = cell_probabilities(counts, b, pulls);
    const int bin_winner = winning_arm(probs, pulls);
    double baseline = global_rate;
    if (offset == HieOffset::per_bin && pulls[static_cast<std::size_t>(global_winner)] > 0)
      baseline = probs[static_cast<std::size_t>(global_winner)];
    const double weight = static_cast<double>(counts.bin_totals[static_cast<std::size_t>(b)]) /
                          static_cast<double>(counts.total);
    score += weight * (probs[static_cast<std::size_t>(bin_winner)] - baseline);
  }
  return score;
}

double hdd_score(const CountsTable& counts, double clamp) {
  check_counts(counts);
  if (counts.bin_count == 1) return 0.0;
  const std::vector<double> global = global_probabilities(counts);
  const double global_div =
      generalized_divergence(global, counts.arm_pulls, counts.total, clamp);

  double contextual = 0.0;
  std::vector<std::int64_t> pulls;
  for (int b = 0; b < counts.bin_count; ++b) {
    const std::int64_t nb = counts.bin_totals[static_cast<std::size_t>(b)];
    if (nb == 0) continue;
    const std::vector<double> probs = cell_probabilities(counts, b, pulls);
    const double weight = static_cast<double>(nb) / static_cast<double>(counts.total);
    contextual += weight * generalized_divergence(probs, pulls, nb, clamp);
  }
  return contextual - global_div;
}

std::vector<double> min_max_normalize(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("cannot normalize an empty score list");
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<double> out(scores.size(), 0.0);
  if (hi > lo)
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - lo) / (hi - lo);
  return out;
}

std::vector<double> combined_score(std::span<const double> hie_norm,
                                   std::span<const double> hdd_norm,
                                   const CombineConfig& config) {
  config.validate();
  if (hie_norm.size() != hdd_norm.size())
    throw ValidationError("combined_score: mismatched feature sets");
  std::vector<double> out(hie_norm.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = config.alpha1 * hie_norm[i] + config.alpha2 * hdd_norm[i];
  return out;
}

std::vector<FeatureReport> score_all_features(const BanditLog& log, const BinConfig& bin_config,
                                              const CombineConfig& combine_config) {
  bin_config.validate();
  combine_config.validate();
  if (log.arm_count() < 2) throw ValidationError("scoring needs at least 2 arms");
  if (log.feature_count() == 0) throw ValidationError("log has no features to score");
  if (log.size() == 0) throw ValidationError("log has no events");

  std::vector<FeatureReport> reports;
  reports.reserve(log.feature_count());
  for (std::size_t f = 0; f < log.feature_count(); ++f) {
    const FeatureColumn& col = log.column(f);
    FeatureReport report;
    report.feature = col.name;

    const BinAssignment assignment =
        col.kind == FeatureKind::continuous
            ? bin_continuous(col.numeric, bin_config, col.name)
            : bin_categorical(col.tokens, bin_config, col.name);
    const bool constant = assignment.constant_input();

    const CountsTable counts = build_counts(log, assignment, bin_config);
    report.hie = hie_score(counts, combine_config.hie_offset);
    report.hdd = hdd_score(counts, combine_config.kl_clamp);
    report.bins_used = counts.bin_count;
    report.merges = counts.merges;
    if (constant) report.flags.push_back("constant_feature");
    if (counts.merges > 0) report.flags.push_back("merged_bins");
    if (counts.bin_count == 1) report.flags.push_back("single_bin");
    reports.push_back(std::move(report));
  }

  std::vector<double> hie(reports.size()), hdd(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    hie[i] = reports[i].hie;
    hdd[i] = reports[i].hdd;
  }
  const std::vector<double> hie_norm = min_max_normalize(hie);
  const std::vector<double> hdd_norm = min_max_normalize(hdd);
  const std::vector<double> combined = combined_score(hie_norm, hdd_norm, combine_config);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    reports[i].hie_norm = hie_norm[i];
    reports[i].hdd_norm = hdd_norm[i];
    reports[i].combined = combined[i];
  }

  std::sort(reports.begin(), reports.end(), [](const FeatureReport& a, const FeatureReport& b) {
    if (a.combined != b.combined) return a.combined > b.combined;
    return a.feature < b.feature;
  });
  return reports;
}

std::string reports_to_json(std::span<const FeatureReport> reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const FeatureReport& r : reports) {
    arr.push_back({{"feature", r.feature},
                   {"hie", r.hie},
                   {"hdd", r.hdd},
                   {"hie_norm", r.hie_norm},
                   {"hdd_norm", r.hdd_norm},
                   {"combined", r.combined},
                   {"bins_used", r.bins_used},
                   {"merges", r.merges},
                   {"flags", r.flags}});
  }
  return arr.dump(2) + "\n";
}

std::string reports_to_csv(std::span<const FeatureReport> reports) {
  auto num = [](double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
  };
  std::ostringstream os;
  os << "feature,hie,hdd,hie_norm,hdd_norm,combined,bins_used,merges,flags\n";
  for (const FeatureReport& r : reports) {
    os << r.feature << ',' << num(r.hie) << ',' << num(r.hdd) << ',' << num(r.hie_norm) << ','
       << num(r.hdd_norm) << ',' << num(r.combined) << ',' << r.bins_used << ',' << r.merges
       << ',';
    for (std::size_t i = 0; i < r.flags.size(); ++i) {
      if (i) os << ';';
      os << r.flags[i];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace cmabfs

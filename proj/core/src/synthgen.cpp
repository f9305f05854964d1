#include "cmabfs/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

namespace cmabfs {
namespace {

constexpr double kClipLow = 0.01;
constexpr double kClipHigh = 0.99;

double uniform01(std::mt19937_64& rng) {
  // 53-bit mantissa draw in [0, 1); platform-independent unlike the
  // distribution templates.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double corr_shift(const GeneratorConfig& cfg, std::span<const double> x) {
  if (cfg.correlational_features == 0) return 0.0;
  double shift = 0.0;
  for (int j = 0; j < cfg.correlational_features; ++j)
    shift += 2.0 * (x[static_cast<std::size_t>(cfg.hte_features + j)] - 0.5);
  return cfg.effect / cfg.correlational_features * shift;
}

// Mean over hte features of the segment indicator: +1 when arm a owns the
// value's segment, -1/(k-1) otherwise. Segment s of feature j is owned by
// arm (s + j) % k.
double hte_gain(const GeneratorConfig& cfg, std::span<const double> x, int arm) {
  if (cfg.hte_features == 0) return 0.0;
  const int k = cfg.arm_count;
  double sum = 0.0;
  for (int j = 0; j < cfg.hte_features; ++j) {
    const double v = x[static_cast<std::size_t>(j)];
    const int segment = std::min(static_cast<int>(v * k), k - 1);
    sum += (segment + j) % k == arm ? 1.0 : -1.0 / (k - 1);
  }
  return sum / cfg.hte_features;
}

double success_probability(const GeneratorConfig& cfg, std::span<const double> x, int arm) {
  const double p = cfg.base_rate + corr_shift(cfg, x) + cfg.effect * hte_gain(cfg, x, arm);
  return std::clamp(p, kClipLow, kClipHigh);
}

}  // namespace

std::string to_string(FeatureClass c) {
  switch (c) {
    case FeatureClass::hte: return "hte";
    case FeatureClass::correlational: return "correlational";
    case FeatureClass::irrelevant: return "irrelevant";
  }
  return "irrelevant";
}

void GeneratorConfig::validate() const {
  if (samples <= 0) throw ValidationError("samples must be positive");
  if (arm_count < 2) throw ValidationError("arm_count must be at least 2");
  if (hte_features < 0 || correlational_features < 0 || irrelevant_features < 0)
    throw ValidationError("feature counts must be non-negative");
  if (feature_count() == 0) throw ValidationError("at least one feature is required");
  if (effect < 0 || effect > 0.5) throw ValidationError("effect must be in [0, 0.5]");
  if (base_rate <= 0 || base_rate >= 1) throw ValidationError("base_rate must be in (0, 1)");
  const double corr_max = correlational_features > 0 ? effect : 0.0;
  const double swing = effect + corr_max;
  if (base_rate - swing <= 0 || base_rate + swing >= 1)
    throw ValidationError("base_rate +- (effect + correlational shift) must stay inside (0, 1)");
}

std::pair<BanditLog, GroundTruth> generate(const GeneratorConfig& config) {
  config.validate();
  const int d = config.feature_count();
  const std::size_t n = static_cast<std::size_t>(config.samples);

  std::vector<FeatureColumn> columns(static_cast<std::size_t>(d));
  GroundTruth truth;
  truth.classes.reserve(static_cast<std::size_t>(d));
  int next = 0;
  for (int j = 0; j < config.hte_features; ++j, ++next) {
    columns[static_cast<std::size_t>(next)].name = "hte_" + std::to_string(j);
    truth.classes.push_back(FeatureClass::hte);
  }
  for (int j = 0; j < config.correlational_features; ++j, ++next) {
    columns[static_cast<std::size_t>(next)].name = "corr_" + std::to_string(j);
    truth.classes.push_back(FeatureClass::correlational);
  }
  for (int j = 0; j < config.irrelevant_features; ++j, ++next) {
    columns[static_cast<std::size_t>(next)].name = "irrel_" + std::to_string(j);
    truth.classes.push_back(FeatureClass::irrelevant);
  }
  for (auto& col : columns) {
    col.kind = FeatureKind::continuous;
    col.numeric.resize(n);
  }

  std::vector<int> arms(n);
  std::vector<std::uint8_t> rewards(n);
  truth.best_arm.resize(n);

  std::mt19937_64 rng(config.seed);
  std::vector<double> x(static_cast<std::size_t>(d));
  for (std::size_t e = 0; e < n; ++e) {
    for (int f = 0; f < d; ++f) {
      x[static_cast<std::size_t>(f)] = uniform01(rng);
      columns[static_cast<std::size_t>(f)].numeric[e] = x[static_cast<std::size_t>(f)];
    }
    const int arm = static_cast<int>(rng() % static_cast<std::uint64_t>(config.arm_count));
    arms[e] = arm;
    const double p = success_probability(config, x, arm);
    rewards[e] = uniform01(rng) < p ? 1 : 0;
    truth.best_arm[e] = true_best_arm(config, x);
  }

  return {BanditLog(config.arm_count, std::move(arms), std::move(rewards), std::move(columns)),
          std::move(truth)};
}

int true_best_arm(const GeneratorConfig& config, std::span<const double> features) {
  if (features.size() != static_cast<std::size_t>(config.feature_count()))
    throw ValidationError("feature vector length does not match the generator config");
  int best = 0;
  double best_p = success_probability(config, features, 0);
  for (int a = 1; a < config.arm_count; ++a) {
    const double p = success_probability(config, features, a);
    if (p > best_p) {
      best = a;
      best_p = p;
    }
  }
  return best;
}

std::string ground_truth_to_json(const GeneratorConfig& config, const GroundTruth& truth) {
  nlohmann::ordered_json j;
  j["config"] = {{"samples", config.samples},
                 {"arm_count", config.arm_count},
                 {"hte_features", config.hte_features},
                 {"correlational_features", config.correlational_features},
                 {"irrelevant_features", config.irrelevant_features},
                 {"effect", config.effect},
                 {"base_rate", config.base_rate},
                 {"seed", config.seed}};
  nlohmann::ordered_json classes = nlohmann::ordered_json::object();
  int next = 0;
  for (int jj = 0; jj < config.hte_features; ++jj, ++next)
    classes["hte_" + std::to_string(jj)] = to_string(truth.classes[static_cast<std::size_t>(next)]);
  for (int jj = 0; jj < config.correlational_features; ++jj, ++next)
    classes["corr_" + std::to_string(jj)] =
        to_string(truth.classes[static_cast<std::size_t>(next)]);
  for (int jj = 0; jj < config.irrelevant_features; ++jj, ++next)
    classes["irrel_" + std::to_string(jj)] =
        to_string(truth.classes[static_cast<std::size_t>(next)]);
  j["classes"] = classes;
  j["best_arm"] = truth.best_arm;
  return j.dump(2) + "\n";
}

}  // namespace cmabfs

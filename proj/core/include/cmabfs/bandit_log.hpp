#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmabfs/errors.hpp"

namespace cmabfs {

enum class FeatureKind { continuous, categorical };

std::string to_string(FeatureKind kind);

struct FeatureDescriptor {
  std::string name;
  FeatureKind kind = FeatureKind::continuous;
  std::size_t column_index = 0;
};

// One feature column in columnar layout. Exactly one of `numeric` / `tokens`
// is populated, matching `kind`.
struct FeatureColumn {
  std::string name;
  FeatureKind kind = FeatureKind::continuous;
  std::vector<double> numeric;
  std::vector<std::string> tokens;

  std::size_t size() const {
    return kind == FeatureKind::continuous ? numeric.size() : tokens.size();
  }
};

// Reserved token assigned to empty categorical cells at ingestion.
inline constexpr const char* kMissingToken = "__missing__";

// Immutable logged bandit data: per-event (arm, binary reward) plus feature
// columns. All invariants are checked at construction; afterwards the log is
// safe for concurrent reads.
class BanditLog {
 public:
  // Throws ValidationError if any invariant fails: reward not in {0,1},
  // arm id outside [0, arm_count), column length mismatch, non-finite
  // continuous value, duplicate feature name.
  BanditLog(int arm_count, std::vector<int> arms, std::vector<std::uint8_t> rewards,
            std::vector<FeatureColumn> columns);

  int arm_count() const { return arm_count_; }
  std::int64_t size() const { return static_cast<std::int64_t>(arms_.size()); }

  std::span<const int> arms() const { return arms_; }
  std::span<const std::uint8_t> rewards() const { return rewards_; }

  std::size_t feature_count() const { return columns_.size(); }
  const FeatureColumn& column(std::size_t index) const { return columns_.at(index); }
  // Throws ValidationError for unknown names.
  const FeatureColumn& column(const std::string& name) const;
  std::optional<std::size_t> column_index(const std::string& name) const;

  std::vector<FeatureDescriptor> descriptors() const;

 private:
  int arm_count_;
  std::vector<int> arms_;
  std::vector<std::uint8_t> rewards_;
  std::vector<FeatureColumn> columns_;
};

// Column-role mapping for CSV ingestion. Columns not named as arm/reward are
// features; their kind comes from `kinds` when present, otherwise from
// auto-typing (a column is continuous iff every non-empty cell is unquoted
// and parses as a finite decimal).
struct CsvSchema {
  std::string arm_column = "arm";
  std::string reward_column = "reward";
  std::map<std::string, FeatureKind> kinds;
  // When set, fixes k and allows arms that were never logged. Without it,
  // k = max logged id + 1 and every id in [0, k) must be observed; sparse
  // ids are an error rather than being silently remapped.
  std::optional<int> arm_count;
};

// Reads a UTF-8, comma-separated, header-first CSV file. Quoted cells follow
// RFC 4180 ("" escapes a quote, newlines allowed inside quotes). Empty
// categorical cells become kMissingToken; empty continuous cells are an
// error. Error messages name the offending data row (1-based, header
// excluded) and column.
BanditLog ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

// Inverse of ingest_csv: header `arm,reward,<features...>`, categorical cells
// quoted, numbers in shortest round-trip form. ingest_csv(write_csv(log))
// reproduces the log exactly.
void write_csv(const BanditLog& log, const std::filesystem::path& path);

struct ArmSummary {
  int arm = 0;
  std::int64_t pulls = 0;
  std::int64_t successes = 0;
  // Empty for arms with zero pulls.
  std::optional<double> success_rate;
};

struct LogSummary {
  std::int64_t events = 0;
  std::vector<ArmSummary> arms;
};

LogSummary summarize(const BanditLog& log);

}  // namespace cmabfs

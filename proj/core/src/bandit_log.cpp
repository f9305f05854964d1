#include "cmabfs/bandit_log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace cmabfs {
namespace {

struct CsvCell {
  std::string text;
  bool quoted = false;
};

using CsvRow = std::vector<CsvCell>;

// RFC 4180 reader: quoted cells may contain commas, newlines, and ""-escaped
// quotes. Keeps quotedness per cell because it feeds the auto-typing rule.
std::vector<CsvRow> read_csv_rows(std::istream& in) {
  std::vector<CsvRow> rows;
  CsvRow row;
  CsvCell cell;
  bool in_quotes = false;
  bool row_started = false;
  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cell.text.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        cell.text.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        cell.quoted = true;
        row_started = true;
        break;
      case ',':
        row.push_back(std::move(cell));
        cell = {};
        row_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_started || !cell.text.empty() || cell.quoted) {
          row.push_back(std::move(cell));
          rows.push_back(std::move(row));
        }
        cell = {};
        row = {};
        row_started = false;
        break;
      default:
        cell.text.push_back(c);
        row_started = true;
        break;
    }
  }
  if (row_started || !cell.text.empty() || cell.quoted) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string trimmed(const std::string& s) {
  auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return {};
  auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

bool parse_double(const std::string& raw, double& out) {
  const std::string s = trimmed(raw);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;  // from_chars rejects a leading '+'
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

bool parse_int(const std::string& raw, std::int64_t& out) {
  const std::string s = trimmed(raw);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

[[noreturn]] void fail_cell(std::size_t data_row, const std::string& column,
                            const std::string& message) {
  std::ostringstream os;
  os << "row " << data_row << ", column '" << column << "': " << message;
  throw ValidationError(os.str());
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quoted_field(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace

std::string to_string(FeatureKind kind) {
  return kind == FeatureKind::continuous ? "continuous" : "categorical";
}

BanditLog::BanditLog(int arm_count, std::vector<int> arms, std::vector<std::uint8_t> rewards,
                     std::vector<FeatureColumn> columns)
    : arm_count_(arm_count),
      arms_(std::move(arms)),
      rewards_(std::move(rewards)),
      columns_(std::move(columns)) {
  if (arm_count_ < 2) throw ValidationError("arm count must be at least 2");
  if (rewards_.size() != arms_.size())
    throw ValidationError("arm and reward sequences differ in length");
  const std::size_t n = arms_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (arms_[i] < 0 || arms_[i] >= arm_count_)
      throw ValidationError("event " + std::to_string(i + 1) + ": arm id " +
                            std::to_string(arms_[i]) + " outside [0, " +
                            std::to_string(arm_count_) + ")");
    if (rewards_[i] > 1)
      throw ValidationError("event " + std::to_string(i + 1) + ": reward must be 0 or 1");
  }
  std::unordered_set<std::string> names;
  for (const auto& col : columns_) {
    if (col.name.empty()) throw ValidationError("feature name must not be empty");
    if (!names.insert(col.name).second)
      throw ValidationError("duplicate feature name '" + col.name + "'");
    if (col.size() != n)
      throw ValidationError("feature '" + col.name + "' has " + std::to_string(col.size()) +
                            " values, expected " + std::to_string(n));
    if (col.kind == FeatureKind::continuous) {
      for (double v : col.numeric)
        if (!std::isfinite(v))
          throw ValidationError("feature '" + col.name + "' contains a non-finite value");
    }
  }
}

const FeatureColumn& BanditLog::column(const std::string& name) const {
  if (auto idx = column_index(name)) return columns_[*idx];
  throw ValidationError("unknown feature '" + name + "'");
}

std::optional<std::size_t> BanditLog::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  return std::nullopt;
}

std::vector<FeatureDescriptor> BanditLog::descriptors() const {
  std::vector<FeatureDescriptor> out;
  out.reserve(columns_.size());
  for (std::size_t i = 0; i < columns_.size(); ++i)
    out.push_back({columns_[i].name, columns_[i].kind, i});
  return out;
}

BanditLog ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file: " + path.string());
  const auto rows = read_csv_rows(in);
  if (rows.empty()) throw ValidationError(path.string() + ": missing header row");

  const CsvRow& header = rows.front();
  std::vector<std::string> names(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) names[i] = header[i].text;

  auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
  };
  const auto arm_col = find_column(schema.arm_column);
  if (!arm_col)
    throw ValidationError(path.string() + ": missing arm column '" + schema.arm_column + "'");
  const auto reward_col = find_column(schema.reward_column);
  if (!reward_col)
    throw ValidationError(path.string() + ": missing reward column '" + schema.reward_column +
                          "'");

  std::vector<std::size_t> feature_cols;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (i != *arm_col && i != *reward_col) feature_cols.push_back(i);
  {
    std::unordered_set<std::string> seen;
    for (std::size_t i : feature_cols)
      if (!seen.insert(names[i]).second)
        throw ValidationError(path.string() + ": duplicate column name '" + names[i] + "'");
  }

  const std::size_t n = rows.size() - 1;
  std::vector<int> arms(n);
  std::vector<std::uint8_t> rewards(n);
  int max_arm = -1;
  for (std::size_t r = 0; r < n; ++r) {
    const CsvRow& row = rows[r + 1];
    if (row.size() != header.size())
      throw ValidationError("row " + std::to_string(r + 1) + ": expected " +
                            std::to_string(header.size()) + " cells, found " +
                            std::to_string(row.size()));
    std::int64_t arm;
    if (!parse_int(row[*arm_col].text, arm) || arm < 0)
      fail_cell(r + 1, schema.arm_column, "arm must be a non-negative base-10 integer");
    std::int64_t reward;
    if (!parse_int(row[*reward_col].text, reward) || (reward != 0 && reward != 1))
      throw ValidationError("row " + std::to_string(r + 1) + ": reward must be 0 or 1");
    arms[r] = static_cast<int>(arm);
    rewards[r] = static_cast<std::uint8_t>(reward);
    max_arm = std::max(max_arm, arms[r]);
  }

  int k;
  if (schema.arm_count) {
    k = *schema.arm_count;
    if (k < 2) throw ValidationError("arm count override must be at least 2");
    if (max_arm >= k)
      throw ValidationError("logged arm id " + std::to_string(max_arm) +
                            " exceeds declared arm count " + std::to_string(k));
  } else {
    if (n == 0)
      throw ValidationError(path.string() +
                            ": empty log needs an explicit arm count (schema.arm_count)");
    k = max_arm + 1;
    if (k < 2)
      throw ValidationError(path.string() +
                            ": only one arm observed; declare arm_count explicitly");
    // Dense-id check: silently remapping sparse ids would desynchronize
    // replay against the logged arms.
    std::vector<bool> seen(static_cast<std::size_t>(k), false);
    for (int a : arms) seen[static_cast<std::size_t>(a)] = true;
    for (int a = 0; a < k; ++a)
      if (!seen[static_cast<std::size_t>(a)])
        throw ValidationError("arm ids are sparse: id " + std::to_string(a) +
                              " never observed; declare arm_count explicitly if intended");
  }

  std::vector<FeatureColumn> columns;
  columns.reserve(feature_cols.size());
  for (std::size_t ci : feature_cols) {
    FeatureColumn col;
    col.name = names[ci];
    auto kind_it = schema.kinds.find(col.name);
    if (kind_it != schema.kinds.end()) {
      col.kind = kind_it->second;
    } else {
      // Auto-typing: continuous iff every non-empty cell is unquoted and
      // parses as a finite decimal.
      col.kind = FeatureKind::continuous;
      for (std::size_t r = 0; r < n; ++r) {
        const CsvCell& cell = rows[r + 1][ci];
        if (trimmed(cell.text).empty() && !cell.quoted) continue;
        double v;
        if (cell.quoted || !parse_double(cell.text, v)) {
          col.kind = FeatureKind::categorical;
          break;
        }
      }
    }
    if (col.kind == FeatureKind::continuous) {
      col.numeric.resize(n);
      for (std::size_t r = 0; r < n; ++r) {
        const CsvCell& cell = rows[r + 1][ci];
        if (trimmed(cell.text).empty())
          fail_cell(r + 1, col.name, "continuous value is missing");
        if (!parse_double(cell.text, col.numeric[r]))
          fail_cell(r + 1, col.name, "'" + cell.text + "' is not a finite number");
      }
    } else {
      col.tokens.resize(n);
      for (std::size_t r = 0; r < n; ++r) {
        const CsvCell& cell = rows[r + 1][ci];
        col.tokens[r] = cell.text.empty() && !cell.quoted ? kMissingToken : cell.text;
      }
    }
    columns.push_back(std::move(col));
  }

  return BanditLog(k, std::move(arms), std::move(rewards), std::move(columns));
}

void write_csv(const BanditLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  out << "arm,reward";
  for (std::size_t i = 0; i < log.feature_count(); ++i) {
    const std::string& name = log.column(i).name;
    out << ',' << (needs_quoting(name) ? quoted_field(name) : name);
  }
  out << '\n';
  const auto arms = log.arms();
  const auto rewards = log.rewards();
  for (std::int64_t e = 0; e < log.size(); ++e) {
    out << arms[e] << ',' << static_cast<int>(rewards[e]);
    for (std::size_t i = 0; i < log.feature_count(); ++i) {
      const FeatureColumn& col = log.column(i);
      out << ',';
      if (col.kind == FeatureKind::continuous)
        out << format_double(col.numeric[static_cast<std::size_t>(e)]);
      else
        out << quoted_field(col.tokens[static_cast<std::size_t>(e)]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

LogSummary summarize(const BanditLog& log) {
  LogSummary summary;
  summary.events = log.size();
  summary.arms.resize(static_cast<std::size_t>(log.arm_count()));
  for (int a = 0; a < log.arm_count(); ++a) summary.arms[static_cast<std::size_t>(a)].arm = a;
  const auto arms = log.arms();
  const auto rewards = log.rewards();
  for (std::int64_t e = 0; e < log.size(); ++e) {
    auto& entry = summary.arms[static_cast<std::size_t>(arms[e])];
    ++entry.pulls;
    entry.successes += rewards[e];
  }
  for (auto& entry : summary.arms)
    if (entry.pulls > 0)
      entry.success_rate = static_cast<double>(entry.successes) / static_cast<double>(entry.pulls);
  return summary;
}

}  // namespace cmabfs

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace gmt {

/// Ordered string-valued parameter table. Lists are comma-separated.
class ParamTable {
 public:
  ParamTable() = default;
  ParamTable(std::initializer_list<std::pair<std::string, std::string>> entries);

  bool contains(const std::string& key) const;
  /// Adds or replaces.
  void set(const std::string& key, std::string value);
  /// Replaces an existing key; unknown keys throw ArgumentError naming the key.
  void override_value(const std::string& key, std::string value);
  void apply(const std::map<std::string, std::string>& overrides);

  const std::string& raw(const std::string& key) const;
  double as_double(const std::string& key) const;
  int as_int(const std::string& key) const;
  std::uint64_t as_uint64(const std::string& key) const;
  std::vector<double> as_doubles(const std::string& key) const;
  std::vector<int> as_ints(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  bool operator==(const ParamTable&) const = default;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Shortest round-trip decimal form.
std::string format_number(double v);

struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  /// Values of one column.
  std::vector<double> column(const std::string& name) const;
  bool operator==(const Series&) const = default;
};

enum class Comparator { less_equal, greater_equal };

struct Verdict {
  std::string name;
  Comparator comparator = Comparator::less_equal;
  double threshold = 0.0;
  double measured = 0.0;
  bool passed = false;
  /// Not evaluated (e.g. low-confidence Monte Carlo); never counts as a pass.
  bool withheld = false;
  std::string note;
  bool operator==(const Verdict&) const = default;
};

Verdict make_verdict(std::string name, Comparator cmp, double threshold, double measured, std::string note = {});
Verdict withheld_verdict(std::string name, Comparator cmp, double threshold, double measured, std::string note);

struct ExperimentReport {
  std::string scenario_id;
  ParamTable params;
  std::deque<Series> series;  ///< deque: add_series references stay valid
  std::vector<Verdict> verdicts;
  std::vector<std::string> artifacts;  ///< paths relative to the scenario directory
  std::uint64_t seed = 0;
  double wall_time = 0.0;

  Series& add_series(std::string name, std::vector<std::string> columns);
  const Series& find_series(const std::string& name) const;
  /// Appends the verdict and records its measured value as the param "measured.<name>".
  void add_verdict(Verdict v);
  const Verdict& find_verdict(const std::string& name) const;
  bool all_passed() const;

  nlohmann::ordered_json to_json() const;
  static ExperimentReport from_json(const nlohmann::ordered_json& j);
  bool operator==(const ExperimentReport&) const = default;
};

/// Header row, comma-separated, LF endings.
void write_csv(std::ostream& os, const Series& series);

/// Writes <dir>/<series>.csv for every series and <dir>/report.json; the CSV
/// names are appended to the report's artifacts first.
void write_report(ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace gmt

#include "gmt/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gmt/errors.hpp"

namespace gmt {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ArgumentError("empty list element in '" + s + "'");
    out.push_back(item.substr(b, e - b + 1));
  }
  if (out.empty()) throw ArgumentError("empty list value");
  return out;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ArgumentError("parameter '" + key + "': cannot parse '" + text + "'");
  }
  return v;
}

nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double number_from(const nlohmann::ordered_json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string_view comparator_text(Comparator c) { return c == Comparator::less_equal ? "<=" : ">="; }

}  // namespace

ParamTable::ParamTable(std::initializer_list<std::pair<std::string, std::string>> entries) {
  for (const auto& [k, v] : entries) set(k, v);
}

bool ParamTable::contains(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

void ParamTable::set(const std::string& key, std::string value) {
  for (auto& e : entries_) {
    if (e.first == key) {
      e.second = std::move(value);
      return;
    }
  }
  entries_.emplace_back(key, std::move(value));
}

void ParamTable::override_value(const std::string& key, std::string value) {
  if (!contains(key)) throw ArgumentError("unknown parameter '" + key + "'");
  set(key, std::move(value));
}

void ParamTable::apply(const std::map<std::string, std::string>& overrides) {
  for (const auto& [k, v] : overrides) override_value(k, v);
}

const std::string& ParamTable::raw(const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.first == key) return e.second;
  }
  throw ArgumentError("missing parameter '" + key + "'");
}

double ParamTable::as_double(const std::string& key) const { return parse_value<double>(key, raw(key)); }
int ParamTable::as_int(const std::string& key) const { return parse_value<int>(key, raw(key)); }
std::uint64_t ParamTable::as_uint64(const std::string& key) const {
  return parse_value<std::uint64_t>(key, raw(key));
}

std::vector<double> ParamTable::as_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : split_list(raw(key))) out.push_back(parse_value<double>(key, s));
  return out;
}

std::vector<int> ParamTable::as_ints(const std::string& key) const {
  std::vector<int> out;
  for (const auto& s : split_list(raw(key))) out.push_back(parse_value<int>(key, s));
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void Series::add(std::vector<double> row) {
  if (row.size() != columns.size()) throw ArgumentError("series '" + name + "': row width mismatch");
  rows.push_back(std::move(row));
}

std::vector<double> Series::column(const std::string& col) const {
  const auto it = std::find(columns.begin(), columns.end(), col);
  if (it == columns.end()) throw ArgumentError("series '" + name + "' has no column '" + col + "'");
  const auto k = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

Verdict make_verdict(std::string name, Comparator cmp, double threshold, double measured, std::string note) {
  Verdict v{std::move(name), cmp, threshold, measured, false, false, std::move(note)};
  v.passed = cmp == Comparator::less_equal ? measured <= threshold : measured >= threshold;
  return v;
}

Verdict withheld_verdict(std::string name, Comparator cmp, double threshold, double measured, std::string note) {
  return Verdict{std::move(name), cmp, threshold, measured, false, true, std::move(note)};
}

Series& ExperimentReport::add_series(std::string name, std::vector<std::string> columns) {
  series.push_back(Series{std::move(name), std::move(columns), {}});
  return series.back();
}

const Series& ExperimentReport::find_series(const std::string& name) const {
  for (const auto& s : series) {
    if (s.name == name) return s;
  }
  throw ArgumentError("report has no series '" + name + "'");
}

void ExperimentReport::add_verdict(Verdict v) {
  params.set("measured." + v.name, format_number(v.measured));
  verdicts.push_back(std::move(v));
}

const Verdict& ExperimentReport::find_verdict(const std::string& name) const {
  for (const auto& v : verdicts) {
    if (v.name == name) return v;
  }
  throw ArgumentError("report has no verdict '" + name + "'");
}

bool ExperimentReport::all_passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed && !v.withheld; });
}

nlohmann::ordered_json ExperimentReport::to_json() const {
  nlohmann::ordered_json j;
  j["scenario_id"] = scenario_id;
  j["seed"] = seed;
  j["wall_time"] = wall_time;
  j["all_passed"] = all_passed();
  auto& p = j["params"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : params.entries()) p[k] = v;
  auto& vs = j["verdicts"] = nlohmann::ordered_json::array();
  for (const auto& v : verdicts) {
    vs.push_back({{"name", v.name},
                  {"comparator", comparator_text(v.comparator)},
                  {"threshold", number_or_null(v.threshold)},
                  {"measured", number_or_null(v.measured)},
                  {"passed", v.passed},
                  {"withheld", v.withheld},
                  {"note", v.note}});
  }
  auto& ss = j["series"] = nlohmann::ordered_json::array();
  for (const auto& s : series) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : s.rows) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (double v : r) row.push_back(number_or_null(v));
      rows.push_back(std::move(row));
    }
    ss.push_back({{"name", s.name}, {"columns", s.columns}, {"rows", std::move(rows)}});
  }
  j["artifacts"] = artifacts;
  return j;
}

ExperimentReport ExperimentReport::from_json(const nlohmann::ordered_json& j) {
  ExperimentReport r;
  r.scenario_id = j.at("scenario_id").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.wall_time = j.at("wall_time").get<double>();
  for (const auto& [k, v] : j.at("params").items()) r.params.set(k, v.get<std::string>());
  for (const auto& v : j.at("verdicts")) {
    const auto cmp = v.at("comparator").get<std::string>();
    if (cmp != "<=" && cmp != ">=") throw ArgumentError("report: unknown comparator '" + cmp + "'");
    r.verdicts.push_back(Verdict{v.at("name").get<std::string>(),
                                 cmp == "<=" ? Comparator::less_equal : Comparator::greater_equal,
                                 number_from(v.at("threshold")), number_from(v.at("measured")),
                                 v.at("passed").get<bool>(), v.at("withheld").get<bool>(),
                                 v.at("note").get<std::string>()});
  }
  for (const auto& s : j.at("series")) {
    Series out{s.at("name").get<std::string>(), s.at("columns").get<std::vector<std::string>>(), {}};
    for (const auto& row : s.at("rows")) {
      std::vector<double> vals;
      for (const auto& v : row) vals.push_back(number_from(v));
      out.rows.push_back(std::move(vals));
    }
    r.series.push_back(std::move(out));
  }
  r.artifacts = j.at("artifacts").get<std::vector<std::string>>();
  return r;
}

void write_csv(std::ostream& os, const Series& series) {
  for (std::size_t k = 0; k < series.columns.size(); ++k) os << (k ? "," : "") << series.columns[k];
  os << '\n';
  for (const auto& r : series.rows) {
    for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << format_number(r[k]);
    os << '\n';
  }
}

void write_report(ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& s : report.series) {
    const std::string file = s.name + ".csv";
    std::ofstream os(dir / file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / file).string());
    write_csv(os, s);
    if (std::find(report.artifacts.begin(), report.artifacts.end(), file) == report.artifacts.end()) {
      report.artifacts.push_back(file);
    }
  }
  std::ofstream os(dir / "report.json", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + (dir / "report.json").string());
  os << report.to_json().dump(2) << '\n';
  if (!os) throw std::runtime_error("write failed for " + (dir / "report.json").string());
}

}  // namespace gmt

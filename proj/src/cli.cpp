#include "gmt/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "gmt/errors.hpp"
#include "gmt/scenarios.hpp"

namespace gmt::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

enum class Shape { number, number_list, text };

bool is_number(const std::string& s) {
  double v;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

Shape shape_of(const std::string& value) {
  if (is_number(value)) return Shape::number;
  std::stringstream in(value);
  std::string item;
  bool all = true, any = false;
  while (std::getline(in, item, ',')) {
    any = true;
    all = all && is_number(trim(item));
  }
  return any && all ? Shape::number_list : Shape::text;
}

std::vector<std::string> selected_ids(const std::string& selector) {
  if (selector == "all") return scenarios::scenario_ids();
  scenarios::find_scenario(selector);
  return {selector};
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw UsageError("expected key=value, got '" + text + "'");
  auto key = trim(text.substr(0, eq));
  auto value = trim(text.substr(eq + 1));
  if (key.empty()) throw UsageError("empty key in '" + text + "'");
  if (value.empty()) throw UsageError("empty value for key '" + key + "'");
  return {key, value};
}

template <typename T>
T parse_int(const std::string& key, const std::string& text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("invalid value '" + text + "' for '" + key + "'");
  }
  return v;
}

struct Outcome {
  std::string id;
  std::string line;
  int code = kExitPass;
};

std::string summary_line(const ExperimentReport& r) {
  std::ostringstream s;
  const auto passed = std::count_if(r.verdicts.begin(), r.verdicts.end(),
                                    [](const Verdict& v) { return v.passed && !v.withheld; });
  s << (r.all_passed() ? "PASS " : "FAIL ") << r.scenario_id << "  " << passed << '/' << r.verdicts.size()
    << " verdicts  " << std::fixed << std::setprecision(1) << r.wall_time << " s";
  std::string sep = "  failed: ";
  for (const auto& v : r.verdicts) {
    if (v.passed && !v.withheld) continue;
    s << sep << v.name << (v.withheld ? " (withheld)" : "") << " measured " << format_number(v.measured)
      << (v.comparator == Comparator::less_equal ? " vs <= " : " vs >= ") << format_number(v.threshold);
    sep = ", ";
  }
  return s.str();
}

Outcome run_one(const std::string& id, const RunConfig& config) {
  const auto dir = config.output_dir / id;
  Outcome o{id, {}, kExitPass};
  std::map<std::string, std::string> own;
  const auto& defaults = scenarios::find_scenario(id).defaults;
  for (const auto& [k, v] : config.overrides) {
    if (defaults.contains(k)) own[k] = v;
  }
  try {
    std::filesystem::create_directories(dir);
    auto report = scenarios::run_scenario(id, own, config.seed, dir);
    write_report(report, dir);
    o.line = summary_line(report);
    o.code = report.all_passed() ? kExitPass : kExitFail;
  } catch (const std::exception& e) {
    o.line = "ERROR " + id + "  " + e.what();
    o.code = kExitRuntime;
    std::ofstream marker(dir / "FAILED");
    if (marker) marker << e.what() << '\n';
  }
  return o;
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      auto [k, v] = split_assignment(line);
      out[k] = v;
    } catch (const UsageError& e) {
      throw UsageError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

void validate_overrides(const RunConfig& config) {
  std::vector<std::string> ids;
  try {
    ids = selected_ids(config.selector);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  for (const auto& [key, value] : config.overrides) {
    bool known = false;
    for (const auto& id : ids) {
      const auto& defaults = scenarios::find_scenario(id).defaults;
      if (!defaults.contains(key)) continue;
      known = true;
      const auto want = shape_of(defaults.raw(key));
      const auto got = shape_of(value);
      const bool ok = want == Shape::text || got == want || (want == Shape::number_list && got == Shape::number);
      if (!ok) throw UsageError("invalid value '" + value + "' for key '" + key + "' in " + id);
    }
    if (!known) throw UsageError("unknown key '" + key + "'");
  }
}

void print_scenarios(std::ostream& out) {
  for (const auto& s : scenarios::registry()) out << s.id << "  " << s.summary << '\n';
}

ParseResult parse_config(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Measure-theoretic experiments on unions of level sets", "gmt-lab"};
  app.require_subcommand(0, 1);
  bool list_flag = false;
  app.add_flag("--list", list_flag, "Print scenario ids and exit");

  auto* list_cmd = app.add_subcommand("list", "Print scenario ids");
  auto* run_cmd = app.add_subcommand("run", "Run one scenario or all");
  std::string selector;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool force = false;
  std::vector<std::string> sets;
  std::string config_file;
  run_cmd->add_option("scenario", selector, "Scenario id or 'all'")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Random seed (default 0)");
  auto* out_opt = run_cmd->add_option("--out", out_dir, "Output directory (default results)");
  auto* jobs_opt = run_cmd->add_option("--jobs", jobs, "Scenarios run concurrently (default 1)")->check(CLI::Range(1, 256));
  auto* force_opt = run_cmd->add_flag("--force", force, "Allow a non-empty output directory");
  run_cmd->add_option("--set", sets, "Parameter override key=value (repeatable)");
  run_cmd->add_option("--config", config_file, "Flat key = value file");

  ParseResult result;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    result.exit_code = app.exit(e, out, err);
    return result;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    result.exit_code = kExitUsage;
    return result;
  }

  if (list_flag || list_cmd->parsed()) {
    result.action = Action::list;
    return result;
  }
  if (!run_cmd->parsed()) {
    err << app.help();
    result.exit_code = kExitUsage;
    return result;
  }

  try {
    RunConfig& c = result.config;
    c.selector = selector;
    if (!config_file.empty()) {
      for (auto& [k, v] : read_config_file(config_file)) {
        if (k == "seed") {
          c.seed = parse_int<std::uint64_t>(k, v);
        } else if (k == "out") {
          c.output_dir = v;
        } else if (k == "jobs") {
          c.jobs = parse_int<int>(k, v);
        } else if (k == "force") {
          c.force = v == "1" || v == "true";
        } else {
          c.overrides[k] = v;
        }
      }
    }
    if (seed_opt->count()) c.seed = seed;
    if (out_opt->count()) c.output_dir = out_dir;
    if (jobs_opt->count()) c.jobs = jobs;
    if (force_opt->count()) c.force = force;
    if (c.jobs < 1) throw UsageError("--jobs must be at least 1");
    for (const auto& s : sets) {
      auto [k, v] = split_assignment(s);
      c.overrides[k] = v;
    }
    validate_overrides(c);
    result.action = Action::run;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    result.exit_code = kExitUsage;
  }
  return result;
}

int execute(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<std::string> ids;
  try {
    validate_overrides(config);
    ids = selected_ids(config.selector);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::error_code ec;
  const auto& dir = config.output_dir;
  if (std::filesystem::exists(dir, ec)) {
    if (!std::filesystem::is_directory(dir, ec)) {
      err << "error: output path " << dir << " is not a directory\n";
      return kExitRuntime;
    }
    if (!std::filesystem::is_empty(dir, ec) && !config.force) {
      err << "error: output directory " << dir << " is not empty (use --force)\n";
      return kExitUsage;
    }
  }
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    err << "error: cannot create output directory " << dir << ": " << ec.message() << '\n';
    return kExitRuntime;
  }
  {
    // Probe writability before running anything.
    const auto probe = dir / ".write-probe";
    std::ofstream os(probe);
    if (!os) {
      err << "error: output directory " << dir << " is not writable\n";
      return kExitRuntime;
    }
    os.close();
    std::filesystem::remove(probe, ec);
  }

  std::vector<Outcome> outcomes(ids.size());
  if (config.jobs <= 1 || ids.size() <= 1) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      outcomes[k] = run_one(ids[k], config);
      out << outcomes[k].line << std::endl;
    }
  } else {
    std::mutex m;
    std::size_t next = 0;
    auto worker = [&] {
      for (;;) {
        std::size_t k;
        {
          std::lock_guard lock(m);
          if (next >= ids.size()) return;
          k = next++;
        }
        outcomes[k] = run_one(ids[k], config);
      }
    };
    std::vector<std::thread> pool;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), ids.size());
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (const auto& o : outcomes) out << o.line << '\n';
    out.flush();
  }

  int code = kExitPass;
  for (const auto& o : outcomes) code = std::max(code, o.code);
  return code;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const auto parsed = parse_config(argc, argv, out, err);
  switch (parsed.action) {
    case Action::list:
      print_scenarios(out);
      return kExitPass;
    case Action::run:
      return execute(parsed.config, out, err);
    case Action::done:
      break;
  }
  return parsed.exit_code;
}

}  // namespace gmt::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace gmt::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

struct RunConfig {
  std::string selector = "all";  ///< scenario id or "all"
  std::filesystem::path output_dir = "results";
  std::uint64_t seed = 0;
  int jobs = 1;
  bool force = false;
  std::map<std::string, std::string> overrides;
};

/// Thrown for anything that maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` lines; '#' starts a comment. Keys seed, out, jobs and
/// force configure the run, everything else is a scenario override.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Checks override keys against the selected scenarios' tables and that each
/// value has the shape (number, number list, text) of the default.
void validate_overrides(const RunConfig& config);

enum class Action { run, list, done };

struct ParseResult {
  Action action = Action::done;
  RunConfig config;
  int exit_code = kExitPass;
};

/// `gmt-lab run <id|all> [--seed N] [--out DIR] [--jobs N] [--force]
/// [--set key=value]... [--config FILE]`, `gmt-lab list`, `gmt-lab --list`.
ParseResult parse_config(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

void print_scenarios(std::ostream& out);

/// Runs the selection, writes <out>/<id>/..., prints one summary line per
/// scenario and returns the exit code.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gmt::cli

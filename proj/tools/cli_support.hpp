#pragma once

// Config parsing, hashing, caching and CSV output for the command-line driver.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "normbranch/branch.hpp"
#include "normbranch/core.hpp"

namespace normbranch::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode { kExitOk = 0, kExitEmpty = 2, kExitSolver = 3, kExitConfig = 4 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Keys accepted in the "command" block of each subcommand.
const std::map<std::string, std::set<std::string>>& command_keys();

struct RunConfig {
  std::string command;
  ProblemSpec spec;
  nlohmann::json block;      // the command block, overrides merged in
  nlohmann::json canonical;  // the full config the hash is taken over
};

/// Validates the top-level keys, the problem fields and the command block.
/// Throws ConfigError.
RunConfig parse_config(const nlohmann::json& config, const std::string& command);

/// Reads and parses a config file. Throws ConfigError.
nlohmann::json read_config_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

/// SHA-256 over version, command and the canonical (key-sorted, compact) config.
std::string config_hash(const RunConfig& run);

/// Shortest decimal that round-trips.
std::string format_double(double x);

std::string csv_line(const std::vector<double>& values);

extern const std::vector<std::string> kBranchColumns;

std::string branch_csv(const std::vector<BranchPoint>& points);

nlohmann::json point_json(const BranchPoint& p);

/// Writes to a temporary sibling, then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// NORMBRANCH_CACHE_DIR, else $XDG_CACHE_HOME/normbranch, else ~/.cache/normbranch.
std::filesystem::path cache_dir();

std::optional<nlohmann::json> cache_load(const std::filesystem::path& dir, const std::string& hash);
void cache_store(const std::filesystem::path& dir, const std::string& hash, const nlohmann::json& entry);

// typed accessors for command-block values; throw ConfigError on type mismatch
double get_number(const nlohmann::json& block, const std::string& key, double fallback);
std::optional<double> get_optional_number(const nlohmann::json& block, const std::string& key);
int get_int(const nlohmann::json& block, const std::string& key, int fallback);
std::vector<double> get_numbers(const nlohmann::json& block, const std::string& key, std::vector<double> fallback);
std::optional<std::string> get_string(const nlohmann::json& block, const std::string& key);

}  // namespace normbranch::cli

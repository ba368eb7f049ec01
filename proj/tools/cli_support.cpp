#include "cli_support.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace normbranch::cli {

using nlohmann::json;

const std::map<std::string, std::set<std::string>>& command_keys() {
  static const std::set<std::string> window = {"lambda_min", "lambda_max", "window_offset", "samples", "csv"};
  static const std::map<std::string, std::set<std::string>> keys = [] {
    std::map<std::string, std::set<std::string>> k;
    k["solve"] = {"omega", "center_hint", "rtol", "atol", "profile_csv"};
    k["verify"] = {"omega", "center_hint", "rtol", "atol", "strip_width"};
    k["branch"] = window;
    k["rho-star"] = window;
    k["normalized"] = window;
    k["normalized"].insert("rho");
    k["minimize"] = {"rho", "intervals", "final_intervals", "tolerance", "alpha", "profile_csv"};
    k["pass"] = {"rho",   "intervals",    "nodes",        "final_intervals", "eps0",
                 "alpha", "cutoff_inner", "cutoff_outer", "eta_grid",        "profile_csv"};
    k["bubbles"] = {"eps", "csv"};
    k["theta"] = {"eps_fractions", "intervals", "csv"};
    return k;
  }();
  return keys;
}

namespace {

double required_number(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing required key \"") + key + "\"");
  if (!j.at(key).is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number");
  return j.at(key).get<double>();
}

double optional_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number");
  return j.at(key).get<double>();
}

}  // namespace

RunConfig parse_config(const json& config, const std::string& command) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> top = {"dimension", "radius", "mu", "p", "q", "eta", "command"};
  for (const auto& [k, v] : config.items())
    if (!top.count(k)) throw ConfigError("unknown key \"" + k + "\"");
  const auto allowed = command_keys().find(command);
  if (allowed == command_keys().end()) throw ConfigError("unknown command \"" + command + "\"");
  RunConfig run;
  run.command = command;
  if (!config.contains("dimension") || !config.at("dimension").is_number_integer())
    throw ConfigError("\"dimension\" must be an integer");
  run.spec.dimension = config.at("dimension").get<int>();
  run.spec.radius = optional_number(config, "radius", 1.0);
  run.spec.mu = optional_number(config, "mu", 0.0);
  run.spec.p = optional_number(config, "p", 2.0);
  run.spec.q = required_number(config, "q");
  run.spec.eta = optional_number(config, "eta", 1.0);
  try {
    run.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  run.block = config.value("command", json::object());
  if (!run.block.is_object()) throw ConfigError("\"command\" must be an object");
  for (const auto& [k, v] : run.block.items())
    if (!allowed->second.count(k)) throw ConfigError("unknown key \"command." + k + "\" for " + command);
  run.canonical = config;
  run.canonical["command"] = run.block;
  return run;
}

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string config_hash(const RunConfig& run) {
  return sha256_hex(std::string(kVersion) + "\n" + run.command + "\n" + run.canonical.dump());
}

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string csv_line(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += format_double(values[i]);
  }
  return s + '\n';
}

const std::vector<std::string> kBranchColumns = {"lambda",        "omega",          "center_value",
                                                 "rho",           "energy",         "grad_norm_sq",
                                                 "boundary_slope", "pohozaev_residual", "nehari_residual"};

std::string branch_csv(const std::vector<BranchPoint>& points) {
  std::string s;
  for (std::size_t i = 0; i < kBranchColumns.size(); ++i) s += (i ? "," : "") + kBranchColumns[i];
  s += '\n';
  for (const auto& p : points)
    s += csv_line({p.lambda, p.omega, p.centerValue, p.rho, p.energy, p.gradNormSq, p.boundarySlope,
                   p.pohozaevResidual, p.nehariResidual});
  return s;
}

json point_json(const BranchPoint& p) {
  return {{"lambda", p.lambda},
          {"omega", p.omega},
          {"center_value", p.centerValue},
          {"rho", p.rho},
          {"energy", p.energy},
          {"grad_norm_sq", p.gradNormSq},
          {"boundary_slope", p.boundarySlope},
          {"pohozaev_residual", p.pohozaevResidual},
          {"nehari_residual", p.nehariResidual}};
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::filesystem::path cache_dir() {
  if (const char* d = std::getenv("NORMBRANCH_CACHE_DIR"); d && *d) return d;
  if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x) return std::filesystem::path(x) / "normbranch";
  if (const char* h = std::getenv("HOME"); h && *h) return std::filesystem::path(h) / ".cache" / "normbranch";
  return std::filesystem::temp_directory_path() / "normbranch";
}

std::optional<json> cache_load(const std::filesystem::path& dir, const std::string& hash) {
  std::ifstream in(dir / (hash + ".json"));
  if (!in) return std::nullopt;
  try {
    return json::parse(in);
  } catch (const json::parse_error&) {
    return std::nullopt;  // a damaged entry is a miss
  }
}

void cache_store(const std::filesystem::path& dir, const std::string& hash, const json& entry) {
  write_atomic(dir / (hash + ".json"), entry.dump());
}

double get_number(const json& block, const std::string& key, double fallback) {
  return get_optional_number(block, key).value_or(fallback);
}

std::optional<double> get_optional_number(const json& block, const std::string& key) {
  if (!block.contains(key)) return std::nullopt;
  if (!block.at(key).is_number()) throw ConfigError("\"command." + key + "\" must be a number");
  return block.at(key).get<double>();
}

int get_int(const json& block, const std::string& key, int fallback) {
  if (!block.contains(key)) return fallback;
  if (!block.at(key).is_number_integer()) throw ConfigError("\"command." + key + "\" must be an integer");
  return block.at(key).get<int>();
}

std::vector<double> get_numbers(const json& block, const std::string& key, std::vector<double> fallback) {
  if (!block.contains(key)) return fallback;
  const json& a = block.at(key);
  if (!a.is_array()) throw ConfigError("\"command." + key + "\" must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : a) {
    if (!v.is_number()) throw ConfigError("\"command." + key + "\" must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::optional<std::string> get_string(const json& block, const std::string& key) {
  if (!block.contains(key)) return std::nullopt;
  if (!block.at(key).is_string()) throw ConfigError("\"command." + key + "\" must be a string");
  return block.at(key).get<std::string>();
}

}  // namespace normbranch::cli

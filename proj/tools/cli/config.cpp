#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

#include "osslc/error.hpp"
#include "osslc/github.hpp"

namespace osslc::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string env_name(const std::string& key) {
  std::string out = "OSSLC_";
  for (char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::usage, "setting '" + key + "' expects a number, got '" + v + "'");
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long n = std::stol(v, &used);
    if (used == v.size()) return n;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::usage, "setting '" + key + "' expects an integer, got '" + v + "'");
}

bool to_bool(const std::string& key, std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error(ErrorKind::usage, "setting '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  }
  return out;
}

}  // namespace

EnvLookup system_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str()); v && *v) return std::string(v);
    return std::nullopt;
  };
}

void RunConfig::validate() const {
  valuation.validate();
  if (!(stability_fraction > 0.0 && stability_fraction <= 1.0)) {
    throw Error(ErrorKind::usage, "stability_fraction must lie in (0, 1]");
  }
  if (fetch_concurrency < 1) throw Error(ErrorKind::usage, "fetch_concurrency must be at least 1");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "projects",          "cutoff",          "cache_dir",          "output_dir",
      "monthly_salary",    "time_fraction",   "maturation_threshold", "currency",
      "value_per_download", "demand_window_months", "stability_fraction", "fetch_concurrency",
      "downloads",         "api_base",        "include_bots"};
  return keys;
}

std::map<std::string, std::string> parse_config(const std::string& text,
                                                const std::string& source) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::usage, source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw Error(ErrorKind::usage,
                  source + ":" + std::to_string(lineno) + ": unknown setting '" + key + "'");
    }
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

RunConfig resolve_config(const std::map<std::string, std::string>& file,
                         const std::map<std::string, std::string>& flags,
                         const EnvLookup& env) {
  std::map<std::string, std::string> settings = file;
  for (const auto& key : config_keys()) {
    if (auto v = env(env_name(key))) settings[key] = *v;
  }
  for (const auto& [k, v] : flags) settings[k] = v;

  RunConfig cfg;
  for (const auto& [key, v] : settings) {
    if (key == "projects") cfg.projects = split_list(v);
    else if (key == "cutoff") {
      try {
        cfg.cutoff = YearMonth::parse(v);
      } catch (const Error&) {
        throw Error(ErrorKind::usage, "cutoff must be YYYY-MM, got '" + v + "'");
      }
    } else if (key == "cache_dir") cfg.cache_dir = v;
    else if (key == "output_dir") cfg.output_dir = v;
    else if (key == "monthly_salary") cfg.valuation.monthly_salary = to_double(key, v);
    else if (key == "time_fraction") cfg.valuation.time_fraction = to_double(key, v);
    else if (key == "maturation_threshold") cfg.valuation.maturation_threshold = to_double(key, v);
    else if (key == "currency") cfg.valuation.currency = v;
    else if (key == "value_per_download") cfg.valuation.value_per_download = to_double(key, v);
    else if (key == "demand_window_months") cfg.valuation.demand_window_months = static_cast<int>(to_long(key, v));
    else if (key == "stability_fraction") cfg.stability_fraction = to_double(key, v);
    else if (key == "fetch_concurrency") {
      const long n = to_long(key, v);
      if (n < 1) throw Error(ErrorKind::usage, "fetch_concurrency must be at least 1");
      cfg.fetch_concurrency = static_cast<std::size_t>(n);
    } else if (key == "downloads") cfg.downloads = v;
    else if (key == "api_base") cfg.api_base = v;
    else if (key == "include_bots") cfg.include_bots = to_bool(key, v);
    else if (key == "token") cfg.token = v;
  }
  if (!cfg.token) cfg.token = env(kTokenEnvVar);
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw Error(ErrorKind::usage, e.what());
  }
  return cfg;
}

}  // namespace osslc::cli

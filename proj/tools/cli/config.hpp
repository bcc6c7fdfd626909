#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "osslc/calendar.hpp"
#include "osslc/valuation.hpp"

namespace osslc::cli {

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Process environment.
EnvLookup system_env();

struct RunConfig {
  std::vector<std::string> projects;
  std::optional<YearMonth> cutoff;
  std::filesystem::path cache_dir = "cache";
  std::filesystem::path output_dir = "out";
  ValuationConfig valuation;
  double stability_fraction = 0.75;
  std::size_t fetch_concurrency = 4;
  std::optional<std::string> token;
  // Download counts: a CSV path or the base URL of a download-statistics API.
  std::optional<std::string> downloads;
  std::string api_base = "https://api.github.com";
  bool include_bots = false;

  void validate() const;
};

// Keys accepted in config files; the environment variable for key k is
// OSSLC_<K> with the key upper-cased.
const std::vector<std::string>& config_keys();

// Flat "key = value" text, '#' starts a comment. Unknown keys are errors.
std::map<std::string, std::string> parse_config(const std::string& text,
                                                const std::string& source);

// Layers settings with precedence flag > env > file > default.
RunConfig resolve_config(const std::map<std::string, std::string>& file,
                         const std::map<std::string, std::string>& flags,
                         const EnvLookup& env);

}  // namespace osslc::cli

#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "osslc/calendar.hpp"
#include "osslc/ingest.hpp"

namespace osslc {

inline constexpr const char* kTokenEnvVar = "GITHUB_TOKEN";

struct FetchOptions {
  std::string api_base = "https://api.github.com";
  std::optional<std::string> token;
  std::optional<YearMonth> since;
  std::size_t concurrency = 4;
  std::size_t per_page = 100;
  int max_retries = 4;
  std::chrono::milliseconds initial_backoff{1000};
  std::chrono::milliseconds max_backoff{60000};
  std::chrono::seconds timeout{30};
};

// Repository identifier "owner/name".
struct RepoId {
  std::string owner;
  std::string name;

  static RepoId parse(const std::string& text);
  std::string str() const { return owner + "/" + name; }
  // Filesystem-safe form used for cache and report file names.
  std::string slug() const { return owner + "-" + name; }
};

// Lists every commit of the repository, fetches per-commit line stats for
// shas missing from the cache, and appends them to it. Returns the full
// cache contents (previous runs included), so re-running is idempotent.
// Invokes on_commit for each newly cached record, from worker threads.
std::vector<CommitRecord> fetch_commits(
    const RepoId& repo, CommitCache& cache, const FetchOptions& options,
    const std::function<void(const CommitRecord&)>& on_commit = {});

}  // namespace osslc

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "osslc/calendar.hpp"

namespace osslc {

struct CommitRecord {
  std::string sha;
  std::string author_name;
  std::string author_email;
  std::string author_id;  // canonical identity, see canonicalize_author
  bool is_bot = false;
  Timestamp timestamp{};
  std::int64_t additions = 0;
  std::int64_t deletions = 0;

  std::int64_t lines_changed() const noexcept { return additions + deletions; }
  bool operator==(const CommitRecord&) const = default;
};

struct AuthorIdentity {
  std::string id;
  bool is_bot = false;
};

// Suffixes marking automation accounts, matched case-insensitively against
// the display name and the email local part.
std::vector<std::string> default_bot_patterns();

AuthorIdentity canonicalize_author(
    std::string_view raw_name, std::string_view raw_email,
    const std::vector<std::string>& bot_patterns = default_bot_patterns());

// Cache format: one JSON object per line with sha, author_name, author_email,
// timestamp, additions, deletions.
std::vector<CommitRecord> load_commit_log(const std::filesystem::path& path);
std::vector<CommitRecord> parse_commit_log(std::istream& in,
                                           const std::string& source_name);
std::string to_cache_line(const CommitRecord& commit);

// Append-only commit cache. Writes are serialized and deduplicated by sha, so
// concurrent fetch workers may share one instance.
class CommitCache {
 public:
  explicit CommitCache(std::filesystem::path path);

  const std::filesystem::path& path() const noexcept { return path_; }
  bool contains(const std::string& sha) const;
  // Returns false when the sha was already cached.
  bool append(const CommitRecord& commit);
  std::vector<CommitRecord> records() const;
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::vector<CommitRecord> records_;
  std::unordered_set<std::string> shas_;
};

struct MonthlySeries {
  std::string project;
  std::vector<YearMonth> months;
  std::vector<std::int64_t> developers;      // L(t)
  std::vector<std::int64_t> lines_changed;   // dA(t)
  std::vector<std::int64_t> cum_lines;       // A(t)
  std::vector<std::int64_t> cum_dev_months;  // cumulative L

  std::size_t size() const noexcept { return months.size(); }
  bool empty() const noexcept { return months.empty(); }

  // First n months, with cumulative columns unchanged.
  MonthlySeries head(std::size_t n) const;
  // Builds cumulative columns from developers and lines_changed.
  static MonthlySeries from_counts(std::string project, YearMonth first,
                                   std::vector<std::int64_t> developers,
                                   std::vector<std::int64_t> lines_changed);
  // Checks contiguity, non-negativity and cumulative consistency.
  void validate() const;
};

struct AggregateOptions {
  bool exclude_bots = true;
  // Series is extended with zero months up to this month; later commits are
  // dropped.
  std::optional<YearMonth> cutoff;
};

MonthlySeries aggregate_monthly(std::span<const CommitRecord> commits,
                                const AggregateOptions& options = {},
                                std::string project = {});

// CSV with header month,developers,lines_changed,cum_lines,cum_dev_months.
MonthlySeries read_series_csv(const std::filesystem::path& path);
MonthlySeries parse_series_csv(std::istream& in, const std::string& source_name);
void write_series_csv(std::ostream& out, const MonthlySeries& series);

}  // namespace osslc

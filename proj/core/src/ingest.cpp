#include "osslc/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "osslc/error.hpp"

namespace osslc {
namespace {

using json = nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string normalize_name(std::string_view name) {
  std::string out;
  bool space = false;
  for (char c : trim(name)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

CommitRecord parse_record(const std::string& line, const std::string& source,
                          std::size_t lineno) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(source, lineno, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(source, lineno, "expected a JSON object");

  auto string_field = [&](const char* name, bool required) -> std::string {
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) {
      if (required) throw ParseError(source, lineno, std::string("missing field '") + name + "'");
      return {};
    }
    if (!it->is_string()) {
      throw ParseError(source, lineno, std::string("field '") + name + "' must be a string");
    }
    return it->get<std::string>();
  };
  auto count_field = [&](const char* name) -> std::int64_t {
    auto it = j.find(name);
    if (it == j.end()) throw ParseError(source, lineno, std::string("missing field '") + name + "'");
    if (!it->is_number_integer()) {
      throw ParseError(source, lineno, std::string("field '") + name + "' must be an integer");
    }
    const auto v = it->get<std::int64_t>();
    if (v < 0) {
      throw ParseError(source, lineno, std::string("field '") + name +
                                           "' must be non-negative, got " + std::to_string(v));
    }
    return v;
  };

  CommitRecord rec;
  rec.sha = string_field("sha", true);
  if (rec.sha.empty()) throw ParseError(source, lineno, "field 'sha' is empty");
  rec.author_name = string_field("author_name", false);
  rec.author_email = string_field("author_email", false);
  const std::string ts = string_field("timestamp", true);
  try {
    rec.timestamp = parse_timestamp(ts);
  } catch (const ParseError& e) {
    throw ParseError(source, lineno, std::string("field 'timestamp': ") + e.what());
  }
  rec.additions = count_field("additions");
  rec.deletions = count_field("deletions");
  const auto identity = canonicalize_author(rec.author_name, rec.author_email);
  rec.author_id = identity.id;
  rec.is_bot = identity.is_bot;
  return rec;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.emplace_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::int64_t parse_count(const std::string& text, const std::string& source,
                         std::size_t lineno, const char* column) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(source, lineno,
                     std::string("column '") + column + "' is not an integer: '" + text + "'");
  }
  if (v < 0) {
    throw ParseError(source, lineno, std::string("column '") + column + "' must be non-negative");
  }
  return v;
}

}  // namespace

std::vector<std::string> default_bot_patterns() { return {"[bot]", "-bot"}; }

AuthorIdentity canonicalize_author(std::string_view raw_name, std::string_view raw_email,
                                   const std::vector<std::string>& bot_patterns) {
  const std::string email = lower(trim(raw_email));
  const std::string name = normalize_name(raw_name);

  AuthorIdentity out;
  if (!email.empty()) {
    out.id = email;
  } else if (!name.empty()) {
    out.id = name;
  } else {
    out.id = "unknown";
    return out;
  }

  const std::string_view local = std::string_view(email).substr(0, email.find('@'));
  for (const auto& pattern : bot_patterns) {
    const std::string p = lower(pattern);
    if (p.empty()) continue;
    if (ends_with(name, p) || (!local.empty() && ends_with(local, p))) {
      out.is_bot = true;
      break;
    }
  }
  return out;
}

std::vector<CommitRecord> parse_commit_log(std::istream& in, const std::string& source_name) {
  std::vector<CommitRecord> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto rec = parse_record(line, source_name, lineno);
    if (seen.insert(rec.sha).second) out.push_back(std::move(rec));
  }
  return out;
}

std::vector<CommitRecord> load_commit_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open commit log");
  return parse_commit_log(in, path.string());
}

std::string to_cache_line(const CommitRecord& commit) {
  json j = {
      {"sha", commit.sha},
      {"author_name", commit.author_name},
      {"author_email", commit.author_email},
      {"timestamp", format_timestamp(commit.timestamp)},
      {"additions", commit.additions},
      {"deletions", commit.deletions},
  };
  return j.dump();
}

CommitCache::CommitCache(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    records_ = load_commit_log(path_);
    for (const auto& r : records_) shas_.insert(r.sha);
  } else {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream touch(path_, std::ios::app);
    if (!touch) throw Error(ErrorKind::data, "cannot create cache file " + path_.string());
  }
}

bool CommitCache::contains(const std::string& sha) const {
  std::lock_guard lock(mutex_);
  return shas_.contains(sha);
}

bool CommitCache::append(const CommitRecord& commit) {
  std::lock_guard lock(mutex_);
  if (!shas_.insert(commit.sha).second) return false;
  std::ofstream out(path_, std::ios::app);
  out << to_cache_line(commit) << '\n';
  out.flush();
  if (!out) {
    shas_.erase(commit.sha);
    throw Error(ErrorKind::data, "failed writing cache file " + path_.string());
  }
  records_.push_back(commit);
  return true;
}

std::vector<CommitRecord> CommitCache::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::size_t CommitCache::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

MonthlySeries MonthlySeries::head(std::size_t n) const {
  n = std::min(n, size());
  MonthlySeries out;
  out.project = project;
  out.months.assign(months.begin(), months.begin() + n);
  out.developers.assign(developers.begin(), developers.begin() + n);
  out.lines_changed.assign(lines_changed.begin(), lines_changed.begin() + n);
  out.cum_lines.assign(cum_lines.begin(), cum_lines.begin() + n);
  out.cum_dev_months.assign(cum_dev_months.begin(), cum_dev_months.begin() + n);
  return out;
}

MonthlySeries MonthlySeries::from_counts(std::string project, YearMonth first,
                                         std::vector<std::int64_t> developers,
                                         std::vector<std::int64_t> lines_changed) {
  if (developers.size() != lines_changed.size()) {
    throw Error(ErrorKind::data, "developer and line-count columns differ in length");
  }
  MonthlySeries s;
  s.project = std::move(project);
  std::int64_t a = 0;
  std::int64_t l = 0;
  for (std::size_t i = 0; i < developers.size(); ++i) {
    if (developers[i] < 0 || lines_changed[i] < 0) {
      throw Error(ErrorKind::data, "negative monthly count in month " + (first + i).str());
    }
    s.months.push_back(first + static_cast<long>(i));
    a += lines_changed[i];
    l += developers[i];
    s.cum_lines.push_back(a);
    s.cum_dev_months.push_back(l);
  }
  s.developers = std::move(developers);
  s.lines_changed = std::move(lines_changed);
  return s;
}

void MonthlySeries::validate() const {
  const auto n = size();
  if (developers.size() != n || lines_changed.size() != n || cum_lines.size() != n ||
      cum_dev_months.size() != n) {
    throw Error(ErrorKind::data, "series columns differ in length");
  }
  std::int64_t a = 0;
  std::int64_t l = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && months[i] - months[i - 1] != 1) {
      throw Error(ErrorKind::data, "months not contiguous at " + months[i].str());
    }
    if (developers[i] < 0 || lines_changed[i] < 0) {
      throw Error(ErrorKind::data, "negative count at " + months[i].str());
    }
    a += lines_changed[i];
    l += developers[i];
    if (cum_lines[i] != a || cum_dev_months[i] != l) {
      throw Error(ErrorKind::data, "cumulative columns inconsistent at " + months[i].str());
    }
  }
}

MonthlySeries aggregate_monthly(std::span<const CommitRecord> commits,
                                const AggregateOptions& options, std::string project) {
  std::map<YearMonth, std::set<std::string>> devs;
  std::map<YearMonth, std::int64_t> lines;
  for (const auto& c : commits) {
    if (options.exclude_bots && c.is_bot) continue;
    const auto month = YearMonth::of(c.timestamp);
    if (options.cutoff && month > *options.cutoff) continue;
    devs[month].insert(c.author_id);
    lines[month] += c.lines_changed();
  }

  MonthlySeries s;
  s.project = std::move(project);
  if (devs.empty()) return s;

  const YearMonth first = devs.begin()->first;
  YearMonth last = devs.rbegin()->first;
  if (options.cutoff && *options.cutoff > last) last = *options.cutoff;

  std::vector<std::int64_t> l;
  std::vector<std::int64_t> da;
  for (YearMonth m = first; m <= last; ++m) {
    auto it = devs.find(m);
    l.push_back(it == devs.end() ? 0 : static_cast<std::int64_t>(it->second.size()));
    da.push_back(it == devs.end() ? 0 : lines[m]);
  }
  return MonthlySeries::from_counts(std::move(s.project), first, std::move(l), std::move(da));
}

MonthlySeries parse_series_csv(std::istream& in, const std::string& source_name) {
  static const std::vector<std::string> kHeader = {"month", "developers", "lines_changed",
                                                   "cum_lines", "cum_dev_months"};
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(source_name, 1, "missing header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_csv(line) != kHeader) {
    throw ParseError(source_name, lineno,
                     "expected header month,developers,lines_changed,cum_lines,cum_dev_months");
  }

  MonthlySeries s;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != kHeader.size()) {
      throw ParseError(source_name, lineno, "expected 5 columns");
    }
    try {
      s.months.push_back(YearMonth::parse(cells[0]));
    } catch (const ParseError&) {
      throw ParseError(source_name, lineno, "column 'month' must be YYYY-MM");
    }
    s.developers.push_back(parse_count(cells[1], source_name, lineno, "developers"));
    s.lines_changed.push_back(parse_count(cells[2], source_name, lineno, "lines_changed"));
    s.cum_lines.push_back(parse_count(cells[3], source_name, lineno, "cum_lines"));
    s.cum_dev_months.push_back(parse_count(cells[4], source_name, lineno, "cum_dev_months"));
  }
  try {
    s.validate();
  } catch (const Error& e) {
    throw ParseError(source_name, 0, e.what());
  }
  return s;
}

MonthlySeries read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open series file");
  auto s = parse_series_csv(in, path.string());
  s.project = path.stem().string();
  return s;
}

void write_series_csv(std::ostream& out, const MonthlySeries& series) {
  out << "month,developers,lines_changed,cum_lines,cum_dev_months\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << series.months[i].str() << ',' << series.developers[i] << ','
        << series.lines_changed[i] << ',' << series.cum_lines[i] << ','
        << series.cum_dev_months[i] << '\n';
  }
}

}  // namespace osslc

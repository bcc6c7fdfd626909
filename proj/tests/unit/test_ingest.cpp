#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "fixture_server.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "osslc/error.hpp"
#include "osslc/github.hpp"
#include "osslc/ingest.hpp"

using namespace osslc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("osslc_ingest_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<CommitRecord> five_commits() {
  return {
      oracle::commit("a1", "dev-a", "2020-01-03T10:00:00Z", 10, 2),
      oracle::commit("a2", "dev-a", "2020-01-10T10:00:00Z", 5, 5),
      oracle::commit("a3", "dev-a", "2020-01-31T23:59:59Z", 1, 0),
      oracle::commit("b1", "dev-b", "2020-01-20T08:00:00Z", 7, 3),
      oracle::commit("a4", "dev-a", "2020-03-01T00:00:00Z", 4, 4),
  };
}

}  // namespace

TEST_CASE("canonical author identity") {
  CHECK(canonicalize_author("Jane Doe", "JANE@X.COM").id == "jane@x.com");
  CHECK_FALSE(canonicalize_author("Jane Doe", "JANE@X.COM").is_bot);
  CHECK(canonicalize_author("dependabot[bot]", "").is_bot);
  CHECK(canonicalize_author("", "").id == "unknown");
  CHECK(canonicalize_author("  Jane   DOE ", "").id == "jane doe");
  CHECK(canonicalize_author("ci", "release-bot@corp.io").is_bot);
  CHECK_FALSE(canonicalize_author("Abbott", "abbott@corp.io").is_bot);
}

TEST_CASE("commit log parsing") {
  SUBCASE("single record") {
    std::istringstream in(
        R"({"sha":"s1","author_name":"author","author_email":"","timestamp":"2020-01-15T00:00:00Z","additions":10,"deletions":5})");
    auto log = parse_commit_log(in, "log");
    REQUIRE(log.size() == 1);
    CHECK(log[0].sha == "s1");
    CHECK(log[0].author_id == "author");
    CHECK(log[0].additions == 10);
    CHECK(log[0].deletions == 5);
    CHECK(log[0].timestamp == parse_timestamp("2020-01-15T00:00:00Z"));
  }
  SUBCASE("empty input") {
    std::istringstream in("");
    CHECK(parse_commit_log(in, "log").empty());
  }
  SUBCASE("negative additions name the field and line") {
    std::istringstream in(
        "\n"
        R"({"sha":"s1","author_name":"a","author_email":"","timestamp":"2020-01-15T00:00:00Z","additions":-1,"deletions":5})");
    try {
      parse_commit_log(in, "log");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("additions") != std::string::npos);
      CHECK(e.kind() == ErrorKind::data);
    }
  }
  SUBCASE("missing field") {
    std::istringstream in(R"({"sha":"s1","timestamp":"2020-01-15T00:00:00Z","additions":1})");
    CHECK_THROWS_WITH_AS(parse_commit_log(in, "log"), doctest::Contains("deletions"), ParseError);
  }
  SUBCASE("bad timestamp") {
    std::istringstream in(
        R"({"sha":"s1","author_name":"a","author_email":"","timestamp":"yesterday","additions":1,"deletions":1})");
    CHECK_THROWS_WITH_AS(parse_commit_log(in, "log"), doctest::Contains("timestamp"), ParseError);
  }
  SUBCASE("offsets fold into UTC") {
    CHECK(parse_timestamp("2020-02-01T01:30:00+02:00") == parse_timestamp("2020-01-31T23:30:00Z"));
    CHECK(YearMonth::of(parse_timestamp("2020-02-01T01:30:00+02:00")) == YearMonth(2020, 1));
  }
}

TEST_CASE("monthly aggregation examples") {
  SUBCASE("one commit") {
    const std::vector<CommitRecord> one{oracle::commit("x", "a", "2020-01-15T00:00:00Z", 10, 5)};
    auto s = aggregate_monthly(one);
    REQUIRE(s.size() == 1);
    CHECK(s.months[0] == YearMonth(2020, 1));
    CHECK(s.developers == std::vector<std::int64_t>{1});
    CHECK(s.lines_changed == std::vector<std::int64_t>{15});
    CHECK(s.cum_lines == std::vector<std::int64_t>{15});
    CHECK(s.cum_dev_months == std::vector<std::int64_t>{1});
  }
  SUBCASE("five commits with a gap month") {
    const auto commits = five_commits();
    auto s = aggregate_monthly(commits);
    CHECK(s.months == std::vector<YearMonth>{{2020, 1}, {2020, 2}, {2020, 3}});
    CHECK(s.developers == std::vector<std::int64_t>{2, 0, 1});
    CHECK(s.cum_dev_months == std::vector<std::int64_t>{2, 2, 3});
    CHECK(s.lines_changed == std::vector<std::int64_t>{33, 0, 8});
    CHECK(s.cum_lines == std::vector<std::int64_t>{33, 33, 41});
  }
  SUBCASE("empty") { CHECK(aggregate_monthly(std::vector<CommitRecord>{}).empty()); }
  SUBCASE("bots excluded unless asked") {
    auto commits = five_commits();
    commits.push_back(oracle::commit("bot", "dependabot[bot]", "2020-01-05T00:00:00Z", 100, 0));
    CHECK(aggregate_monthly(commits).developers[0] == 2);
    CHECK(aggregate_monthly(commits).lines_changed[0] == 33);
    AggregateOptions keep;
    keep.exclude_bots = false;
    CHECK(aggregate_monthly(commits, keep).developers[0] == 3);
  }
  SUBCASE("cutoff extends and truncates") {
    auto commits = five_commits();
    AggregateOptions opts;
    opts.cutoff = YearMonth(2020, 5);
    auto s = aggregate_monthly(commits, opts);
    CHECK(s.size() == 5);
    CHECK(s.developers.back() == 0);
    opts.cutoff = YearMonth(2020, 2);
    s = aggregate_monthly(commits, opts);
    CHECK(s.size() == 2);
    CHECK(s.cum_lines.back() == 33);
  }
}

TEST_CASE("aggregation invariants over random commit lists") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CommitRecord> commits;
    const int n = 1 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      const int month = static_cast<int>(rng() % 30);
      const int day = 1 + static_cast<int>(rng() % 28);
      char when[32];
      std::snprintf(when, sizeof when, "%04d-%02d-%02dT12:00:00Z", 2015 + month / 12,
                    month % 12 + 1, day);
      commits.push_back(oracle::commit("c" + std::to_string(i),
                                       "dev" + std::to_string(rng() % 7), when,
                                       static_cast<std::int64_t>(rng() % 500),
                                       static_cast<std::int64_t>(rng() % 500)));
    }
    const auto s = aggregate_monthly(commits);
    s.validate();
    CHECK(std::accumulate(s.developers.begin(), s.developers.end(), std::int64_t{0}) ==
          s.cum_dev_months.back());
    std::int64_t total = 0;
    for (const auto& c : commits) total += c.lines_changed();
    CHECK(s.cum_lines.back() == total);

    auto shuffled = commits;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto t = aggregate_monthly(shuffled);
    CHECK(t.months == s.months);
    CHECK(t.developers == s.developers);
    CHECK(t.lines_changed == s.lines_changed);
  }
}

TEST_CASE("cache round trip is lossless and deduplicates") {
  TempDir dir;
  const auto file = dir.path / "cache.jsonl";
  auto commits = five_commits();
  commits[1].author_name = "Name \"quoted\" \xc3\xa9";
  {
    CommitCache cache(file);
    CHECK(fs::exists(file));
    for (const auto& c : commits) CHECK(cache.append(c));
    CHECK_FALSE(cache.append(commits[0]));
    CHECK(cache.size() == commits.size());
  }
  auto loaded = load_commit_log(file);
  auto key = [](const CommitRecord& a, const CommitRecord& b) { return a.sha < b.sha; };
  std::sort(loaded.begin(), loaded.end(), key);
  std::sort(commits.begin(), commits.end(), key);
  CHECK(loaded == commits);

  CommitCache reopened(file);
  CHECK(reopened.size() == commits.size());
  CHECK(reopened.contains("b1"));
}

TEST_CASE("series CSV round trip") {
  const auto commits = five_commits();
  auto s = aggregate_monthly(commits, {}, "demo");
  std::stringstream buf;
  write_series_csv(buf, s);
  CHECK(buf.str().rfind("month,developers,lines_changed,cum_lines,cum_dev_months\n", 0) == 0);
  auto back = parse_series_csv(buf, "demo.csv");
  CHECK(back.months == s.months);
  CHECK(back.developers == s.developers);
  CHECK(back.cum_lines == s.cum_lines);

  std::istringstream bad("month,developers,lines_changed,cum_lines,cum_dev_months\n2020-01,1,5,5,1\n2020-03,1,5,10,2\n");
  CHECK_THROWS_AS(parse_series_csv(bad, "bad.csv"), Error);
}

namespace {

using nlohmann::json;

// Serves `total` commits in pages of `page_size`, with per-commit detail.
struct FakeGitHub {
  FixtureServer fx;
  std::atomic<int> detail_requests{0};
  int total;
  int page_size;

  FakeGitHub(int total_commits, int per_page) : total(total_commits), page_size(per_page) {
    fx.server.Get("/repos/octo/demo/commits", [this](const httplib::Request& req,
                                                     httplib::Response& res) {
      const int page = req.has_param("page") ? std::stoi(req.get_param_value("page")) : 1;
      json arr = json::array();
      for (int i = (page - 1) * page_size; i < std::min(total, page * page_size); ++i) {
        arr.push_back({{"sha", "sha" + std::to_string(i)}});
      }
      if (page * page_size < total) {
        res.set_header("Link", "<" + fx.base() + "/repos/octo/demo/commits?per_page=" +
                                   std::to_string(page_size) + "&page=" +
                                   std::to_string(page + 1) + ">; rel=\"next\"");
      }
      res.set_content(arr.dump(), "application/json");
    });
    fx.server.Get(R"(/repos/octo/demo/commits/(sha\d+))", [this](const httplib::Request& req,
                                                                  httplib::Response& res) {
      ++detail_requests;
      const std::string sha = req.matches[1];
      const int i = std::stoi(sha.substr(3));
      json j = {{"sha", sha},
                {"commit",
                 {{"author",
                   {{"name", "Dev " + std::to_string(i % 2)},
                    {"email", "dev" + std::to_string(i % 2) + "@example.com"},
                    {"date", "2021-0" + std::to_string(1 + i / 2) + "-10T00:00:00Z"}}}}},
                {"stats", {{"additions", 10 * i}, {"deletions", i}}}};
      res.set_content(j.dump(), "application/json");
    });
    fx.start();
  }

  FetchOptions options() const {
    FetchOptions o;
    o.api_base = fx.base();
    o.per_page = static_cast<std::size_t>(page_size);
    o.initial_backoff = std::chrono::milliseconds(1);
    o.max_backoff = std::chrono::milliseconds(4);
    o.timeout = std::chrono::seconds(5);
    return o;
  }
};

// Answers every request with a fixed status.
struct FailingServer {
  FixtureServer fx;
  std::atomic<int> hits{0};

  explicit FailingServer(int status, httplib::Headers headers = {}) {
    fx.server.Get(".*", [=, this](const httplib::Request&, httplib::Response& res) {
      ++hits;
      res.status = status;
      for (const auto& [k, v] : headers) res.set_header(k, v);
      res.set_content("{}", "application/json");
    });
    fx.start();
  }

  FetchOptions options() const {
    FetchOptions o;
    o.api_base = fx.base();
    o.max_retries = 2;
    o.initial_backoff = std::chrono::milliseconds(1);
    o.max_backoff = std::chrono::milliseconds(4);
    return o;
  }
};

}  // namespace

TEST_CASE("fetch follows pagination and is idempotent") {
  TempDir dir;
  FakeGitHub gh(6, 2);
  const auto repo = RepoId::parse("octo/demo");
  CommitCache cache(dir.path / "octo-demo.jsonl");

  std::atomic<int> streamed{0};
  auto first = fetch_commits(repo, cache, gh.options(), [&](const CommitRecord&) { ++streamed; });
  CHECK(first.size() == 6);
  CHECK(streamed == 6);
  CHECK(gh.detail_requests == 6);

  std::vector<std::string> shas;
  for (const auto& c : first) shas.push_back(c.sha);
  std::sort(shas.begin(), shas.end());
  CHECK(std::unique(shas.begin(), shas.end()) == shas.end());

  auto again = fetch_commits(repo, cache, gh.options());
  CHECK(again.size() == 6);
  CHECK(gh.detail_requests == 6);
  CHECK(load_commit_log(cache.path()).size() == 6);

  auto series = aggregate_monthly(again);
  CHECK(series.developers == std::vector<std::int64_t>{2, 2, 2});
}

TEST_CASE("fetch of an empty repository") {
  TempDir dir;
  FailingServer srv(409);
  CommitCache cache(dir.path / "empty.jsonl");
  CHECK(fetch_commits(RepoId::parse("octo/empty"), cache, srv.options()).empty());
  CHECK(fs::exists(cache.path()));
  CHECK(fs::file_size(cache.path()) == 0);
}

TEST_CASE("fetch errors") {
  TempDir dir;
  CommitCache cache(dir.path / "c.jsonl");
  const auto repo = RepoId::parse("octo/private");

  SUBCASE("bad credentials name the token") {
    FailingServer srv(401);
    auto o = srv.options();
    o.token = "nope";
    CHECK_THROWS_WITH_AS(fetch_commits(repo, cache, o), doctest::Contains(kTokenEnvVar), AuthError);
  }
  SUBCASE("missing repository hints at a token") {
    FailingServer srv(404);
    try {
      fetch_commits(repo, cache, srv.options());
      FAIL("expected NotFoundError");
    } catch (const NotFoundError& e) {
      CHECK(std::string(e.what()).find(kTokenEnvVar) != std::string::npos);
      CHECK(e.kind() == ErrorKind::network);
    }
  }
  SUBCASE("rate limit retries then reports the reset time") {
    FailingServer srv(403, {{"X-RateLimit-Remaining", "0"}, {"X-RateLimit-Reset", "1767225600"}});
    try {
      fetch_commits(repo, cache, srv.options());
      FAIL("expected RateLimitError");
    } catch (const RateLimitError& e) {
      CHECK(e.reset_epoch() == 1767225600);
      CHECK(std::string(e.what()).find("1767225600") != std::string::npos);
    }
    CHECK(srv.hits == 3);
  }
  SUBCASE("plain 403 is a permission problem") {
    FailingServer srv(403);
    CHECK_THROWS_AS(fetch_commits(repo, cache, srv.options()), AuthError);
    CHECK(srv.hits == 1);
  }
  SUBCASE("server errors are retried") {
    FailingServer srv(502);
    CHECK_THROWS_AS(fetch_commits(repo, cache, srv.options()), NetworkError);
    CHECK(srv.hits == 3);
  }
}

TEST_CASE("transient failures recover") {
  TempDir dir;
  FixtureServer fx;
  std::atomic<int> calls{0};
  fx.server.Get("/repos/octo/flaky/commits", [&](const httplib::Request&, httplib::Response& res) {
    if (calls++ == 0) {
      res.status = 429;
      return;
    }
    res.set_content("[]", "application/json");
  });
  fx.start();
  FetchOptions o;
  o.api_base = fx.base();
  o.initial_backoff = std::chrono::milliseconds(1);
  CommitCache cache(dir.path / "flaky.jsonl");
  CHECK(fetch_commits(RepoId::parse("octo/flaky"), cache, o).empty());
  CHECK(calls == 2);
}

TEST_CASE("repository identifiers") {
  CHECK(RepoId::parse("pandas-dev/pandas").slug() == "pandas-dev-pandas");
  CHECK_THROWS_AS(RepoId::parse("pandas"), Error);
  CHECK_THROWS_AS(RepoId::parse("a/b/c"), Error);
  CHECK_THROWS_AS(RepoId::parse("../x"), Error);
}

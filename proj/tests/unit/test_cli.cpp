#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "app.hpp"
#include "config.hpp"
#include "doctest.h"
#include "fixture_server.hpp"
#include "json.hpp"
#include "osslc/error.hpp"
#include "pipeline.hpp"

using namespace osslc;
using namespace osslc::cli;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("osslc_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

std::string series(const std::string& slug) {
  return (fs::path(OSSLC_FIXTURE_DIR) / "series" / (slug + ".csv")).string();
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args, const EnvLookup& env = env_of({})) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err, env);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("config layering: flag over env over file over default") {
  const auto file = parse_config("# defaults\nmonthly_salary = 8000\ntime_fraction=0.4\n"
                                 "output_dir = from-file\n",
                                 "test.conf");
  const auto env = env_of({{"OSSLC_TIME_FRACTION", "0.3"}, {"OSSLC_OUTPUT_DIR", "from-env"},
                           {"GITHUB_TOKEN", "env-token"}});

  auto cfg = resolve_config(file, {}, env);
  CHECK(cfg.valuation.monthly_salary == 8000.0);
  CHECK(cfg.valuation.time_fraction == 0.3);
  CHECK(cfg.output_dir == "from-env");
  CHECK(cfg.token == "env-token");
  CHECK(cfg.stability_fraction == 0.75);

  cfg = resolve_config(file, {{"output_dir", "from-flag"}, {"token", "flag-token"}}, env);
  CHECK(cfg.output_dir == "from-flag");
  CHECK(cfg.token == "flag-token");

  cfg = resolve_config({}, {}, env_of({}));
  CHECK(cfg.valuation.monthly_salary == 10000.0);
  CHECK(cfg.valuation.time_fraction == 0.5);
  CHECK_FALSE(cfg.token.has_value());
}

TEST_CASE("config errors are usage errors") {
  try {
    parse_config("monthly_salary = 1\nbogus = 2\n", "x.conf");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::usage);
    CHECK(std::string(e.what()).find("x.conf:2") != std::string::npos);
  }
  CHECK_THROWS_AS(resolve_config({{"time_fraction", "1.5"}}, {}, env_of({})), Error);
  CHECK_THROWS_AS(resolve_config({{"monthly_salary", "abc"}}, {}, env_of({})), Error);
  CHECK_THROWS_AS(resolve_config({{"cutoff", "2020-13"}}, {}, env_of({})), Error);
}

TEST_CASE("exit codes follow error kinds") {
  CHECK(exit_code_for(Error(ErrorKind::usage, "u")) == kUsage);
  CHECK(exit_code_for(FitError("f")) == kData);
  CHECK(exit_code_for(DomainError("d")) == kData);
  CHECK(exit_code_for(AuthError("a")) == kNetwork);
  CHECK(exit_code_for(std::runtime_error("x")) == kData);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == kUsage);
  CHECK(run({"nonsense"}).code == kUsage);
  CHECK(run({"fit"}).code == kUsage);
  CHECK(run({"fit", series("pandas-dev-pandas"), "--salary", "-5"}).code == kUsage);
  const auto help = run({"--help"});
  CHECK(help.code == kOk);
  CHECK(help.out.find("report") != std::string::npos);
}

TEST_CASE("fit prints engagement and growth parameters") {
  TempDir dir;
  const auto r = run({"fit", series("pandas-dev-pandas"), "--output", dir.path.string()});
  CHECK(r.code == kOk);
  CHECK(r.out.find("pandas-dev-pandas: p=0.00082 q=0.02695") != std::string::npos);
  CHECK(r.out.find("gamma=") != std::string::npos);

  const auto j = json::parse(slurp(dir.path / "pandas-dev-pandas.json"));
  CHECK(j["fitted"]["bass"]["valid"] == true);
  CHECK(j["fitted"]["bass"]["p"].get<double>() == doctest::Approx(0.00082).epsilon(0.02));
  CHECK(j["forecast"].is_null());
  CHECK(j["observed"]["months"] == 199);
}

TEST_CASE("invalid engagement fit exits 2 with a report") {
  TempDir dir;
  const auto r = run({"project", series("jax-ml-jax"), "--output", dir.path.string()});
  CHECK(r.code == kData);
  const auto j = json::parse(slurp(dir.path / "jax-ml-jax.json"));
  CHECK(j["fitted"]["bass"]["valid"] == false);
  CHECK(j["forecast"].is_null());
  CHECK_FALSE(j["warnings"].empty());
}

TEST_CASE("missing or empty data is a data error") {
  TempDir dir;
  const auto missing = run({"fit", "nobody/nothing", "--cache-dir", dir.path.string()});
  CHECK(missing.code == kData);
  CHECK(missing.err.find("fetch") != std::string::npos);

  const auto empty = dir.path / "empty.csv";
  std::ofstream(empty) << "month,developers,lines_changed,cum_lines,cum_dev_months\n";
  const auto r = run({"fit", empty.string(), "--output", dir.path.string()});
  CHECK(r.code == kData);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("value without download data is supply-side only") {
  TempDir dir;
  const auto r = run({"value", series("pandas-dev-pandas"), "--output", dir.path.string()});
  CHECK(r.code == kOk);
  CHECK(r.out.find("supply-side valuation only") != std::string::npos);
  const auto j = json::parse(slurp(dir.path / "pandas-dev-pandas.json"));
  CHECK(j["valuation"]["demand"].is_null());
  CHECK(j["valuation"]["supply"]["current"]["unit"] == "USD");
  CHECK(fs::exists(dir.path / "pandas-dev-pandas_phase.csv"));
  CHECK(fs::exists(dir.path / "pandas-dev-pandas_growth.csv"));
  CHECK(fs::exists(dir.path / "pandas-dev-pandas_engagement.csv"));
}

TEST_CASE("value with download table fills the demand side") {
  TempDir dir;
  const auto r = run({"value", series("pandas-dev-pandas"), "--output", dir.path.string(),
                      "--downloads", (fs::path(OSSLC_FIXTURE_DIR) / "downloads.csv").string()});
  CHECK(r.code == kOk);
  const auto j = json::parse(slurp(dir.path / "pandas-dev-pandas.json"));
  REQUIRE_FALSE(j["valuation"]["demand"].is_null());
  CHECK(j["observed"]["downloads_window"] == 2772426479LL);
  const double ratio = j["valuation"]["demand"]["downloads_ratio"];
  CHECK(ratio == doctest::Approx(2772426479.0 / j["observed"]["lines_window"].get<double>()));
}

TEST_CASE("normalized report peaks at (1, 1)") {
  TempDir dir;
  const auto r = run({"report", "--normalized", series("dask-dask"), "--output", dir.path.string()});
  CHECK(r.code == kOk);
  const auto rows = lines_of(slurp(dir.path / "dask-dask_normalized.csv"));
  REQUIRE(rows.size() > 3);
  CHECK(rows.front() == "t_prime,f_prime");
  double best_t = 0, best_f = -1;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto comma = rows[i].find(',');
    const double t = std::stod(rows[i].substr(0, comma));
    const double f = std::stod(rows[i].substr(comma + 1));
    CHECK(f <= 1.0 + 1e-9);
    if (f > best_f) best_f = f, best_t = t;
  }
  CHECK(best_t == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(best_f == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("batch report over the fixture corpus") {
  TempDir dir;
  std::vector<std::string> args{"report", "--output", dir.path.string(), "--downloads",
                                (fs::path(OSSLC_FIXTURE_DIR) / "downloads.csv").string()};
  std::vector<std::string> slugs;
  for (const auto& e : fs::directory_iterator(fs::path(OSSLC_FIXTURE_DIR) / "series")) {
    slugs.push_back(e.path().stem().string());
  }
  std::sort(slugs.begin(), slugs.end());
  for (const auto& s : slugs) args.push_back(series(s));

  const auto r = run(args);
  // jax has an invalid engagement fit, so the batch reports a data warning.
  CHECK(r.code == kData);

  const auto table = lines_of(slurp(dir.path / "engagement_table.csv"));
  REQUIRE(table.size() == slugs.size() + 1);
  for (std::size_t i = 0; i < slugs.size(); ++i) {
    CHECK(table[i + 1].rfind(slugs[i] + ",", 0) == 0);
  }
  CHECK(lines_of(slurp(dir.path / "valuation_table.csv")).size() == slugs.size() + 1);

  const auto downloads = lines_of(slurp(dir.path / "downloads_table.csv"));
  REQUIRE(downloads.size() == slugs.size() + 1);
  bool deepspeed_seen = false;
  for (const auto& row : downloads) {
    if (row.rfind("microsoft-DeepSpeed,", 0) == 0) {
      deepspeed_seen = true;
      CHECK(row.find("no download data") != std::string::npos);
    }
  }
  CHECK(deepspeed_seen);

  // Output order follows input order regardless of worker scheduling.
  std::size_t last = 0;
  for (const auto& s : slugs) {
    const auto at = r.out.find(s + ": p=");
    CHECK(at != std::string::npos);
    CHECK(at >= last);
    last = at;
  }
}

TEST_CASE("batch file and determinism") {
  TempDir a, b;
  const auto list = a.path / "projects.txt";
  std::ofstream(list) << "# two projects\n" << series("dask-dask") << "\n\n"
                      << series("langchain-ai-langchain") << "\n";
  const auto first = run({"report", "--batch", list.string(), "--output", a.path.string()});
  const auto second = run({"report", "--batch", list.string(), "--output", b.path.string()});
  CHECK(first.code == kOk);
  CHECK(first.out == second.out);
  for (const auto* name : {"dask-dask.json", "langchain-ai-langchain.json", "engagement_table.csv",
                           "valuation_table.csv", "langchain-ai-langchain_phase.csv"}) {
    CHECK(slurp(a.path / name) == slurp(b.path / name));
  }
}

TEST_CASE("stability subcommand reports divergence") {
  TempDir dir;
  const auto r = run({"stability", series("pandas-dev-pandas"), "--stability-fraction", "0.75",
                      "--output", dir.path.string()});
  CHECK(r.code == kOk);
  const auto j = json::parse(slurp(dir.path / "pandas-dev-pandas.json"));
  CHECK(j["stability"]["truncated_months"] == 149);
  CHECK(j["stability"]["divergence"]["growth"].get<double>() >= 0.0);
  CHECK(run({"stability", series("pandas-dev-pandas"), "--stability-fraction", "0"}).code == kUsage);
}

TEST_CASE("cutoff trims a series file") {
  TempDir dir;
  const auto r = run({"fit", series("pandas-dev-pandas"), "--cutoff", "2020-12", "--output",
                      dir.path.string()});
  CHECK(r.code == kOk);
  const auto j = json::parse(slurp(dir.path / "pandas-dev-pandas.json"));
  CHECK(j["observed"]["end"] == "2020-12");
}

namespace {

// Serves three commits for octo/demo; the token gate answers 401 when set.
struct FakeGitHub {
  FixtureServer fx;
  std::atomic<int> detail_requests{0};

  explicit FakeGitHub(bool require_token = false) {
    fx.server.set_pre_routing_handler([require_token](const httplib::Request& req,
                                                      httplib::Response& res) {
      if (require_token && req.get_header_value("Authorization") != "Bearer good") {
        res.status = 401;
        res.set_content(R"({"message":"Bad credentials"})", "application/json");
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });
    fx.server.Get("/repos/octo/demo/commits", [](const httplib::Request&, httplib::Response& res) {
      json arr = json::array();
      for (int i = 0; i < 3; ++i) arr.push_back({{"sha", "c" + std::to_string(i)}});
      res.set_content(arr.dump(), "application/json");
    });
    fx.server.Get(R"(/repos/octo/demo/commits/(c\d))", [this](const httplib::Request& req,
                                                               httplib::Response& res) {
      ++detail_requests;
      const std::string sha = req.matches[1];
      const int i = sha[1] - '0';
      json j = {{"sha", sha},
                {"commit",
                 {{"author",
                   {{"name", "Dev " + std::to_string(i)},
                    {"email", "dev" + std::to_string(i) + "@example.com"},
                    {"date", "2022-0" + std::to_string(1 + i) + "-15T12:00:00Z"}}}}},
                {"stats", {{"additions", 100}, {"deletions", 10}}}};
      res.set_content(j.dump(), "application/json");
    });
    fx.start();
  }
};

}  // namespace

TEST_CASE("fetch fills the cache and is idempotent") {
  FakeGitHub gh;
  TempDir dir;
  const std::vector<std::string> args{"fetch", "octo/demo", "--api-base", gh.fx.base(),
                                      "--cache-dir", dir.path.string()};
  const auto first = run(args);
  CHECK(first.code == kOk);
  CHECK(first.out.find("3 commits (3 new)") != std::string::npos);
  CHECK(gh.detail_requests == 3);
  CHECK(fs::exists(dir.path / "octo-demo.jsonl"));

  const auto csv = lines_of(slurp(dir.path / "octo-demo.csv"));
  REQUIRE(csv.size() == 4);
  CHECK(csv[1].rfind("2022-01,1,110,110,1", 0) == 0);

  const auto second = run(args);
  CHECK(second.code == kOk);
  CHECK(second.out.find("3 commits (0 new)") != std::string::npos);
  CHECK(gh.detail_requests == 3);

  // Cached slugs resolve without a path; three months are too short to fit.
  const auto fit = run({"fit", "octo/demo", "--cache-dir", dir.path.string(), "--output",
                        (dir.path / "out").string()});
  CHECK(fit.code == kData);
}

TEST_CASE("fetch auth failure exits 3 and names the token variable") {
  FakeGitHub gh(true);
  TempDir dir;
  const std::vector<std::string> args{"fetch", "octo/demo", "--api-base", gh.fx.base(),
                                      "--cache-dir", dir.path.string()};
  const auto r = run(args, env_of({{"GITHUB_TOKEN", "bad"}}));
  CHECK(r.code == kNetwork);
  CHECK(r.err.find("GITHUB_TOKEN") != std::string::npos);

  CHECK(run(args, env_of({{"GITHUB_TOKEN", "good"}})).code == kOk);
  CHECK(run({"fetch", "not-a-repo", "--cache-dir", dir.path.string()}).code == kUsage);
}

#include "app.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "osslc/error.hpp"
#include "osslc/github.hpp"
#include "pipeline.hpp"

namespace osslc::cli {
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::usage, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::data, "cannot write " + path.string());
  body(out);
  if (!out) throw Error(ErrorKind::data, "failed writing " + path.string());
}

struct ProjectResult {
  std::optional<Analysis> analysis;
  std::string name;
  std::string log;  // lines printed for this project
  int code = kOk;
  std::string error;
};

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

enum class Command { fit, project, value, stability, report };

Stages stages_for(Command c) {
  switch (c) {
    case Command::fit: return {};
    case Command::project: return {true, false, false};
    case Command::value: return {true, true, false};
    case Command::stability: return {false, false, true};
    case Command::report: return {true, true, true};
  }
  return {};
}

std::string summary(const Analysis& a, Command c) {
  const auto& r = a.report;
  std::ostringstream os;
  os << r.project << ": p=" << fixed(r.bass.p, 5) << " q=" << fixed(r.bass.q, 5)
     << " m=" << fixed(r.bass.m, 2) << " R2=" << fixed(r.bass.r_squared, 4)
     << (r.bass.valid ? "" : " (invalid)") << '\n';
  if (r.growth) {
    os << "  growth: gamma=" << sci(r.growth->gamma) << " lambda=" << fixed(r.growth->lambda, 4)
       << " phi=" << fixed(r.growth->phi, 4) << " mse=" << sci(r.growth_objective.value_or(0)) << '\n';
  }
  if (r.forecast && c != Command::fit && c != Command::stability) {
    const auto& f = *r.forecast;
    os << "  maturity: t=" << f.t_current << " T=" << fixed(f.T_maturation, 2)
       << " remaining=" << fixed(f.remaining_years, 2) << "y lifetime growth="
       << fixed(f.lifetime_growth / 1e6, 2) << "MM lines (current "
       << fixed(f.current_growth / 1e6, 2) << "MM)\n";
  }
  if (r.valuation) {
    const auto& s = r.valuation->supply;
    os << "  supply: " << fixed(s.innov_per_devmonth, 2) << " lines/dev-month, current "
       << fixed(s.current.amount / 1e6, 2) << " MM " << s.current.unit << ", to maturity "
       << fixed(s.lifetime.amount / 1e6, 2) << " MM " << s.lifetime.unit << '\n';
    if (const auto& d = r.valuation->demand) {
      os << "  demand: ratio=" << (d->downloads_ratio ? fixed(*d->downloads_ratio, 2) : "n/a")
         << " lifetime downloads="
         << (d->lifetime_downloads ? fixed(*d->lifetime_downloads, 0) : "n/a")
         << " remaining downloads=" << d->remaining_downloads << '\n';
    }
  }
  if (r.stability) {
    os << "  stability: fraction=" << r.stability->fraction << " (" << r.stability->truncated_months
       << " months)";
    if (r.stability->divergence) {
      os << " growth divergence=" << fixed(r.stability->divergence->growth, 4)
         << " engagement divergence=" << fixed(r.stability->divergence->engagement, 4);
    } else {
      os << " divergence undefined";
    }
    os << '\n';
  }
  for (const auto& w : r.warnings) os << "  warning: " << w << '\n';
  return os.str();
}

// Returns a warning when an optional artifact could not be produced.
std::optional<std::string> write_artifacts(const Analysis& a, Command c, const RunConfig& cfg,
                                           bool normalized) {
  const auto& r = a.report;
  const auto base = cfg.output_dir / r.project;
  write_file(base.string() + ".json", [&](std::ostream& o) { o << to_json(r) << '\n'; });
  if (c == Command::fit || c == Command::stability) return std::nullopt;

  if (r.forecast) {
    write_file(base.string() + "_phase.csv", [&](std::ostream& o) { write_phase_csv(o, *r.forecast); });
  }
  if (a.growth_path) {
    write_file(base.string() + "_growth.csv",
               [&](std::ostream& o) { write_growth_path_csv(o, *a.growth_path); });
  }
  const double t_end = r.forecast ? r.forecast->T_maturation : static_cast<double>(a.series.size());
  write_file(base.string() + "_engagement.csv",
             [&](std::ostream& o) { write_engagement_csv(o, a.series, r.bass, t_end); });

  if (!normalized) return std::nullopt;
  if (!r.bass.valid || r.bass.q <= r.bass.p) {
    return "normalized curve skipped: requires a valid fit with q > p";
  }
  {
    std::vector<double> grid;
    const double hi = std::max(t_end, 2 * peak(r.bass).t0);
    for (double t = 0.0; t <= hi + 1e-9; t += 0.5) grid.push_back(t);
    grid.push_back(peak(r.bass).t0);
    std::sort(grid.begin(), grid.end());
    write_file(base.string() + "_normalized.csv",
               [&](std::ostream& o) { write_normalized_csv(o, normalize(r.bass, grid)); });
  }
  return std::nullopt;
}

std::vector<std::string> read_batch_file(const fs::path& path) {
  std::vector<std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

int run_analysis(Command c, const RunConfig& cfg, bool normalized, std::ostream& out,
                 std::ostream& err) {
  if (cfg.projects.empty()) throw Error(ErrorKind::usage, "no projects given");

  std::optional<DownloadTable> downloads;
  const auto stages = stages_for(c);
  if (stages.value && cfg.downloads && cfg.downloads->rfind("http", 0) != 0) {
    downloads = load_downloads(*cfg.downloads);
  }

  auto run_one = [&](const std::string& arg) {
    ProjectResult res;
    res.name = arg;
    try {
      const auto input = load_project(arg, cfg);
      res.name = input.name;
      auto a = analyze(input, cfg, stages, downloads);
      if (auto w = write_artifacts(a, c, cfg, normalized && c == Command::report)) {
        a.report.warnings.push_back(*w);
        a.code = std::max(a.code, static_cast<int>(kData));
        // Keep the JSON report in step with the printed warnings.
        write_file(cfg.output_dir / (a.report.project + ".json"),
                   [&](std::ostream& o) { o << to_json(a.report) << '\n'; });
      }
      res.log = summary(a, c);
      res.code = a.code;
      res.analysis = std::move(a);
    } catch (const std::exception& e) {
      res.code = exit_code_for(e);
      res.error = e.what();
    }
    return res;
  };

  // Fitting is CPU bound: one worker per core, results reported in input order.
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, cfg.projects.size());
  std::vector<ProjectResult> results(cfg.projects.size());
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < results.size(); i = next++) results[i] = run_one(cfg.projects[i]);
      });
    }
  }

  int code = kOk;
  std::vector<BatchRow> rows;
  for (const auto& res : results) {
    code = std::max(code, res.code);
    if (!res.error.empty()) {
      err << "error: " << res.name << ": " << res.error << '\n';
      BatchRow row;
      row.report.project = res.name;
      row.status = "error: " + res.error;
      rows.push_back(std::move(row));
      continue;
    }
    out << res.log;
    BatchRow row{res.analysis->report, res.code == kOk ? "ok" : "warning", ""};
    if (!row.report.warnings.empty() && res.code != kOk) row.status = "warning: " + row.report.warnings.front();
    rows.push_back(std::move(row));
  }

  if (c == Command::report || cfg.projects.size() > 1) {
    write_file(cfg.output_dir / "engagement_table.csv", [&](std::ostream& o) { write_engagement_table(o, rows); });
    if (stages.value) {
      write_file(cfg.output_dir / "valuation_table.csv", [&](std::ostream& o) { write_valuation_table(o, rows); });
      write_file(cfg.output_dir / "downloads_table.csv", [&](std::ostream& o) { write_downloads_table(o, rows); });
    }
  }
  return code;
}

int run_fetch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.projects.empty()) throw Error(ErrorKind::usage, "no repositories given");
  int code = kOk;
  for (const auto& arg : cfg.projects) {
    try {
      const auto repo = RepoId::parse(arg);
      fs::create_directories(cfg.cache_dir);
      CommitCache cache(cfg.cache_dir / (repo.slug() + ".jsonl"));
      const auto before = cache.size();
      FetchOptions opts;
      opts.api_base = cfg.api_base;
      opts.token = cfg.token;
      opts.concurrency = cfg.fetch_concurrency;
      const auto commits = fetch_commits(repo, cache, opts);

      AggregateOptions agg;
      agg.exclude_bots = !cfg.include_bots;
      agg.cutoff = cfg.cutoff;
      const auto series = aggregate_monthly(commits, agg, repo.slug());
      const auto csv = cfg.cache_dir / (repo.slug() + ".csv");
      write_file(csv, [&](std::ostream& o) { write_series_csv(o, series); });
      out << repo.str() << ": " << commits.size() << " commits (" << commits.size() - before
          << " new), " << series.size() << " months -> " << cache.path().string() << '\n';
    } catch (const std::exception& e) {
      err << "error: " << arg << ": " << e.what() << '\n';
      code = std::max(code, exit_code_for(e));
    }
  }
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const EnvLookup& env) {
  CLI::App app{"Open-source project life-cycle modelling: engagement, growth, maturity and valuation",
               "oss-lifecycle"};
  app.require_subcommand(1);
  app.fallthrough();

  std::map<std::string, std::string> flags;
  std::string config_path;
  auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
    app.add_option_function<std::string>(name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
  };
  app.add_option("--config", config_path, "Config file with key = value lines");
  flag("--cache-dir", "cache_dir", "Directory for commit caches and monthly series");
  flag("--output", "output_dir", "Directory for reports and CSV companions");
  flag("--cutoff", "cutoff", "Last month to include (YYYY-MM)");
  flag("--token", "token", std::string("GitHub token (default: $") + kTokenEnvVar + ")");
  flag("--concurrency", "fetch_concurrency", "Parallel commit-detail requests");
  flag("--downloads", "downloads", "CSV project,package,downloads_6mo or a statistics API base URL");
  flag("--salary", "monthly_salary", "Monthly developer cost");
  flag("--time-fraction", "time_fraction", "Share of working time spent on the project");
  flag("--threshold", "maturation_threshold", "Developers per month that mark maturity");
  flag("--stability-fraction", "stability_fraction", "Share of months kept by the stability experiment");
  flag("--api-base", "api_base", "GitHub API base URL");
  app.add_flag_callback("--include-bots", [&flags] { flags["include_bots"] = "true"; },
                        "Count automation accounts as developers");

  std::vector<std::string> projects;
  std::string batch_file;
  bool normalized = false;
  std::optional<Command> command;
  bool fetch = false;

  auto add_projects = [&](CLI::App* sub, const std::string& what) {
    sub->add_option("projects", projects, what);
    sub->add_option("--batch", batch_file, "File listing one project per line");
  };
  auto* fetch_cmd = app.add_subcommand("fetch", "Download commit history into the cache");
  add_projects(fetch_cmd, "Repositories as owner/name");
  fetch_cmd->callback([&] { fetch = true; });

  const std::pair<const char*, Command> analysis_cmds[] = {
      {"fit", Command::fit}, {"project", Command::project}, {"value", Command::value},
      {"stability", Command::stability}, {"report", Command::report}};
  const char* descriptions[] = {
      "Fit engagement and growth models", "Project growth to maturity",
      "Supply- and demand-side valuation", "Refit on a truncated history and compare",
      "Full pipeline with batch tables and plot data"};
  for (std::size_t i = 0; i < std::size(analysis_cmds); ++i) {
    auto* sub = app.add_subcommand(analysis_cmds[i].first, descriptions[i]);
    add_projects(sub, "Repositories (owner/name), cached slugs, or series/commit files");
    const auto c = analysis_cmds[i].second;
    sub->callback([&command, c] { command = c; });
    if (c == Command::report) sub->add_flag("--normalized", normalized, "Write normalized-curve CSVs");
  }

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kUsage;
  }

  try {
    if (config_path.empty()) {
      if (auto p = env("OSSLC_CONFIG")) config_path = *p;
    }
    std::map<std::string, std::string> file;
    if (!config_path.empty()) file = parse_config(read_file(config_path), config_path);
    auto cfg = resolve_config(file, flags, env);
    if (!batch_file.empty()) {
      const auto listed = read_batch_file(batch_file);
      projects.insert(projects.end(), listed.begin(), listed.end());
    }
    if (!projects.empty()) cfg.projects = projects;

    if (fetch) return run_fetch(cfg, out, err);
    return run_analysis(*command, cfg, normalized, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace osslc::cli

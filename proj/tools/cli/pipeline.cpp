#include "pipeline.hpp"

#include <cmath>
#include <sstream>

#include "osslc/error.hpp"
#include "osslc/github.hpp"

namespace osslc::cli {
namespace fs = std::filesystem;

namespace {

MonthlySeries apply_cutoff(MonthlySeries s, const std::optional<YearMonth>& cutoff) {
  if (!cutoff || s.empty()) return s;
  if (*cutoff < s.months.front()) {
    throw Error(ErrorKind::data, "cutoff " + cutoff->str() + " precedes the first month " +
                                     s.months.front().str());
  }
  const auto n = static_cast<std::size_t>(*cutoff - s.months.front() + 1);
  if (n <= s.size()) return s.head(n);
  auto L = s.developers;
  auto dA = s.lines_changed;
  L.resize(n, 0);
  dA.resize(n, 0);
  return MonthlySeries::from_counts(s.project, s.months.front(), std::move(L), std::move(dA));
}

MonthlySeries from_commit_log(const fs::path& path, const RunConfig& cfg, std::string project) {
  const auto commits = load_commit_log(path);
  AggregateOptions opts;
  opts.exclude_bots = !cfg.include_bots;
  opts.cutoff = cfg.cutoff;
  return aggregate_monthly(commits, opts, std::move(project));
}

std::string describe(const BassParams& b) {
  std::ostringstream os;
  os << "p=" << b.p << ", q=" << b.q << ", m=" << b.m;
  return os.str();
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::usage: return kUsage;
      case ErrorKind::data: return kData;
      case ErrorKind::network: return kNetwork;
    }
  }
  return kData;
}

ProjectInput load_project(const std::string& arg, const RunConfig& cfg) {
  ProjectInput in;
  in.label = arg;
  const fs::path direct(arg);
  if (fs::is_regular_file(direct)) {
    in.name = direct.stem().string();
    if (direct.extension() == ".jsonl" || direct.extension() == ".json") {
      in.series = from_commit_log(direct, cfg, in.name);
    } else {
      in.series = apply_cutoff(read_series_csv(direct), cfg.cutoff);
    }
    return in;
  }

  if (arg.find('/') != std::string::npos) {
    const auto repo = RepoId::parse(arg);
    in.name = repo.slug();
    in.package = repo.name;
  } else {
    in.name = arg;
  }
  const auto log = cfg.cache_dir / (in.name + ".jsonl");
  const auto csv = cfg.cache_dir / (in.name + ".csv");
  if (fs::is_regular_file(log)) {
    in.series = from_commit_log(log, cfg, in.name);
  } else if (fs::is_regular_file(csv)) {
    in.series = apply_cutoff(read_series_csv(csv), cfg.cutoff);
    in.series.project = in.name;
  } else {
    throw Error(ErrorKind::data, "no cached data for " + arg + " in " + cfg.cache_dir.string() +
                                     "; run 'fetch " + arg + "' first");
  }
  return in;
}

Analysis analyze(const ProjectInput& input, const RunConfig& cfg, const Stages& stages,
                 const std::optional<DownloadTable>& downloads) {
  Analysis a;
  a.series = input.series;
  const auto& s = a.series;
  auto& r = a.report;
  r.project = input.name;
  if (s.empty()) throw Error(ErrorKind::data, input.label + ": series is empty");
  r.start = s.months.front();
  r.end = s.months.back();
  r.observed_months = static_cast<long>(s.size());
  r.cum_dev_months = s.cum_dev_months.back();
  r.cum_lines = s.cum_lines.back();

  auto warn = [&](const std::string& msg) {
    r.warnings.push_back(msg);
    a.code = std::max<int>(a.code, kData);
  };

  r.bass = fit_bass(s);
  if (!r.bass.valid) {
    warn("engagement fit is invalid (" + describe(r.bass) +
         "); growth is calibrated against observed developers and no maturation is projected");
  }

  CalibrationOptions calibration;
  if (s.size() >= kMinGrowthMonths) {
    const auto cal = calibrate_growth(s, r.bass, calibration);
    r.growth = cal.params;
    r.growth_objective = cal.objective;
  } else {
    warn("growth calibration skipped: " + std::to_string(s.size()) + " months, need " +
         std::to_string(kMinGrowthMonths));
  }

  const bool want_forecast = stages.project || stages.value;
  if (want_forecast && r.bass.valid && r.growth) {
    ProjectionOptions po;
    po.threshold = cfg.valuation.maturation_threshold;
    po.integration = calibration.integration;
    r.forecast = project_lifecycle(r.bass, *r.growth, s, po);
    a.growth_path = fitted_path(s, r.bass, *r.growth,
                                std::max(r.forecast->T_maturation, static_cast<double>(s.size())));
    if (r.forecast->already_mature) {
      r.warnings.push_back("engagement never reaches the maturation threshold; treated as mature");
    }
  } else if (want_forecast) {
    warn("no lifecycle projection without a valid engagement fit and growth calibration");
  }

  if (stages.value && r.forecast) {
    ValuationReport v;
    v.supply = supply_side(s, *r.forecast, cfg.valuation);
    const auto window = cfg.valuation.demand_window_months;
    r.lines_window = trailing_lines_changed(s, window);
    std::optional<std::int64_t> count;
    if (downloads) {
      if (auto rec = downloads->find(input.name)) count = rec->downloads;
    } else if (cfg.downloads && cfg.downloads->rfind("http", 0) == 0) {
      count = fetch_package_downloads(*cfg.downloads, input.package.value_or(input.name),
                                      window * 365 / 12);
    }
    if (count) {
      r.downloads_window = *count;
      v.demand = demand_side(*count, *r.lines_window, *r.forecast, cfg.valuation);
      if (!v.demand->downloads_ratio) {
        r.warnings.push_back("no lines changed in the download window; ratio undefined");
      }
    } else {
      r.warnings.push_back("no download data; supply-side valuation only");
    }
    r.valuation = v;
  }

  if (stages.stability) {
    StabilityOptions so;
    so.fraction = cfg.stability_fraction;
    so.threshold = cfg.valuation.maturation_threshold;
    so.calibration = calibration;
    r.stability = stability_experiment(s, so);
    if (!r.stability->divergence) {
      warn("stability divergence undefined: a fit on the truncated or full series is invalid");
    }
  }
  return a;
}

}  // namespace osslc::cli

#pragma once

#include <optional>
#include <string>

#include "config.hpp"
#include "osslc/report.hpp"

namespace osslc::cli {

// Exit code classes; a run reports the most severe class seen.
enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNetwork = 3 };

int exit_code_for(const std::exception& e);

struct ProjectInput {
  std::string label;  // as given on the command line
  std::string name;   // report and file name (owner-name slug or file stem)
  std::optional<std::string> package;  // repository name, used for download lookups
  MonthlySeries series;
};

// Resolves a project argument: an existing series CSV or commit cache file,
// or an owner/name (or slug) looked up in the cache directory. The cutoff
// trims or zero-extends the series.
ProjectInput load_project(const std::string& arg, const RunConfig& cfg);

struct Stages {
  bool project = false;
  bool value = false;
  bool stability = false;
};

struct Analysis {
  LifecycleReport report;
  MonthlySeries series;
  std::optional<GrowthPath> growth_path;  // fitted path through maturity
  int code = kOk;
};

// Runs the per-project pipeline. Degenerate fits downgrade to warnings on the
// report and a data exit code; they do not throw.
Analysis analyze(const ProjectInput& input, const RunConfig& cfg, const Stages& stages,
                 const std::optional<DownloadTable>& downloads);

}  // namespace osslc::cli

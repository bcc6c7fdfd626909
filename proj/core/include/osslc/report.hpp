#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "osslc/engagement.hpp"
#include "osslc/forecast.hpp"
#include "osslc/growth.hpp"
#include "osslc/ingest.hpp"
#include "osslc/valuation.hpp"

namespace osslc {

struct LifecycleReport {
  std::string project;
  std::optional<YearMonth> start;
  std::optional<YearMonth> end;
  long observed_months = 0;
  std::int64_t cum_dev_months = 0;
  std::int64_t cum_lines = 0;
  std::optional<std::int64_t> downloads_window;
  std::optional<std::int64_t> lines_window;
  BassParams bass;
  std::optional<GrowthParams> growth;
  std::optional<double> growth_objective;
  std::optional<LifecycleForecast> forecast;
  std::optional<StabilityResult> stability;
  std::optional<ValuationReport> valuation;
  std::vector<std::string> warnings;
};

// {project, fitted: {bass, growth}, forecast: {...}, stability, valuation}
std::string to_json(const LifecycleReport& report, int indent = 2);
// Parses the JSON written by to_json (phase data is not stored in JSON).
LifecycleReport report_from_json(const std::string& text);

// Plot companions.
void write_growth_path_csv(std::ostream& out, const GrowthPath& path);
void write_normalized_csv(std::ostream& out, const NormalizedCurve& curve);
void write_phase_csv(std::ostream& out, const LifecycleForecast& forecast);
// month,observed,fitted_monthly,fitted_rate over observed months and through
// `t_end` for the projection.
void write_engagement_csv(std::ostream& out, const MonthlySeries& series,
                          const BassParams& bass, double t_end);

// Batch tables; one row per report, rows carry a status column.
struct BatchRow {
  LifecycleReport report;
  std::string status = "ok";
  std::string message;
};

void write_engagement_table(std::ostream& out, const std::vector<BatchRow>& rows);
void write_valuation_table(std::ostream& out, const std::vector<BatchRow>& rows);
void write_downloads_table(std::ostream& out, const std::vector<BatchRow>& rows);

}  // namespace osslc

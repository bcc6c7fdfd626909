#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "osslc/forecast.hpp"
#include "osslc/ingest.hpp"

namespace osslc {

struct Currency {
  double amount = 0.0;
  std::string unit = "USD";
};

struct ValuationConfig {
  double monthly_salary = 10000.0;
  double time_fraction = 0.5;
  double maturation_threshold = kDefaultMaturationThreshold;
  std::string currency = "USD";
  // Trailing window for the downloads-to-lines ratio.
  int demand_window_months = 6;
  // Pass-through value per download; no default is assumed.
  std::optional<double> value_per_download;

  void validate() const;
};

struct SupplySide {
  double innov_per_devmonth = 0.0;  // lines per developer-month
  Currency current;
  Currency lifetime;
};

// Cost to build, from cumulative lines, cumulative developer-months and the
// projected lifetime lines. The lines-per-developer-month ratio is frozen at
// the current time.
SupplySide supply_side(double current_growth, double cum_dev_months,
                       double lifetime_growth, const ValuationConfig& cfg = {});
SupplySide supply_side(const MonthlySeries& series, const LifecycleForecast& forecast,
                       const ValuationConfig& cfg = {});

struct DemandSide {
  std::optional<double> downloads_ratio;  // absent when no lines in window
  std::optional<double> lifetime_downloads;
  std::int64_t remaining_downloads = 0;
  std::optional<Currency> lifetime_value;
  std::optional<Currency> remaining_value;
};

DemandSide demand_side(std::int64_t downloads_window, std::int64_t lines_changed_window,
                       const LifecycleForecast& forecast, const ValuationConfig& cfg = {});

// Lines changed over the trailing `months` of the series.
std::int64_t trailing_lines_changed(const MonthlySeries& series, int months);

struct DownloadRecord {
  std::string project;
  std::string package;
  std::int64_t downloads = 0;
};

// Per-project download counts. Projects absent from the table have no
// demand-side valuation.
class DownloadTable {
 public:
  void add(DownloadRecord record);
  std::optional<DownloadRecord> find(const std::string& project) const;
  std::size_t size() const noexcept { return records_.size(); }

 private:
  std::map<std::string, DownloadRecord> records_;
};

// CSV with header project,package,downloads_6mo.
DownloadTable load_downloads(const std::filesystem::path& path);
DownloadTable parse_downloads(std::istream& in, const std::string& source_name);

// Sums the last `days` daily totals from a pypistats-style endpoint
// (GET {base}/api/packages/{package}/overall?mirrors=false).
std::int64_t fetch_package_downloads(const std::string& api_base,
                                     const std::string& package, int days = 182);

struct ValuationReport {
  SupplySide supply;
  std::optional<DemandSide> demand;
};

}  // namespace osslc

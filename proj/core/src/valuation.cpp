#include "osslc/valuation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <vector>

#include "http.hpp"
#include "json.hpp"
#include "osslc/error.hpp"

namespace osslc {

void ValuationConfig::validate() const {
  if (!(monthly_salary > 0.0)) throw DomainError("monthly salary must be positive");
  if (!(time_fraction > 0.0 && time_fraction <= 1.0)) {
    throw DomainError("time fraction must lie in (0, 1]");
  }
  if (!(maturation_threshold > 0.0)) throw DomainError("maturation threshold must be positive");
  if (demand_window_months < 1) throw DomainError("demand window must be at least one month");
  if (value_per_download && !(*value_per_download >= 0.0)) {
    throw DomainError("value per download must be non-negative");
  }
}

SupplySide supply_side(double current_growth, double cum_dev_months, double lifetime_growth,
                       const ValuationConfig& cfg) {
  cfg.validate();
  if (!(cum_dev_months > 0.0)) {
    throw DomainError("supply-side valuation needs positive cumulative developer-months");
  }
  if (current_growth < 0.0 || lifetime_growth < 0.0) {
    throw DomainError("growth must be non-negative");
  }
  const double monthly_cost = cfg.time_fraction * cfg.monthly_salary;
  SupplySide out;
  out.innov_per_devmonth = current_growth / cum_dev_months;
  out.current.unit = out.lifetime.unit = cfg.currency;
  if (out.innov_per_devmonth > 0.0) {
    out.current.amount = current_growth / out.innov_per_devmonth * monthly_cost;
    out.lifetime.amount = lifetime_growth / out.innov_per_devmonth * monthly_cost;
  } else {
    // No lines yet: the developer-month form still holds, with nothing to extrapolate.
    out.current.amount = cum_dev_months * monthly_cost;
    out.lifetime.amount = out.current.amount;
  }
  return out;
}

SupplySide supply_side(const MonthlySeries& series, const LifecycleForecast& forecast,
                       const ValuationConfig& cfg) {
  if (series.empty()) throw DomainError("supply-side valuation needs a non-empty series");
  return supply_side(static_cast<double>(series.cum_lines.back()),
                     static_cast<double>(series.cum_dev_months.back()),
                     forecast.lifetime_growth, cfg);
}

DemandSide demand_side(std::int64_t downloads_window, std::int64_t lines_changed_window,
                       const LifecycleForecast& forecast, const ValuationConfig& cfg) {
  cfg.validate();
  if (downloads_window < 0) throw DomainError("download count must be non-negative");
  if (lines_changed_window < 0) throw DomainError("lines changed must be non-negative");

  DemandSide out;
  if (lines_changed_window > 0) {
    out.downloads_ratio =
        static_cast<double>(downloads_window) / static_cast<double>(lines_changed_window);
    out.lifetime_downloads = *out.downloads_ratio * forecast.lifetime_growth;
  }
  const long double remaining_months =
      std::max(0.0L, static_cast<long double>(forecast.T_maturation) -
                         static_cast<long double>(forecast.t_current));
  out.remaining_downloads = std::llround(static_cast<long double>(downloads_window) *
                                         remaining_months /
                                         static_cast<long double>(cfg.demand_window_months));
  if (cfg.value_per_download) {
    if (out.lifetime_downloads) {
      out.lifetime_value = Currency{*out.lifetime_downloads * *cfg.value_per_download, cfg.currency};
    }
    out.remaining_value = Currency{
        static_cast<double>(out.remaining_downloads) * *cfg.value_per_download, cfg.currency};
  }
  return out;
}

std::int64_t trailing_lines_changed(const MonthlySeries& series, int months) {
  std::int64_t sum = 0;
  const auto n = std::min<std::size_t>(series.size(), static_cast<std::size_t>(std::max(months, 0)));
  for (std::size_t i = series.size() - n; i < series.size(); ++i) sum += series.lines_changed[i];
  return sum;
}

void DownloadTable::add(DownloadRecord record) {
  auto key = record.project;
  records_.insert_or_assign(std::move(key), std::move(record));
}

std::optional<DownloadRecord> DownloadTable::find(const std::string& project) const {
  auto it = records_.find(project);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

DownloadTable parse_downloads(std::istream& in, const std::string& source_name) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      cells.push_back(cell);
    }
    return cells;
  };

  DownloadTable table;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) return table;
  ++lineno;
  if (split(line) != std::vector<std::string>{"project", "package", "downloads_6mo"}) {
    throw ParseError(source_name, lineno, "expected header project,package,downloads_6mo");
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \r\t") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != 3 || cells[0].empty()) {
      throw ParseError(source_name, lineno, "expected project,package,downloads_6mo");
    }
    std::int64_t v = 0;
    const auto& text = cells[2];
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ParseError(source_name, lineno, "downloads_6mo is not an integer: '" + text + "'");
    }
    if (v < 0) throw ParseError(source_name, lineno, "downloads_6mo must be non-negative");
    table.add({cells[0], cells[1], v});
  }
  return table;
}

DownloadTable load_downloads(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open downloads file");
  return parse_downloads(in, path.string());
}

std::int64_t fetch_package_downloads(const std::string& api_base, const std::string& package,
                                     int days) {
  const auto r = detail::http_get(api_base, "/api/packages/" + package + "/overall?mirrors=false",
                                  {{"User-Agent", "osslc"}}, std::chrono::seconds(30));
  if (r.status == 404) throw NotFoundError("package " + package + " not found in download index");
  if (r.status != 200) {
    throw NetworkError("download statistics for " + package + " returned HTTP " +
                       std::to_string(r.status));
  }
  std::vector<std::pair<std::string, std::int64_t>> daily;
  try {
    const auto j = nlohmann::json::parse(r.body);
    for (const auto& row : j.at("data")) {
      if (row.value("category", "without_mirrors") != "without_mirrors") continue;
      const auto n = row.at("downloads").get<std::int64_t>();
      if (n < 0) throw NetworkError("negative download count for " + package);
      daily.emplace_back(row.at("date").get<std::string>(), n);
    }
  } catch (const nlohmann::json::exception& e) {
    throw NetworkError("malformed download statistics for " + package + ": " + e.what());
  }
  std::sort(daily.begin(), daily.end());
  std::int64_t sum = 0;
  const auto n = std::min<std::size_t>(daily.size(), static_cast<std::size_t>(std::max(days, 0)));
  for (std::size_t i = daily.size() - n; i < daily.size(); ++i) sum += daily[i].second;
  return sum;
}

}  // namespace osslc

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "osslc/error.hpp"
#include "osslc/report.hpp"

using namespace osslc;
using nlohmann::json;

namespace {

LifecycleReport sample() {
  LifecycleReport r;
  r.project = "pandas-dev-pandas";
  r.start = YearMonth(2009, 7);
  r.end = YearMonth(2026, 1);
  r.observed_months = 199;
  r.cum_dev_months = 8214;
  r.cum_lines = 4960000;
  r.bass = BassParams::from_pqm(0.00084, 0.02686, 9448.6151);
  r.bass.r_squared = 0.98;
  r.bass.valid = true;
  GrowthParams g;
  g.gamma = 601657.05;
  g.lambda = 1.301;
  g.phi = -0.552;
  g.A0 = 3100;
  r.growth = g;
  r.growth_objective = 12345.5;
  LifecycleForecast f;
  f.t_current = 199;
  f.T_maturation = 352.18475;
  f.remaining_years = (352.18475 - 199) / 12;
  f.lifetime_dev_months = 9448.6151;
  f.current_growth = 4.96e6;
  f.lifetime_growth = 5.24e6;
  r.forecast = f;
  ValuationReport v;
  v.supply = supply_side(4.96e6, 8214, 5.24e6);
  v.demand = demand_side(2772426479, 91014, f);
  r.valuation = v;
  r.downloads_window = 2772426479;
  r.lines_window = 91014;
  r.warnings = {"example warning"};
  return r;
}

}  // namespace

TEST_CASE("report JSON layout") {
  const auto j = json::parse(to_json(sample()));
  for (const char* key : {"project", "fitted", "forecast", "stability", "valuation"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["fitted"].contains("bass"));
  CHECK(j["fitted"].contains("growth"));
  for (const char* key : {"t_current", "T_maturation", "remaining_years", "lifetime_dev_months",
                          "lifetime_growth"}) {
    CHECK(j["forecast"].contains(key));
  }
  CHECK(j["fitted"]["bass"]["p"].get<double>() == 0.00084);
  CHECK(j["stability"].is_null());
  CHECK(j["valuation"]["demand"]["remaining_downloads"].get<std::int64_t>() ==
        std::llround(2772426479.0 * (352.18475 - 199) / 6));
}

TEST_CASE("report JSON round trip") {
  const auto r = sample();
  const auto back = report_from_json(to_json(r));
  CHECK(back.project == r.project);
  CHECK(back.start == r.start);
  CHECK(back.end == r.end);
  CHECK(back.bass.p == r.bass.p);
  CHECK(back.bass.q == r.bass.q);
  CHECK(back.bass.m == r.bass.m);
  CHECK(back.bass.valid);
  REQUIRE(back.growth);
  CHECK(back.growth->gamma == r.growth->gamma);
  CHECK(back.growth->phi == r.growth->phi);
  CHECK(back.growth_objective == r.growth_objective);
  REQUIRE(back.forecast);
  CHECK(back.forecast->T_maturation == r.forecast->T_maturation);
  CHECK(back.forecast->lifetime_growth == r.forecast->lifetime_growth);
  CHECK(back.cum_dev_months == 8214);
  CHECK(back.warnings == r.warnings);
  CHECK(to_json(back).find("\"project\": \"pandas-dev-pandas\"") != std::string::npos);
}

TEST_CASE("non-finite numbers become null") {
  auto r = sample();
  r.bass = BassParams{};
  r.bass.m = std::nan("");
  const auto j = json::parse(to_json(r));
  CHECK(j["fitted"]["bass"]["m"].is_null());
  CHECK(std::isnan(report_from_json(to_json(r)).bass.m));
  CHECK_THROWS_AS(report_from_json("{not json"), ParseError);
  CHECK_THROWS_AS(report_from_json("{}"), ParseError);
}

TEST_CASE("batch tables carry one row per project") {
  std::vector<BatchRow> rows{{sample(), "ok", ""}, {LifecycleReport{}, "error", "no data"}};
  rows[1].report.project = "broken";

  std::stringstream eng, val, dl;
  write_engagement_table(eng, rows);
  write_valuation_table(val, rows);
  write_downloads_table(dl, rows);
  for (auto* s : {&eng, &val, &dl}) {
    std::string line;
    int n = 0;
    while (std::getline(*s, line)) ++n;
    CHECK(n == 3);
  }
  CHECK(eng.str().find("pandas-dev-pandas,2009-07,2026-01,0.00084,0.02686,9448.61510,199,352.18475,12.76540") !=
        std::string::npos);
  CHECK(val.str().find("pandas-dev-pandas,199,352,8214,4.96,5.24,603.85,41.07,43.39,ok") !=
        std::string::npos);
  CHECK(dl.str().find("pandas-dev-pandas,2772426479,91014,30461.54") != std::string::npos);
  CHECK(val.str().find("broken") != std::string::npos);
}

TEST_CASE("plot companions") {
  std::vector<double> grid;
  const auto b = BassParams::from_pqm(0.01, 0.1, 100);
  for (int i = 0; i <= 10; ++i) grid.push_back(peak(b).t0 * i / 5.0);
  std::stringstream s;
  write_normalized_csv(s, normalize(b, grid));
  std::string header, row;
  std::getline(s, header);
  CHECK(header == "t_prime,f_prime");
  for (int i = 0; i < 6; ++i) std::getline(s, row);
  CHECK(row == "1,1");

  GrowthPath path{{0, 1}, {10, 12}, {3, 4}};
  std::stringstream g;
  write_growth_path_csv(g, path);
  CHECK(g.str() == "month,A_hat,L_hat\n0,10,3\n1,12,4\n");
}

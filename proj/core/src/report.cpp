#include "osslc/report.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "osslc/error.hpp"

namespace osslc {
namespace {

using json = nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::numeric_limits<double>::quiet_NaN();
  return it->get<double>();
}

json bass_json(const BassParams& b) {
  return {{"p", number(b.p)},         {"q", number(b.q)},
          {"m", number(b.m)},         {"beta0", number(b.beta0)},
          {"beta1", number(b.beta1)}, {"beta2", number(b.beta2)},
          {"r_squared", number(b.r_squared)}, {"valid", b.valid}};
}

BassParams bass_from(const json& j) {
  BassParams b;
  b.p = read_number(j, "p");
  b.q = read_number(j, "q");
  b.m = read_number(j, "m");
  b.beta0 = read_number(j, "beta0");
  b.beta1 = read_number(j, "beta1");
  b.beta2 = read_number(j, "beta2");
  b.r_squared = read_number(j, "r_squared");
  b.valid = j.value("valid", false);
  return b;
}

json growth_json(const std::optional<GrowthParams>& g, std::optional<double> objective) {
  if (!g) return nullptr;
  json j = {{"gamma", number(g->gamma)}, {"lambda", number(g->lambda)},
            {"phi", number(g->phi)},     {"A0", number(g->A0)}};
  if (objective) j["objective"] = number(*objective);
  return j;
}

GrowthParams growth_from(const json& j) {
  GrowthParams g;
  g.gamma = read_number(j, "gamma");
  g.lambda = read_number(j, "lambda");
  g.phi = read_number(j, "phi");
  g.A0 = read_number(j, "A0");
  return g;
}

json currency_json(const Currency& c) { return {{"amount", number(c.amount)}, {"unit", c.unit}}; }

template <typename T>
json optional_number(const std::optional<T>& v) {
  if (!v) return nullptr;
  return number(static_cast<double>(*v));
}

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_json(const LifecycleReport& r, int indent) {
  json j;
  j["project"] = r.project;
  j["fitted"] = {{"bass", bass_json(r.bass)}, {"growth", growth_json(r.growth, r.growth_objective)}};

  if (r.forecast) {
    const auto& f = *r.forecast;
    j["forecast"] = {{"t_current", f.t_current},
                     {"T_maturation", number(f.T_maturation)},
                     {"remaining_years", number(f.remaining_years)},
                     {"lifetime_dev_months", number(f.lifetime_dev_months)},
                     {"lifetime_growth", number(f.lifetime_growth)},
                     {"current_growth", number(f.current_growth)},
                     {"already_mature", f.already_mature}};
  } else {
    j["forecast"] = nullptr;
  }

  if (r.stability) {
    const auto& s = *r.stability;
    json d = nullptr;
    if (s.divergence) {
      d = {{"growth", number(s.divergence->growth)},
           {"engagement", number(s.divergence->engagement)}};
    }
    j["stability"] = {
        {"fraction", s.fraction},
        {"truncated_months", s.truncated_months},
        {"horizon", number(s.horizon)},
        {"full", {{"bass", bass_json(s.full_fit.bass)},
                  {"growth", growth_json(s.full_fit.growth, s.full_fit.growth_objective)}}},
        {"truncated",
         {{"bass", bass_json(s.truncated_fit.bass)},
          {"growth", growth_json(s.truncated_fit.growth, s.truncated_fit.growth_objective)}}},
        {"divergence", d}};
  } else {
    j["stability"] = nullptr;
  }

  if (r.valuation) {
    const auto& v = *r.valuation;
    json demand = nullptr;
    if (v.demand) {
      const auto& d = *v.demand;
      demand = {{"downloads_ratio", optional_number(d.downloads_ratio)},
                {"lifetime_downloads", optional_number(d.lifetime_downloads)},
                {"remaining_downloads", d.remaining_downloads}};
      if (d.lifetime_value) demand["lifetime_value"] = currency_json(*d.lifetime_value);
      if (d.remaining_value) demand["remaining_value"] = currency_json(*d.remaining_value);
    }
    j["valuation"] = {{"supply",
                       {{"innov_per_devmonth", number(v.supply.innov_per_devmonth)},
                        {"current", currency_json(v.supply.current)},
                        {"lifetime", currency_json(v.supply.lifetime)}}},
                      {"demand", demand}};
  } else {
    j["valuation"] = nullptr;
  }

  j["observed"] = {{"start", r.start ? json(r.start->str()) : json(nullptr)},
                   {"end", r.end ? json(r.end->str()) : json(nullptr)},
                   {"months", r.observed_months},
                   {"cum_dev_months", r.cum_dev_months},
                   {"cum_lines", r.cum_lines},
                   {"lines_window", optional_number(r.lines_window)},
                   {"downloads_window", optional_number(r.downloads_window)}};
  j["warnings"] = r.warnings;
  return j.dump(indent);
}

LifecycleReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("report", 0, std::string("invalid JSON: ") + e.what());
  }
  try {
    LifecycleReport r;
    r.project = j.at("project").get<std::string>();
    r.bass = bass_from(j.at("fitted").at("bass"));
    if (const auto& g = j.at("fitted").at("growth"); !g.is_null()) {
      r.growth = growth_from(g);
      if (g.contains("objective")) r.growth_objective = read_number(g, "objective");
    }
    if (const auto& f = j.at("forecast"); !f.is_null()) {
      LifecycleForecast fc;
      fc.t_current = f.at("t_current").get<long>();
      fc.T_maturation = read_number(f, "T_maturation");
      fc.remaining_years = read_number(f, "remaining_years");
      fc.lifetime_dev_months = read_number(f, "lifetime_dev_months");
      fc.lifetime_growth = read_number(f, "lifetime_growth");
      fc.current_growth = read_number(f, "current_growth");
      fc.already_mature = f.value("already_mature", false);
      r.forecast = fc;
    }
    if (auto it = j.find("observed"); it != j.end() && it->is_object()) {
      const auto& o = *it;
      if (o.contains("start") && o["start"].is_string()) r.start = YearMonth::parse(o["start"].get<std::string>());
      if (o.contains("end") && o["end"].is_string()) r.end = YearMonth::parse(o["end"].get<std::string>());
      r.observed_months = o.value("months", 0L);
      r.cum_dev_months = o.value("cum_dev_months", std::int64_t{0});
      r.cum_lines = o.value("cum_lines", std::int64_t{0});
    }
    if (auto it = j.find("warnings"); it != j.end() && it->is_array()) {
      r.warnings = it->get<std::vector<std::string>>();
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError("report", 0, std::string("unexpected report layout: ") + e.what());
  }
}

void write_growth_path_csv(std::ostream& out, const GrowthPath& path) {
  out << "month,A_hat,L_hat\n" << std::setprecision(12);
  for (std::size_t i = 0; i < path.months.size(); ++i) {
    out << path.months[i] << ',' << path.A_hat[i] << ',' << path.L_hat[i] << '\n';
  }
}

void write_normalized_csv(std::ostream& out, const NormalizedCurve& curve) {
  out << "t_prime,f_prime\n" << std::setprecision(12);
  for (std::size_t i = 0; i < curve.t_prime.size(); ++i) {
    out << curve.t_prime[i] << ',' << curve.f_prime[i] << '\n';
  }
}

void write_phase_csv(std::ostream& out, const LifecycleForecast& forecast) {
  out << "month,L_hat,A_hat\n" << std::setprecision(12);
  for (const auto& p : forecast.phase) out << p.t << ',' << p.L_hat << ',' << p.A_hat << '\n';
}

void write_engagement_csv(std::ostream& out, const MonthlySeries& series, const BassParams& bass,
                          double t_end) {
  out << "month_index,month,observed,fitted_monthly,fitted_rate\n" << std::setprecision(10);
  const auto last = std::max<long>(static_cast<long>(series.size()),
                                   static_cast<long>(std::ceil(std::isfinite(t_end) ? t_end : 0.0)));
  for (long k = 0; k < last; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    out << k << ',';
    if (!series.empty()) out << (series.months.front() + k).str();
    out << ',';
    if (idx < series.size()) out << series.developers[idx];
    out << ',';
    if (bass.valid) out << predict_monthly_L(bass, k) << ',' << predict_rate(bass, k + 0.5);
    else out << ',';
    out << '\n';
  }
}

void write_engagement_table(std::ostream& out, const std::vector<BatchRow>& rows) {
  out << "project,start_date,end_date,p,q,m,t,T,yrs,r_squared,valid,status\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << quoted(r.project) << ',' << (r.start ? r.start->str() : "") << ','
        << (r.end ? r.end->str() : "") << ',' << fixed(r.bass.p, 5) << ','
        << fixed(r.bass.q, 5) << ',' << fixed(r.bass.m, 5) << ',' << r.observed_months << ',';
    if (r.forecast) out << fixed(r.forecast->T_maturation, 5) << ',' << fixed(r.forecast->remaining_years, 5);
    else out << ',';
    out << ',' << fixed(r.bass.r_squared, 4) << ',' << (r.bass.valid ? "true" : "false") << ','
        << quoted(row.status) << '\n';
  }
}

void write_valuation_table(std::ostream& out, const std::vector<BatchRow>& rows) {
  out << "project,current_life_months,full_life_months,current_cum_dev_months,"
         "current_cum_growth_mm,lifetime_growth_mm,innov_per_devmonth,"
         "supply_current_musd,supply_lifetime_musd,status\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << quoted(r.project) << ',' << r.observed_months << ',';
    if (r.forecast) out << fixed(std::round(r.forecast->T_maturation), 0);
    out << ',' << r.cum_dev_months << ',' << fixed(static_cast<double>(r.cum_lines) / 1e6, 2) << ',';
    if (r.forecast) out << fixed(r.forecast->lifetime_growth / 1e6, 2);
    out << ',';
    if (r.valuation) {
      const auto& s = r.valuation->supply;
      out << fixed(s.innov_per_devmonth, 2) << ',' << fixed(s.current.amount / 1e6, 2) << ','
          << fixed(s.lifetime.amount / 1e6, 2);
    } else {
      out << ",,";
    }
    out << ',' << quoted(row.status) << '\n';
  }
}

void write_downloads_table(std::ostream& out, const std::vector<BatchRow>& rows) {
  out << "project,downloads_6mo,changes_6mo,ratio,lifetime_downloads,remaining_downloads,status\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << quoted(r.project) << ',';
    if (r.downloads_window) out << *r.downloads_window;
    out << ',';
    if (r.lines_window) out << *r.lines_window;
    out << ',';
    const DemandSide* d = r.valuation && r.valuation->demand ? &*r.valuation->demand : nullptr;
    if (d && d->downloads_ratio) out << fixed(*d->downloads_ratio, 2);
    out << ',';
    if (d && d->lifetime_downloads) out << fixed(*d->lifetime_downloads, 0);
    out << ',';
    if (d) out << d->remaining_downloads;
    out << ',' << quoted(d ? row.status : (row.status == "ok" ? "no download data" : row.status))
        << '\n';
  }
}

}  // namespace osslc

#include "osslc/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "osslc/error.hpp"
#include "osslc/regression.hpp"

namespace osslc {

Maturation maturation_time(const BassParams& bass, double threshold, double t_current) {
  if (!bass.valid) throw FitError("maturation undefined for an invalid engagement fit");
  if (!(threshold > 0.0)) throw DomainError("maturation threshold must be positive");
  const auto pk = peak(bass);
  if (!(bass.m * pk.f0 > threshold)) return {t_current, true};

  // m f(t) is strictly decreasing past the peak; the bracket end is far
  // enough down the sech^2 tail for any realistic m.
  double lo = pk.t0;
  double hi = pk.t0 + 200.0 / (bass.p + bass.q);
  const auto excess = [&](double t) { return predict_rate(bass, t) - threshold; };
  if (excess(hi) > 0.0) throw FitError("maturation threshold not crossed within search bracket");
  for (int i = 0; i < 200 && hi - lo > 1e-10; ++i) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return {0.5 * (lo + hi), false};
}

LifecycleForecast project_lifecycle(const BassParams& bass, const GrowthParams& growth,
                                    const MonthlySeries& series,
                                    const ProjectionOptions& options) {
  if (series.empty()) throw FitError("cannot project an empty series");
  if (!bass.valid) throw FitError("cannot project with an invalid engagement fit");

  LifecycleForecast out;
  out.t_current = static_cast<long>(series.size());
  const double now = static_cast<double>(out.t_current);
  out.current_growth = static_cast<double>(series.cum_lines.back());
  out.lifetime_dev_months = bass.m;

  const auto mat = maturation_time(bass, options.threshold, now);
  out.already_mature = mat.already_mature || mat.months <= now;
  out.T_maturation = out.already_mature ? now : mat.months;
  out.remaining_years = (out.T_maturation - now) / 12.0;

  const auto driver = labor_driver(bass, series);
  if (out.already_mature) {
    out.lifetime_growth = out.current_growth;
  } else {
    auto o = options.integration;
    o.t_begin = now;
    const auto ahead = integrate_A(growth, driver, out.T_maturation - now,
                                   std::max(out.current_growth, 1.0), o);
    out.lifetime_growth = ahead.A_hat.back();
  }

  const auto path = fitted_path(series, bass, growth, out.T_maturation, options.integration);
  out.phase.reserve(path.months.size());
  for (std::size_t i = 0; i < path.months.size(); ++i) {
    out.phase.push_back({path.months[i], path.L_hat[i], path.A_hat[i]});
  }
  return out;
}

QuadraticFit poly_trend(const MonthlySeries& series, TrendTarget target) {
  if (series.size() < 3) throw FitError("trend fit needs at least 3 months");
  std::vector<double> t(series.size());
  std::vector<double> y(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    t[i] = static_cast<double>(i);
    y[i] = target == TrendTarget::cumulative_growth ? static_cast<double>(series.cum_lines[i])
                                                    : static_cast<double>(series.developers[i]);
  }
  return fit_quadratic(t, y);
}

double max_relative_gap(std::span<const double> reference, std::span<const double> other,
                        double eps) {
  if (reference.size() != other.size()) throw DomainError("paths differ in length");
  double gap = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    gap = std::max(gap, std::abs(reference[i] - other[i]) / std::max(std::abs(reference[i]), eps));
  }
  return gap;
}

namespace {

ModelFit fit_models(const MonthlySeries& series, const CalibrationOptions& calibration) {
  ModelFit fit;
  fit.bass = fit_bass(series);
  if (!fit.bass.valid) return fit;
  try {
    const auto r = calibrate_growth(series, fit.bass, calibration);
    fit.growth = r.params;
    fit.growth_objective = r.objective;
  } catch (const FitError&) {
    fit.growth.reset();
  }
  return fit;
}

std::vector<double> engagement_path(const BassParams& bass, std::span<const double> times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(predict_rate(bass, t));
  return out;
}

}  // namespace

StabilityResult stability_experiment(const MonthlySeries& series, const StabilityOptions& options) {
  if (!(options.fraction > 0.0 && options.fraction <= 1.0)) {
    throw DomainError("stability fraction must lie in (0, 1]");
  }
  StabilityResult out;
  out.fraction = options.fraction;
  out.truncated_months = static_cast<std::size_t>(
      std::floor(options.fraction * static_cast<double>(series.size()) + 1e-9));
  const auto truncated = series.head(out.truncated_months);

  auto pending = std::async(std::launch::async,
                            [&] { return fit_models(truncated, options.calibration); });
  out.full_fit = fit_models(series, options.calibration);
  out.truncated_fit = pending.get();

  const double now = static_cast<double>(series.size());
  out.horizon = now;
  if (out.full_fit.bass.valid) {
    const auto mat = maturation_time(out.full_fit.bass, options.threshold, now);
    out.horizon = std::max(mat.months, now);
  }
  if (!out.full_fit.growth || !out.truncated_fit.growth) return out;

  const auto full = fitted_path(series, out.full_fit.bass, *out.full_fit.growth, out.horizon,
                                options.calibration.integration);
  const auto part = fitted_path(truncated, out.truncated_fit.bass, *out.truncated_fit.growth,
                                out.horizon, options.calibration.integration);
  Divergence d;
  d.growth = max_relative_gap(full.A_hat, part.A_hat);
  d.engagement = max_relative_gap(engagement_path(out.full_fit.bass, full.months),
                                  engagement_path(out.truncated_fit.bass, full.months));
  out.divergence = d;
  return out;
}

}  // namespace osslc

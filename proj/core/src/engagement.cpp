#include "osslc/engagement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "osslc/error.hpp"
#include "osslc/regression.hpp"

namespace osslc {

RegressionCoefficients to_coefficients(double p, double q, double m) {
  return {p * m, q - p, -q / m};
}

BassParams BassParams::from_pqm(double p, double q, double m) {
  BassParams b;
  b.p = p;
  b.q = q;
  b.m = m;
  const auto c = to_coefficients(p, q, m);
  b.beta0 = c.beta0;
  b.beta1 = c.beta1;
  b.beta2 = c.beta2;
  b.r_squared = 1.0;
  b.valid = p > 0.0 && q > 0.0 && m > 0.0;
  return b;
}

BassParams from_coefficients(double beta0, double beta1, double beta2, double observed) {
  BassParams b;
  b.beta0 = beta0;
  b.beta1 = beta1;
  b.beta2 = beta2;
  b.valid = false;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  b.p = b.q = b.m = nan;

  auto assign = [&](double m) {
    b.m = m;
    b.p = beta0 / m;
    b.q = -m * beta2;
  };

  if (beta2 == 0.0) {
    // No curvature means q = 0: the model degenerates.
    if (beta1 != 0.0) assign(-beta0 / beta1);
    return b;
  }
  const double disc = beta1 * beta1 - 4.0 * beta0 * beta2;
  if (disc < 0.0) return b;

  // Stable pair of roots; `plus` is (-beta1 + sqrt(disc)) / (2 beta2).
  const double root = std::sqrt(disc);
  const double k = -0.5 * (beta1 + std::copysign(root, beta1));
  double r1 = k / beta2;
  double r2 = k != 0.0 ? beta0 / k : r1;
  const double plus = beta1 >= 0.0 ? r2 : r1;

  double best = nan;
  bool best_covers = false;
  for (double m : {r1, r2}) {
    if (!(m > 0.0) || !(beta0 / m > 0.0) || !(-m * beta2 > 0.0)) continue;
    const bool covers = m >= observed;
    if (std::isnan(best) || (covers && !best_covers) || (covers == best_covers && m > best)) {
      best = m;
      best_covers = covers;
    }
  }
  if (std::isnan(best)) {
    assign(plus);
    return b;
  }
  assign(best);
  b.valid = true;
  return b;
}

BassParams fit_bass(std::span<const double> developers) {
  if (developers.size() < kMinBassMonths) {
    throw FitError("engagement fit needs at least " + std::to_string(kMinBassMonths) +
                   " months, got " + std::to_string(developers.size()));
  }
  std::vector<double> regressor;
  regressor.reserve(developers.size());
  double cum = 0.0;
  for (double l : developers) {
    regressor.push_back(cum + 0.5 * l);
    cum += l;
  }
  QuadraticFit fit;
  try {
    fit = fit_quadratic(regressor, developers);
  } catch (const FitError& e) {
    throw FitError(std::string("engagement fit: ") + e.what());
  }
  auto b = from_coefficients(fit.c0, fit.c1, fit.c2, cum);
  b.r_squared = fit.r_squared;
  return b;
}

BassParams fit_bass(const MonthlySeries& series) {
  if (series.size() < kMinBassMonths) {
    throw FitError("engagement fit needs at least " + std::to_string(kMinBassMonths) +
                   " months, got " + std::to_string(series.size()));
  }
  const std::set<std::int64_t> distinct(series.cum_dev_months.begin(),
                                        series.cum_dev_months.end());
  if (distinct.size() < 3) {
    throw FitError("degenerate engagement series: cumulative developer-months take fewer "
                   "than 3 distinct values");
  }
  std::vector<double> l(series.developers.begin(), series.developers.end());
  return fit_bass(l);
}

double bass_F(const BassParams& b, double t) {
  const double e = std::exp(-(b.p + b.q) * t);
  return b.p * (1.0 - e) / (b.p + b.q * e);
}

double bass_f(const BassParams& b, double t) {
  const double s = b.p + b.q;
  const double e = std::exp(-s * t);
  const double d = b.p + b.q * e;
  return b.p * s * s * e / (d * d);
}

double predict_monthly_L(const BassParams& b, long month_index) {
  const double t = static_cast<double>(month_index);
  return b.m * (bass_F(b, t + 1.0) - bass_F(b, t));
}

double predict_rate(const BassParams& b, double t) { return b.m * bass_f(b, t); }

Peak peak(const BassParams& b) {
  if (!(b.q > b.p)) return {0.0, bass_f(b, 0.0), true};
  const double s = b.p + b.q;
  return {std::log(b.q / b.p) / s, s * s / (4.0 * b.q), false};
}

double normalized_density(double alpha, double t_prime) {
  const double c = std::cosh(0.5 * alpha * (1.0 - t_prime));
  return 1.0 / (c * c);
}

NormalizedCurve normalize(const BassParams& b, std::span<const double> grid) {
  if (!(b.p > 0.0) || !(b.q > b.p)) {
    throw DomainError("normalization undefined, alpha <= 0 (requires q > p > 0)");
  }
  const auto pk = peak(b);
  NormalizedCurve c;
  c.t0 = pk.t0;
  c.f0 = pk.f0;
  c.alpha = std::log(b.q / b.p);
  c.t_prime.reserve(grid.size());
  c.f_prime.reserve(grid.size());
  for (double t : grid) {
    c.t_prime.push_back(t / pk.t0);
    c.f_prime.push_back(bass_f(b, t) / pk.f0);
  }
  return c;
}

}  // namespace osslc

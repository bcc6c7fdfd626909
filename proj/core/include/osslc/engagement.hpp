#pragma once

#include <optional>
#include <span>
#include <vector>

#include "osslc/ingest.hpp"

namespace osslc {

// Bass-style engagement model: per-month engagement fraction f(t) with
// f / (1 - F) = p + q F, scaled by lifetime developer-months m.
struct BassParams {
  double p = 0.0;  // independent engagement, per month
  double q = 0.0;  // imitation / network effect, per month
  double m = 0.0;  // lifetime developer-months
  // L(t) = beta0 + beta1 C + beta2 C^2, C = cumulative developer-months.
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double r_squared = 0.0;
  bool valid = false;

  // Parameters with regression coefficients filled in from (p, q, m).
  static BassParams from_pqm(double p, double q, double m);
};

struct RegressionCoefficients {
  double beta0;
  double beta1;
  double beta2;
};

RegressionCoefficients to_coefficients(double p, double q, double m);

// Recovers (p, q, m) from regression coefficients. `observed` is the
// engagement seen so far; it only steers the choice between two admissible
// roots. Never throws: inadmissible inputs yield valid == false.
BassParams from_coefficients(double beta0, double beta1, double beta2,
                             double observed = 0.0);

inline constexpr std::size_t kMinBassMonths = 6;

// Fits the model by ordinary least squares of monthly developers against
// cumulative engagement at mid-month, (C(t-1) + C(t)) / 2. Throws FitError
// when the series is too short or the regressor is degenerate.
BassParams fit_bass(const MonthlySeries& series);

// Regression form used by fit_bass, exposed for diagnostics.
BassParams fit_bass(std::span<const double> developers);

double bass_F(const BassParams& params, double t);
double bass_f(const BassParams& params, double t);

// Expected developers in month k (0-based; month k spans [k, k + 1]).
double predict_monthly_L(const BassParams& params, long month_index);
// Continuous engagement rate m f(t).
double predict_rate(const BassParams& params, double t);

struct Peak {
  double t0 = 0.0;
  double f0 = 0.0;
  bool at_origin = false;  // q <= p, density is decreasing from t = 0
};

Peak peak(const BassParams& params);

struct NormalizedCurve {
  double t0 = 0.0;
  double f0 = 0.0;
  double alpha = 0.0;  // ln(q / p)
  std::vector<double> t_prime;
  std::vector<double> f_prime;
};

// Rescales time by the peak time and density by the peak height. Throws
// DomainError when q <= p.
NormalizedCurve normalize(const BassParams& params, std::span<const double> grid);

// Closed-form normalized density sech^2((alpha / 2)(1 - t')).
double normalized_density(double alpha, double t_prime);

}  // namespace osslc

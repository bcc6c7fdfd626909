#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "osslc/engagement.hpp"
#include "osslc/growth.hpp"
#include "osslc/ingest.hpp"
#include "osslc/regression.hpp"

namespace osslc {

inline constexpr double kDefaultMaturationThreshold = 0.5;

struct Maturation {
  double months = 0.0;
  // Peak engagement never reaches the threshold; months is the current time.
  bool already_mature = false;
};

// Time after the peak at which m f(t) falls to `threshold` developers/month.
// Throws FitError for an invalid engagement fit.
Maturation maturation_time(const BassParams& bass,
                           double threshold = kDefaultMaturationThreshold,
                           double t_current = 0.0);

struct PhasePoint {
  double t;
  double L_hat;
  double A_hat;
};

struct LifecycleForecast {
  long t_current = 0;
  double T_maturation = 0.0;
  double remaining_years = 0.0;
  double lifetime_dev_months = 0.0;
  double current_growth = 0.0;
  double lifetime_growth = 0.0;
  bool already_mature = false;
  std::vector<PhasePoint> phase;
};

struct ProjectionOptions {
  double threshold = kDefaultMaturationThreshold;
  IntegrationOptions integration{};
};

// Extrapolates observed growth to the maturation date. lifetime_growth comes
// from integrating forward from the last observed cumulative total; the phase
// diagram follows the fitted model path from the first month to maturity.
LifecycleForecast project_lifecycle(const BassParams& bass, const GrowthParams& growth,
                                    const MonthlySeries& series,
                                    const ProjectionOptions& options = {});

enum class TrendTarget { cumulative_growth, developers };

// Quadratic least-squares trend in months since inception (0 for the first
// month).
QuadraticFit poly_trend(const MonthlySeries& series, TrendTarget target);

struct ModelFit {
  BassParams bass;
  std::optional<GrowthParams> growth;  // absent when calibration failed
  double growth_objective = 0.0;
};

struct Divergence {
  double growth = 0.0;      // max relative gap between projected A paths
  double engagement = 0.0;  // max relative gap between projected L paths
};

struct StabilityResult {
  double fraction = 1.0;
  std::size_t truncated_months = 0;
  double horizon = 0.0;
  ModelFit full_fit;
  ModelFit truncated_fit;
  // Present only when both fits are valid.
  std::optional<Divergence> divergence;
};

struct StabilityOptions {
  double fraction = 0.75;
  CalibrationOptions calibration{};
  double threshold = kDefaultMaturationThreshold;
};

// Max over the grid of |a - b| / max(|a|, eps).
double max_relative_gap(std::span<const double> reference,
                        std::span<const double> other, double eps = 1e-12);

StabilityResult stability_experiment(const MonthlySeries& series,
                                     const StabilityOptions& options = {});

}  // namespace osslc

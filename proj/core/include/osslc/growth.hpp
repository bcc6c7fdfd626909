#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "osslc/engagement.hpp"
#include "osslc/ingest.hpp"
#include "osslc/simplex.hpp"

namespace osslc {

// dA/dt = gamma L^lambda A^phi, with dL/dt = n L for the exponential-labor
// closed form.
struct GrowthParams {
  double gamma = 1.0;
  double lambda = 1.0;
  double phi = 0.0;
  double n = 0.0;
  double A0 = 1.0;
  double L0 = 1.0;
};

struct GrowthPath {
  std::vector<double> months;  // time grid, months since inception
  std::vector<double> A_hat;
  std::vector<double> L_hat;
};

// Closed form under L(t) = L0 e^{n t}. Requires phi != 1, n > 0, lambda != 0.
double closed_form_A(const GrowthParams& params, double t);
// Closed form under constant labor L.
double closed_form_A_constL(const GrowthParams& params, double L, double t);

using LaborDriver = std::function<double(double)>;

struct IntegrationOptions {
  double step = 0.25;         // RK4 step, months
  double labor_floor = 1e-6;  // L^lambda uses max(L, labor_floor)
  double t_begin = 0.0;
  // Output grid spacing; the final point always lands on t_begin + horizon.
  double sample_every = 1.0;
};

// Fixed-step RK4 integrator. The state is carried as A^{1-phi}, which turns
// the growth equation into a quadrature of gamma L^lambda, so the step size
// only has to resolve the labor driver. The driver is sampled once at every
// stage node; repeated runs with different parameters (calibration) only pay
// for the power evaluations.
class GrowthIntegrator {
 public:
  GrowthIntegrator(const LaborDriver& labor, double horizon,
                   IntegrationOptions options = {});

  GrowthPath run(const GrowthParams& params, double A0) const;
  // A at the sample points only; returns false on a non-finite state instead
  // of throwing.
  bool sample(const GrowthParams& params, double A0, std::vector<double>& out) const;

  const std::vector<double>& sample_times() const noexcept { return sample_times_; }
  const std::vector<double>& sample_labor() const noexcept { return sample_labor_; }

 private:
  struct Step {
    double h;
    double log_l0, log_lmid, log_l1;  // log max(L, floor) at t, t+h/2, t+h
    bool emit;                        // record A after this step
  };

  // Returns the index of the failing step, or steps_.size() on success.
  std::size_t integrate(const GrowthParams& params, double A0,
                        std::vector<double>& out) const;

  IntegrationOptions options_;
  double A_floor_ = 1.0;
  std::vector<Step> steps_;
  std::vector<double> sample_times_;
  std::vector<double> sample_labor_;
};

// Integrates from options.t_begin to options.t_begin + horizon starting at A0.
// Throws DomainError with the step index when the state becomes non-finite.
GrowthPath integrate_A(const GrowthParams& params, const LaborDriver& labor,
                       double horizon, double A0, IntegrationOptions options = {});

struct CalibrationBounds {
  double log_gamma_lo = -10.0, log_gamma_hi = 20.0;
  double lambda_lo = -5.0, lambda_hi = 5.0;
  double phi_lo = -3.0, phi_hi = 0.99;
};

struct CalibrationOptions {
  IntegrationOptions integration{};
  CalibrationBounds bounds{};
  SimplexOptions simplex{};
};

struct CalibrationResult {
  GrowthParams params;
  double objective = 0.0;  // mean squared error over observed months
  bool used_observed_labor = false;
  int evaluations = 0;
  std::size_t best_start = 0;
  // Best objective after each optimizer iteration, across all starts.
  std::vector<double> best_history;
};

// Labor driver used for calibration and projection: m f(t) for a valid
// engagement fit, otherwise the observed monthly developer counts held
// constant over each month.
LaborDriver labor_driver(const BassParams& bass, const MonthlySeries& series);

// Objective for a given parameter set. Month k of the series is compared
// with the model at t = k + 1, starting from A0 = max(A(first month), 1).
double growth_objective(const MonthlySeries& series, const BassParams& bass,
                        const GrowthParams& params,
                        const IntegrationOptions& integration = {});

struct SeedPoint {
  double lambda;
  double phi;
};

// Factorial grid over lambda and phi plus two neutral starts.
std::vector<SeedPoint> calibration_seeds();

inline constexpr std::size_t kMinGrowthMonths = 12;

CalibrationResult calibrate_growth(const MonthlySeries& series, const BassParams& bass,
                                   const CalibrationOptions& options = {});

// Model path for a calibrated parameter set from the first month through
// t_end (months since inception), sampled monthly.
GrowthPath fitted_path(const MonthlySeries& series, const BassParams& bass,
                       const GrowthParams& params, double t_end,
                       const IntegrationOptions& integration = {});

}  // namespace osslc

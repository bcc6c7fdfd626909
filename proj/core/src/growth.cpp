#include "osslc/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "osslc/error.hpp"

namespace osslc {
namespace {

std::string describe(const GrowthParams& p) {
  std::ostringstream os;
  os << "gamma=" << p.gamma << " lambda=" << p.lambda << " phi=" << p.phi;
  return os.str();
}

void check_phi(const GrowthParams& params) {
  if (params.phi == 1.0) throw DomainError("closed form requires phi != 1");
  if (!(params.A0 > 0.0)) throw DomainError("closed form requires A0 > 0");
}

double power_root(double base, double phi) {
  if (!(base > 0.0) || !std::isfinite(base)) {
    throw DomainError("solution left real domain (base of outer power is " +
                      std::to_string(base) + ")");
  }
  return std::pow(base, 1.0 / (1.0 - phi));
}

}  // namespace

double closed_form_A(const GrowthParams& params, double t) {
  check_phi(params);
  if (!(params.n > 0.0)) throw DomainError("closed form requires n > 0");
  if (params.lambda == 0.0) throw DomainError("closed form requires lambda != 0");
  const double one_minus_phi = 1.0 - params.phi;
  const double k = one_minus_phi * params.gamma * std::pow(params.L0, params.lambda) /
                   (params.lambda * params.n);
  // k e^{lambda n t} + A0^{1-phi} - k, with the difference taken exactly.
  const double base =
      std::pow(params.A0, one_minus_phi) + k * std::expm1(params.lambda * params.n * t);
  return power_root(base, params.phi);
}

double closed_form_A_constL(const GrowthParams& params, double L, double t) {
  check_phi(params);
  const double one_minus_phi = 1.0 - params.phi;
  const double base = one_minus_phi * (params.gamma * std::pow(L, params.lambda) * t +
                                       std::pow(params.A0, one_minus_phi) / one_minus_phi);
  return power_root(base, params.phi);
}

GrowthIntegrator::GrowthIntegrator(const LaborDriver& labor, double horizon,
                                   IntegrationOptions options)
    : options_(options) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw DomainError("integration horizon must be finite and non-negative");
  }
  if (!(options_.step > 0.0)) throw DomainError("integration step must be positive");
  if (!(options_.sample_every > 0.0)) throw DomainError("sample spacing must be positive");

  auto log_labor = [&](double t) {
    const double l = labor(t);
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw DomainError("labor driver returned " + std::to_string(l) + " at t=" +
                        std::to_string(t));
    }
    return std::log(std::max(l, options_.labor_floor));
  };

  const double t0 = options_.t_begin;
  const double t_end = t0 + horizon;
  sample_times_.push_back(t0);
  sample_labor_.push_back(labor(t0));

  const auto segments = static_cast<long>(std::ceil(horizon / options_.sample_every - 1e-9));
  double seg_start = t0;
  for (long s = 1; s <= segments; ++s) {
    const double seg_end = std::min(t0 + static_cast<double>(s) * options_.sample_every, t_end);
    const double width = seg_end - seg_start;
    const auto n_steps = std::max<long>(1, static_cast<long>(std::ceil(width / options_.step - 1e-9)));
    const double h = width / static_cast<double>(n_steps);
    for (long k = 0; k < n_steps; ++k) {
      const double t = seg_start + static_cast<double>(k) * h;
      steps_.push_back({h, log_labor(t), log_labor(t + 0.5 * h), log_labor(t + h),
                        k + 1 == n_steps});
    }
    sample_times_.push_back(seg_end);
    sample_labor_.push_back(labor(seg_end));
    seg_start = seg_end;
  }
}

std::size_t GrowthIntegrator::integrate(const GrowthParams& params, double A0,
                                        std::vector<double>& out) const {
  out.clear();
  out.reserve(sample_times_.size());
  out.push_back(A0);

  // RK4 on u = A^{1-phi} (ln A when phi = 1), for which du/dt = (1-phi) gamma
  // L^lambda does not depend on the state. Explosive growth in A then costs
  // no accuracy, and each step reduces to Simpson's rule on the labor term.
  const double e = 1.0 - params.phi;
  const bool log_state = e == 0.0;
  const double scale = (log_state ? 1.0 : e) * params.gamma;
  const double lam = params.lambda;
  const double a0 = std::max(A0, A_floor_);
  const double u_floor = log_state ? std::log(a0) : std::pow(a0, e);
  auto to_A = [&](double u) {
    if (log_state) return std::exp(u);
    return u > 0.0 ? std::pow(u, 1.0 / e) : std::numeric_limits<double>::infinity();
  };

  double u = u_floor;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const auto& s = steps_[i];
    const double k1 = scale * std::exp(lam * s.log_l0);
    const double k2 = scale * std::exp(lam * s.log_lmid);
    const double k4 = scale * std::exp(lam * s.log_l1);
    u += s.h / 6.0 * (k1 + 4.0 * k2 + k4);
    // A >= A0: u grows with A for phi < 1 and shrinks with it for phi > 1.
    u = e >= 0.0 ? std::max(u, u_floor) : std::min(u, u_floor);
    if (!std::isfinite(u)) return i;
    if (s.emit) {
      const double a = to_A(u);
      if (!std::isfinite(a)) return i;
      out.push_back(std::max(a, A0));
    }
  }
  return steps_.size();
}

bool GrowthIntegrator::sample(const GrowthParams& params, double A0,
                              std::vector<double>& out) const {
  return integrate(params, A0, out) == steps_.size();
}

GrowthPath GrowthIntegrator::run(const GrowthParams& params, double A0) const {
  GrowthPath path;
  const auto failed = integrate(params, A0, path.A_hat);
  if (failed != steps_.size()) {
    throw DomainError("non-finite growth state at integration step " + std::to_string(failed) +
                      " (" + describe(params) + ")");
  }
  path.months = sample_times_;
  path.L_hat = sample_labor_;
  return path;
}

GrowthPath integrate_A(const GrowthParams& params, const LaborDriver& labor, double horizon,
                       double A0, IntegrationOptions options) {
  if (!(A0 >= 1.0)) throw DomainError("initial cumulative lines must be >= 1");
  return GrowthIntegrator(labor, horizon, options).run(params, A0);
}

LaborDriver labor_driver(const BassParams& bass, const MonthlySeries& series) {
  if (bass.valid) {
    return [bass](double t) { return predict_rate(bass, std::max(t, 0.0)); };
  }
  std::vector<double> observed(series.developers.begin(), series.developers.end());
  if (observed.empty()) throw FitError("no observed engagement to drive growth");
  return [observed = std::move(observed)](double t) {
    const auto last = static_cast<double>(observed.size() - 1);
    const auto idx = static_cast<std::size_t>(std::clamp(std::floor(t), 0.0, last));
    return observed[idx];
  };
}

namespace {

double initial_lines(const MonthlySeries& series) {
  return std::max(static_cast<double>(series.cum_lines.front()), 1.0);
}

IntegrationOptions observed_grid(IntegrationOptions o) {
  o.t_begin = 1.0;
  o.sample_every = 1.0;
  return o;
}

double mse(const std::vector<double>& model, const MonthlySeries& series) {
  double sum = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double d = model[k] - static_cast<double>(series.cum_lines[k]);
    sum += d * d;
  }
  return sum / static_cast<double>(series.size());
}

}  // namespace

double growth_objective(const MonthlySeries& series, const BassParams& bass,
                        const GrowthParams& params, const IntegrationOptions& integration) {
  if (series.empty()) throw FitError("empty series");
  const GrowthIntegrator integrator(labor_driver(bass, series),
                                    static_cast<double>(series.size() - 1),
                                    observed_grid(integration));
  std::vector<double> model;
  if (!integrator.sample(params, initial_lines(series), model)) {
    return std::numeric_limits<double>::infinity();
  }
  return mse(model, series);
}

std::vector<SeedPoint> calibration_seeds() {
  std::vector<SeedPoint> seeds;
  for (double lambda : {-0.5, 0.5, 1.5}) {
    for (double phi : {-0.5, 0.3}) seeds.push_back({lambda, phi});
  }
  seeds.push_back({1.0, 0.0});
  seeds.push_back({0.0, 0.0});
  return seeds;
}

CalibrationResult calibrate_growth(const MonthlySeries& series, const BassParams& bass,
                                   const CalibrationOptions& options) {
  if (series.size() < kMinGrowthMonths) {
    throw FitError("growth calibration needs at least " + std::to_string(kMinGrowthMonths) +
                   " months, got " + std::to_string(series.size()));
  }
  const auto driver = labor_driver(bass, series);
  const GrowthIntegrator integrator(driver, static_cast<double>(series.size() - 1),
                                    observed_grid(options.integration));
  const double A0 = initial_lines(series);
  const auto& b = options.bounds;
  const std::vector<double> lower{b.log_gamma_lo, b.lambda_lo, b.phi_lo};
  const std::vector<double> upper{b.log_gamma_hi, b.lambda_hi, b.phi_hi};

  auto to_params = [&](std::span<const double> x) {
    GrowthParams p;
    p.gamma = std::exp(x[0]);
    p.lambda = x[1];
    p.phi = x[2];
    p.A0 = A0;
    return p;
  };

  std::vector<double> scratch;
  const std::function<double(std::span<const double>)> objective =
      [&](std::span<const double> x) {
        if (!integrator.sample(to_params(x), A0, scratch)) {
          return std::numeric_limits<double>::infinity();
        }
        return mse(scratch, series);
      };

  double first_rate = static_cast<double>(series.lines_changed.front());
  if (!(first_rate > 0.0)) {
    first_rate = std::max(1.0, static_cast<double>(series.cum_lines.back()) /
                                   static_cast<double>(series.size()));
  }
  const double log_l1 = std::log(std::max(driver(1.0), options.integration.labor_floor));

  CalibrationResult best;
  best.objective = std::numeric_limits<double>::infinity();
  best.used_observed_labor = !bass.valid;
  const auto seeds = calibration_seeds();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& s = seeds[i];
    // gamma such that the initial model rate matches the first month's lines.
    double log_gamma = std::log(first_rate) - s.lambda * log_l1 - s.phi * std::log(A0);
    log_gamma = std::clamp(log_gamma, b.log_gamma_lo, b.log_gamma_hi);
    const std::vector<double> start{log_gamma, s.lambda, std::min(s.phi, b.phi_hi)};

    const auto r = minimize_bounded(objective, start, lower, upper, options.simplex);
    best.evaluations += r.evaluations;
    for (double v : r.best_history) {
      const double prev = best.best_history.empty() ? std::numeric_limits<double>::infinity()
                                                    : best.best_history.back();
      best.best_history.push_back(std::min(prev, v));
    }
    if (r.value < best.objective) {
      best.objective = r.value;
      best.params = to_params(r.x);
      best.best_start = i;
    }
  }
  if (!std::isfinite(best.objective)) {
    throw FitError("growth calibration failed: no start produced a finite objective");
  }
  return best;
}

GrowthPath fitted_path(const MonthlySeries& series, const BassParams& bass,
                       const GrowthParams& params, double t_end,
                       const IntegrationOptions& integration) {
  if (series.empty()) throw FitError("empty series");
  auto o = integration;
  o.t_begin = 1.0;
  return integrate_A(params, labor_driver(bass, series), std::max(t_end - 1.0, 0.0),
                     initial_lines(series), o);
}

}  // namespace osslc

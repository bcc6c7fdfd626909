#pragma once

#include <functional>
#include <span>
#include <vector>

namespace osslc {

struct SimplexOptions {
  int max_evaluations = 4000;
  // Stop when the spread of objective values across the simplex falls below
  // ftol_abs + ftol_rel * |f_best| and the simplex diameter below xtol.
  double ftol_rel = 1e-10;
  double ftol_abs = 1e-12;
  double xtol = 1e-8;
  // Per-coordinate size of the initial simplex, as a fraction of the box
  // width.
  double initial_step = 0.05;
  // Rebuild the simplex around the best point after convergence, up to this
  // many times, to escape premature collapse.
  int restarts = 2;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  int iterations = 0;
  // Best objective after each iteration; never increases.
  std::vector<double> best_history;
};

// Nelder-Mead simplex search restricted to the box [lower, upper]. Trial
// points are projected onto the box. Non-finite objective values are treated
// as +infinity.
SimplexResult minimize_bounded(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> start, std::span<const double> lower,
    std::span<const double> upper, const SimplexOptions& options = {});

}  // namespace osslc

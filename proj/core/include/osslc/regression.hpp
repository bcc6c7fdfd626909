#pragma once

#include <array>
#include <span>

namespace osslc {

struct QuadraticFit {
  // y = c0 + c1 x + c2 x^2
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double r_squared = 0.0;
};

// Least squares fit of a quadratic in x. The regressor is centred and scaled
// before squaring so that the normal equations stay well conditioned when x
// spans several orders of magnitude. Throws FitError when x takes fewer than
// three distinct values.
QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y);

// Solves the symmetric positive definite 3x3 system a * v = b.
std::array<double, 3> solve_spd3(const std::array<std::array<double, 3>, 3>& a,
                                 const std::array<double, 3>& b);

}  // namespace osslc

#include "osslc/regression.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "osslc/error.hpp"

namespace osslc {

std::array<double, 3> solve_spd3(const std::array<std::array<double, 3>, 3>& a,
                                 const std::array<double, 3>& b) {
  // Cholesky a = l l^T.
  std::array<std::array<double, 3>, 3> l{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = a[i][j];
      for (int k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
      if (i == j) {
        if (!(sum > 1e-12 * std::max(1.0, std::abs(a[i][i])))) {
          throw FitError("normal equations are singular");
        }
        l[i][i] = std::sqrt(sum);
      } else {
        l[i][j] = sum / l[j][j];
      }
    }
  }
  std::array<double, 3> y{};
  for (int i = 0; i < 3; ++i) {
    double sum = b[i];
    for (int k = 0; k < i; ++k) sum -= l[i][k] * y[k];
    y[i] = sum / l[i][i];
  }
  std::array<double, 3> v{};
  for (int i = 2; i >= 0; --i) {
    double sum = y[i];
    for (int k = i + 1; k < 3; ++k) sum -= l[k][i] * v[k];
    v[i] = sum / l[i][i];
  }
  return v;
}

QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw FitError("regressor and response differ in length");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const auto distinct = std::unique(sorted.begin(), sorted.end()) - sorted.begin();
  if (distinct < 3) {
    throw FitError("degenerate regression: regressor takes fewer than 3 distinct values");
  }

  const double n = static_cast<double>(x.size());
  double centre = 0.0;
  for (double v : x) centre += v;
  centre /= n;
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v - centre));

  std::array<std::array<double, 3>, 3> ata{};
  std::array<double, 3> aty{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = (x[i] - centre) / scale;
    const std::array<double, 3> row{1.0, z, z * z};
    for (int r = 0; r < 3; ++r) {
      aty[r] += row[r] * y[i];
      for (int c = 0; c < 3; ++c) ata[r][c] += row[r] * row[c];
    }
  }
  const auto a = solve_spd3(ata, aty);

  // Undo z = (x - centre) / scale.
  QuadraticFit fit;
  fit.c2 = a[2] / (scale * scale);
  fit.c1 = a[1] / scale - 2.0 * a[2] * centre / (scale * scale);
  fit.c0 = a[0] - a[1] * centre / scale + a[2] * centre * centre / (scale * scale);

  double mean_y = 0.0;
  for (double v : y) mean_y += v;
  mean_y /= n;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = (x[i] - centre) / scale;
    const double pred = a[0] + a[1] * z + a[2] * z * z;
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
  }
  fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return fit;
}

}  // namespace osslc

#include "osslc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "osslc/error.hpp"

namespace osslc {
namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

using Point = std::vector<double>;

class BoxedSearch {
 public:
  BoxedSearch(const std::function<double(std::span<const double>)>& objective,
              std::span<const double> lower, std::span<const double> upper,
              const SimplexOptions& options, SimplexResult& result)
      : objective_(objective),
        lower_(lower.begin(), lower.end()),
        upper_(upper.begin(), upper.end()),
        options_(options),
        result_(result) {}

  // One Nelder-Mead run from `start`. Returns true when it converged before
  // the evaluation budget ran out.
  bool run(const Point& start) {
    const std::size_t n = start.size();
    std::vector<Point> x(n + 1, start);
    std::vector<double> fx(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double width = upper_[i] - lower_[i];
      const double step = options_.initial_step * (width > 0.0 ? width : 1.0);
      x[i + 1][i] = start[i] + step <= upper_[i] ? start[i] + step : start[i] - step;
      project(x[i + 1]);
    }
    for (std::size_t i = 0; i <= n; ++i) fx[i] = eval(x[i]);

    std::vector<std::size_t> order(n + 1);
    Point centroid(n), trial(n), trial2(n);
    while (result_.evaluations < options_.max_evaluations) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fx[a] < fx[b]; });
      const auto best = order.front();
      const auto worst = order.back();
      const auto second = order[n - 1];
      record(x[best], fx[best]);

      if (converged(x, fx, best, worst)) return true;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == worst) continue;
        for (std::size_t d = 0; d < n; ++d) centroid[d] += x[i][d] / static_cast<double>(n);
      }

      along(centroid, x[worst], -kReflect, trial);
      const double fr = eval(trial);
      if (fr < fx[best]) {
        along(centroid, trial, kExpand, trial2);
        const double fe = eval(trial2);
        if (fe < fr) {
          x[worst] = trial2;
          fx[worst] = fe;
        } else {
          x[worst] = trial;
          fx[worst] = fr;
        }
      } else if (fr < fx[second]) {
        x[worst] = trial;
        fx[worst] = fr;
      } else {
        const bool outside = fr < fx[worst];
        along(centroid, outside ? trial : x[worst], kContract, trial2);
        const double fc = eval(trial2);
        if (fc < (outside ? fr : fx[worst])) {
          x[worst] = trial2;
          fx[worst] = fc;
        } else {
          for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t d = 0; d < n; ++d) {
              x[i][d] = x[best][d] + kShrink * (x[i][d] - x[best][d]);
            }
            project(x[i]);
            fx[i] = eval(x[i]);
          }
        }
      }
      ++result_.iterations;
    }
    return false;
  }

 private:
  double eval(const Point& p) {
    ++result_.evaluations;
    const double v = objective_(p);
    const double f = std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    if (f < result_.value) {
      result_.value = f;
      result_.x = p;
    }
    return f;
  }

  void record(const Point&, double) { result_.best_history.push_back(result_.value); }

  void project(Point& p) const {
    for (std::size_t d = 0; d < p.size(); ++d) p[d] = std::clamp(p[d], lower_[d], upper_[d]);
  }

  // out = c + t (p - c), projected.
  void along(const Point& c, const Point& p, double t, Point& out) const {
    for (std::size_t d = 0; d < c.size(); ++d) out[d] = c[d] + t * (p[d] - c[d]);
    project(out);
  }

  bool converged(const std::vector<Point>& x, const std::vector<double>& fx,
                 std::size_t best, std::size_t worst) const {
    if (!std::isfinite(fx[worst])) return false;
    const double spread = fx[worst] - fx[best];
    if (spread > options_.ftol_abs + options_.ftol_rel * std::abs(fx[best])) return false;
    double diameter = 0.0;
    for (const auto& v : x) {
      for (std::size_t d = 0; d < v.size(); ++d) {
        diameter = std::max(diameter, std::abs(v[d] - x[best][d]));
      }
    }
    return diameter <= options_.xtol || spread == 0.0;
  }

  const std::function<double(std::span<const double>)>& objective_;
  Point lower_;
  Point upper_;
  const SimplexOptions& options_;
  SimplexResult& result_;
};

}  // namespace

SimplexResult minimize_bounded(const std::function<double(std::span<const double>)>& objective,
                               std::span<const double> start, std::span<const double> lower,
                               std::span<const double> upper, const SimplexOptions& options) {
  if (start.empty() || start.size() != lower.size() || start.size() != upper.size()) {
    throw Error(ErrorKind::usage, "simplex search: dimension mismatch");
  }
  for (std::size_t d = 0; d < start.size(); ++d) {
    if (!(lower[d] <= upper[d])) throw Error(ErrorKind::usage, "simplex search: empty box");
  }

  SimplexResult result;
  result.value = std::numeric_limits<double>::infinity();
  Point x0(start.begin(), start.end());
  for (std::size_t d = 0; d < x0.size(); ++d) x0[d] = std::clamp(x0[d], lower[d], upper[d]);
  result.x = x0;

  BoxedSearch search(objective, lower, upper, options, result);
  bool done = search.run(x0);
  for (int r = 0; r < options.restarts && done; ++r) {
    const double before = result.value;
    done = search.run(result.x);
    if (!(result.value < before - options.ftol_abs - options.ftol_rel * std::abs(before))) break;
  }
  return result;
}

}  // namespace osslc

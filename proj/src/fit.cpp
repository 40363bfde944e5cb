#include "cqnls/fit.hpp"

#include <algorithm>
#include <cmath>

#include "cqnls/errors.hpp"

namespace cqnls {

PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvalidArgument("power-law fit needs equally many x and y values");
  if (xs.size() < 3) throw InvalidArgument("power-law fit needs at least 3 points");
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw InvalidArgument("power-law fit needs strictly positive data");
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(xs[i]) - mx, dy = std::log(ys[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw InvalidArgument("power-law fit needs at least two distinct x values");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::log(ys[i]) - (intercept + slope * std::log(xs[i]));
    sse += r * r;
  }
  // A constant series is fit exactly by a zero slope.
  const double r2 = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return {slope, std::exp(intercept), r2};
}

}  // namespace cqnls

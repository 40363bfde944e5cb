#pragma once

#include <span>

namespace cqnls {

/// y ~ prefactor * x^exponent fitted by least squares in log-log space.
struct PowerLawFit {
  double exponent;
  double prefactor;
  double r_squared;
};

PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys);

}  // namespace cqnls

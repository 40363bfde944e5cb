#include "cqnls/radial.hpp"

#include <cmath>
#include <numbers>

namespace cqnls {

RadialGrid::RadialGrid(double r_max, int intervals) : r_max_(r_max), spacing_(0.0) {
  if (!(r_max > 0.0)) throw InvalidArgument("radial grid needs r_max > 0");
  if (intervals < 4 || intervals % 2 != 0) throw InvalidArgument("radial grid needs an even interval count >= 4");
  spacing_ = r_max / intervals;
  nodes_.resize(intervals + 1);
  weights_.resize(intervals + 1);
  for (int i = 0; i <= intervals; ++i) {
    nodes_[i] = (i == intervals) ? r_max : i * spacing_;
    const double simpson = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    weights_[i] = 2.0 * std::numbers::pi * nodes_[i] * simpson * spacing_ / 3.0;
  }
}

double RadialGrid::integrate(std::span<const double> samples) const {
  if (samples.size() != weights_.size()) throw GridMismatch("radial sample count does not match grid");
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) sum += weights_[i] * samples[i];
  return sum;
}

RadialProfile::RadialProfile(RadialGrid grid, std::vector<double> values, bool even)
    : grid_(std::move(grid)), values_(std::move(values)), even_(even) {
  const int n = grid_.n_points();
  if (static_cast<int>(values_.size()) != n) throw GridMismatch("profile sample count does not match grid");
  const double h = grid_.spacing();
  const auto& f = values_;
  slopes_.assign(n, 0.0);
  auto at = [&](int i) { return even_ && i < 0 ? f[-i] : f[i]; };
  for (int i = 0; i < n; ++i) {
    if (i + 2 < n && (i >= 2 || even_)) {
      slopes_[i] = (at(i - 2) - 8.0 * at(i - 1) + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    } else if (i == 0) {
      slopes_[i] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    } else if (i == 1) {
      slopes_[i] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    } else if (i == n - 2) {
      slopes_[i] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / (12.0 * h);
    } else {
      slopes_[i] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / (12.0 * h);
    }
  }
  if (even_) slopes_[0] = 0.0;
}

double RadialProfile::operator()(double r) const {
  if (r < 0.0) r = -r;
  if (r > grid_.r_max()) return 0.0;
  const double h = grid_.spacing();
  const int last = grid_.n_points() - 1;
  int i = static_cast<int>(r / h);
  if (i >= last) i = last - 1;
  const double t = (r - i * h) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * values_[i] + h10 * h * slopes_[i] + h01 * values_[i + 1] + h11 * h * slopes_[i + 1];
}

RadialProfile RadialProfile::scaled(double factor) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return RadialProfile(grid_, std::move(v), even_);
}

Field2D embed_scaled(const RadialProfile& p, const CartesianGrid2D& grid, double scale, double center_x,
                     double center_y) {
  if (!(scale > 0.0)) throw InvalidArgument("embedding scale must be positive");
  const double inv = 1.0 / scale;
  return Field2D::from_function(grid, [&](double x, double y) {
    return inv * p(std::hypot(x - center_x, y - center_y) * inv);
  });
}

Field2D radial_to_field(const RadialProfile& p, const CartesianGrid2D& grid, double center_x, double center_y) {
  if (p.grid().r_max() < grid.half_width() * std::numbers::sqrt2) {
    throw InvalidArgument("profile r_max must cover the box diagonal");
  }
  return Field2D::from_function(grid, [&](double x, double y) {
    return p(std::hypot(x - center_x, y - center_y));
  });
}

}  // namespace cqnls

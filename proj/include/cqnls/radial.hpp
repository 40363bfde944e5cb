#pragma once

#include <span>
#include <vector>

#include "cqnls/grid.hpp"

namespace cqnls {

/// Uniform grid on [0, r_max] with Simpson weights for the disk measure 2 pi r dr.
/// The weight at the origin node is zero because the measure vanishes there.
class RadialGrid {
 public:
  /// `intervals` must be even.
  RadialGrid(double r_max, int intervals);

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  double r_max() const { return r_max_; }
  double spacing() const { return spacing_; }
  int n_points() const { return static_cast<int>(nodes_.size()); }

  /// Sum of weight_i * f_i over the nodes.
  double integrate(std::span<const double> samples) const;

 private:
  double r_max_;
  double spacing_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Radial samples with fourth-order slopes derived from the samples alone, so a profile
/// is fully determined by its values. Even profiles use a mirrored stencil at r = 0.
class RadialProfile {
 public:
  RadialProfile(RadialGrid grid, std::vector<double> values, bool even);

  const RadialGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> slopes() const { return slopes_; }
  bool even() const { return even_; }
  double derivative_at_zero() const { return slopes_.front(); }

  /// Cubic Hermite interpolation; zero beyond r_max.
  double operator()(double r) const;

  RadialProfile scaled(double factor) const;

 private:
  RadialGrid grid_;
  std::vector<double> values_;
  std::vector<double> slopes_;
  bool even_;
};

/// Samples p(|x - center|). Requires p.r_max >= L * sqrt(2).
Field2D radial_to_field(const RadialProfile& p, const CartesianGrid2D& grid, double center_x = 0.0,
                        double center_y = 0.0);

/// Samples the L2-preserving dilation x -> p(|x - center| / scale) / scale.
Field2D embed_scaled(const RadialProfile& p, const CartesianGrid2D& grid, double scale,
                     double center_x = 0.0, double center_y = 0.0);

}  // namespace cqnls

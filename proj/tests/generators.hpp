#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cqnls/grid.hpp"
#include "cqnls/spectral.hpp"

namespace cqnls::testing {

/// Deterministic source of random test inputs; each property test owns one with a fixed seed.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  /// Sum of 1..4 Gaussian bumps with widths in [0.6, 1.6] centered within `spread` of the origin.
  /// Tails reach 1e-12 within spread + 12, so boxes with L >= spread + 12 see no wrap-around.
  Field2D bumps(const CartesianGrid2D& grid, double spread = 1.0, bool positive = true) {
    struct Bump {
      double x, y, w, amp;
    };
    const int count = integer(1, 4);
    Bump b[4];
    for (int i = 0; i < count; ++i) {
      b[i] = {uniform(-spread, spread), uniform(-spread, spread), uniform(0.6, 1.6),
              positive ? uniform(0.2, 1.0) : uniform(-1.0, 1.0)};
    }
    if (positive || b[0].amp == 0.0) b[0].amp = uniform(0.5, 1.0);
    return Field2D::from_function(grid, [&](double x, double y) {
      double v = 0.0;
      for (int i = 0; i < count; ++i) {
        const double dx = x - b[i].x, dy = y - b[i].y;
        v += b[i].amp * std::exp(-0.5 * (dx * dx + dy * dy) / (b[i].w * b[i].w));
      }
      return v;
    });
  }

  Field2D normalized_bumps(const CartesianGrid2D& grid, double spread = 1.0, bool positive = true) {
    return normalized(bumps(grid, spread, positive));
  }

  /// Independent uniform noise in [-1, 1] at every node; not smooth.
  Field2D noise(const CartesianGrid2D& grid) {
    Field2D f(grid);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = uniform(-1.0, 1.0);
    return f;
  }

 private:
  std::mt19937_64 rng_;
};

/// exp(-|x|^2 / (2 w^2)) centered at (cx, cy).
inline Field2D gaussian_field(const CartesianGrid2D& grid, double w, double cx = 0.0, double cy = 0.0) {
  return Field2D::from_function(grid, [=](double x, double y) {
    return std::exp(-0.5 * ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (w * w));
  });
}

}  // namespace cqnls::testing

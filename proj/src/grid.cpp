#include "cqnls/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace cqnls {

void* fftw_aligned_alloc(std::size_t bytes) { return fftw_malloc(bytes); }
void fftw_aligned_free(void* p) noexcept { fftw_free(p); }

CartesianGrid2D::CartesianGrid2D(double half_width, int points_per_side)
    : half_width_(half_width), points_(points_per_side), spacing_(0.0) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw InvalidArgument("grid half width must be positive and finite");
  }
  if (points_per_side < 16 || (points_per_side & (points_per_side - 1)) != 0) {
    throw InvalidArgument("points per side must be a power of two >= 16, got " +
                          std::to_string(points_per_side));
  }
  spacing_ = 2.0 * half_width / points_per_side;
}

double CartesianGrid2D::max_wavenumber() const { return std::numbers::pi / spacing_; }

Field2D::Field2D(const CartesianGrid2D& grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field2D::Field2D(const CartesianGrid2D& grid, AlignedVector values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw InvalidArgument("field sample count does not match grid size");
  }
}

bool Field2D::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field2D::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Field2D& Field2D::operator+=(const Field2D& other) {
  require_same_grid(*this, other, "field addition");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

Field2D& Field2D::operator-=(const Field2D& other) {
  require_same_grid(*this, other, "field subtraction");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

Field2D& Field2D::operator*=(double factor) {
  for (double& v : values_) v *= factor;
  return *this;
}

Field2D& Field2D::add_scaled(double factor, const Field2D& other) {
  require_same_grid(*this, other, "scaled addition");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += factor * other.values_[k];
  return *this;
}

Field2D operator+(Field2D lhs, const Field2D& rhs) { return lhs += rhs; }
Field2D operator-(Field2D lhs, const Field2D& rhs) { return lhs -= rhs; }
Field2D operator*(double factor, Field2D f) { return f *= factor; }

void require_same_grid(const Field2D& a, const Field2D& b, const char* what) {
  if (!(a.grid() == b.grid())) {
    throw GridMismatch(std::string(what) + ": fields live on different grids");
  }
}

}  // namespace cqnls

#pragma once

#include <cmath>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

#include "cqnls/errors.hpp"

namespace cqnls {

/// Allocator backed by fftw_malloc so every field buffer has FFTW's SIMD alignment
/// and can be handed to plans through the new-array execute interface.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() noexcept = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}
  T* allocate(std::size_t n);
  void deallocate(T* p, std::size_t) noexcept;
  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

void* fftw_aligned_alloc(std::size_t bytes);
void fftw_aligned_free(void* p) noexcept;

template <class T>
T* FftwAllocator<T>::allocate(std::size_t n) {
  void* p = fftw_aligned_alloc(n * sizeof(T));
  if (!p) throw std::bad_alloc();
  return static_cast<T*>(p);
}

template <class T>
void FftwAllocator<T>::deallocate(T* p, std::size_t) noexcept {
  fftw_aligned_free(p);
}

using AlignedVector = std::vector<double, FftwAllocator<double>>;

/// Neumaier-compensated accumulator; grid sums stay accurate to a few ulps of the total.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Uniform periodic grid on the box [-L, L)^2 with M points per side.
/// Node i sits at x_i = -L + i h, so the origin is node M/2.
class CartesianGrid2D {
 public:
  CartesianGrid2D(double half_width, int points_per_side);

  double half_width() const { return half_width_; }
  int points() const { return points_; }
  double spacing() const { return spacing_; }
  double cell_area() const { return spacing_ * spacing_; }
  std::size_t size() const { return static_cast<std::size_t>(points_) * points_; }
  double coord(int i) const { return -half_width_ + i * spacing_; }
  /// Largest resolved wave number, pi / h.
  double max_wavenumber() const;

  bool operator==(const CartesianGrid2D&) const = default;

 private:
  double half_width_;
  int points_;
  double spacing_;
};

/// Real scalar field sampled on a CartesianGrid2D, row-major with the x index outermost.
class Field2D {
 public:
  explicit Field2D(const CartesianGrid2D& grid);
  Field2D(const CartesianGrid2D& grid, AlignedVector values);

  template <class F>
  static Field2D from_function(const CartesianGrid2D& grid, F&& fn) {
    Field2D out(grid);
    const int m = grid.points();
    for (int i = 0; i < m; ++i) {
      const double x = grid.coord(i);
      for (int j = 0; j < m; ++j) out(i, j) = fn(x, grid.coord(j));
    }
    return out;
  }

  const CartesianGrid2D& grid() const { return grid_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[static_cast<std::size_t>(i) * grid_.points() + j]; }
  double operator()(int i, int j) const { return values_[static_cast<std::size_t>(i) * grid_.points() + j]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  bool all_finite() const;
  double max_abs() const;

  Field2D& operator+=(const Field2D& other);
  Field2D& operator-=(const Field2D& other);
  Field2D& operator*=(double factor);
  /// this += factor * other
  Field2D& add_scaled(double factor, const Field2D& other);

 private:
  CartesianGrid2D grid_;
  AlignedVector values_;
};

Field2D operator+(Field2D lhs, const Field2D& rhs);
Field2D operator-(Field2D lhs, const Field2D& rhs);
Field2D operator*(double factor, Field2D f);

void require_same_grid(const Field2D& a, const Field2D& b, const char* what);

}  // namespace cqnls

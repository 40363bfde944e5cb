#include "cqnls/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace cqnls {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(p));
}

double power_abs(double v, double p) {
  const double a = std::abs(v);
  if (p == 2.0) return a * a;
  if (p == 4.0) return a * a * a * a;
  if (p == 6.0) return a * a * a * a * a * a;
  return std::pow(a, p);
}

}  // namespace

FftPlans::FftPlans(int m) : m_(m) {
  const std::size_t n = static_cast<std::size_t>(m) * m;
  AlignedVector real(n);
  ComplexVector spec(n);
  ComplexVector spec2(n);
  r2c_ = fftw_plan_dft_r2c_2d(m, m, real.data(), as_fftw(spec.data()), FFTW_ESTIMATE);
  c2r_ = fftw_plan_dft_c2r_2d(m, m, as_fftw(spec.data()), real.data(), FFTW_ESTIMATE);
  c2c_forward_ = fftw_plan_dft_2d(m, m, as_fftw(spec.data()), as_fftw(spec2.data()), FFTW_FORWARD,
                                  FFTW_ESTIMATE);
  c2c_backward_ = fftw_plan_dft_2d(m, m, as_fftw(spec.data()), as_fftw(spec2.data()), FFTW_BACKWARD,
                                   FFTW_ESTIMATE);
  if (!r2c_ || !c2r_ || !c2c_forward_ || !c2c_backward_) throw Error("FFTW planning failed");
}

FftPlans::~FftPlans() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(r2c_));
  fftw_destroy_plan(static_cast<fftw_plan>(c2r_));
  fftw_destroy_plan(static_cast<fftw_plan>(c2c_forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(c2c_backward_));
}

const FftPlans& FftPlans::get(int m) {
  static std::map<int, std::unique_ptr<FftPlans>> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(m);
  if (it == cache.end()) {
    it = cache.emplace(m, std::unique_ptr<FftPlans>(new FftPlans(m))).first;
  }
  return *it->second;
}

void FftPlans::forward(const double* in, std::complex<double>* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(r2c_), const_cast<double*>(in), as_fftw(out));
}

void FftPlans::inverse(std::complex<double>* in, double* out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(c2r_), as_fftw(in), out);
}

void FftPlans::forward_complex(const std::complex<double>* in, std::complex<double>* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(c2c_forward_), as_fftw(in), as_fftw(out));
}

void FftPlans::inverse_complex(const std::complex<double>* in, std::complex<double>* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(c2c_backward_), as_fftw(in), as_fftw(out));
}

ComplexVector forward_fft(const Field2D& f) {
  const auto& plans = FftPlans::get(f.grid().points());
  ComplexVector out(plans.half_size());
  plans.forward(f.data(), out.data());
  return out;
}

Field2D inverse_fft(const CartesianGrid2D& grid, ComplexVector spectrum) {
  const auto& plans = FftPlans::get(grid.points());
  if (spectrum.size() != plans.half_size()) throw GridMismatch("spectrum size does not match grid");
  Field2D out(grid);
  plans.inverse(spectrum.data(), out.data());
  out *= 1.0 / static_cast<double>(grid.size());
  return out;
}

double integrate2d(const Field2D& f) {
  CompensatedSum sum;
  for (double v : f.values()) sum.add(v);
  return sum.value() * f.grid().cell_area();
}

double inner(const Field2D& f, const Field2D& g) {
  require_same_grid(f, g, "inner product");
  CompensatedSum sum;
  for (std::size_t k = 0; k < f.size(); ++k) sum.add(f[k] * g[k]);
  return sum.value() * f.grid().cell_area();
}

double lp_norm(const Field2D& f, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("lp_norm requires p >= 1");
  CompensatedSum sum;
  for (double v : f.values()) sum.add(power_abs(v, p));
  return std::pow(sum.value() * f.grid().cell_area(), 1.0 / p);
}

void normalize(Field2D& f) {
  const double n = lp_norm(f, 2.0);
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("cannot normalize a zero or non-finite field");
  f *= 1.0 / n;
  // A second pass removes the rounding left by the first division.
  f *= 1.0 / lp_norm(f, 2.0);
}

Field2D normalized(Field2D f) {
  normalize(f);
  return f;
}

namespace {

/// Calls fn(index, |k|^2, parseval_weight) over the half spectrum.
template <class Fn>
void for_each_mode(const CartesianGrid2D& grid, Fn&& fn) {
  const int m = grid.points();
  const int half = m / 2 + 1;
  const double dk = std::numbers::pi / grid.half_width();
  for (int i = 0; i < m; ++i) {
    const double kx = dk * signed_frequency(i, m);
    for (int j = 0; j < half; ++j) {
      const double ky = dk * j;
      const double weight = (j == 0 || j == m / 2) ? 1.0 : 2.0;
      fn(static_cast<std::size_t>(i) * half + j, kx * kx + ky * ky, weight);
    }
  }
}

}  // namespace

double grad_norm_sq(const Field2D& f) {
  const ComplexVector spec = forward_fft(f);
  CompensatedSum sum;
  for_each_mode(f.grid(), [&](std::size_t idx, double k2, double w) { sum.add(w * k2 * std::norm(spec[idx])); });
  const double n = static_cast<double>(f.size());
  return sum.value() * f.grid().cell_area() / n;
}

Field2D apply_multiplier(const Field2D& f, const std::function<double(double)>& multiplier) {
  ComplexVector spec = forward_fft(f);
  for_each_mode(f.grid(), [&](std::size_t idx, double k2, double) { spec[idx] *= multiplier(k2); });
  return inverse_fft(f.grid(), std::move(spec));
}

Field2D neg_laplacian(const Field2D& f) {
  return apply_multiplier(f, [](double k2) { return k2; });
}

Field2D fft_convolve(const Field2D& f, const Field2D& kernel) {
  require_same_grid(f, kernel, "fft_convolve");
  const CartesianGrid2D& grid = f.grid();
  const int m = grid.points();
  Field2D shifted(grid);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) shifted(i, j) = kernel((i + m / 2) % m, (j + m / 2) % m);
  }
  ComplexVector a = forward_fft(f);
  const ComplexVector b = forward_fft(shifted);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] *= b[k];
  Field2D out = inverse_fft(grid, std::move(a));
  out *= grid.cell_area();
  return out;
}

Field2D spectral_shift(const Field2D& f, double shift_x, double shift_y) {
  ComplexVector spec = forward_fft(f);
  const CartesianGrid2D& grid = f.grid();
  const int m = grid.points();
  const int half = m / 2 + 1;
  const double dk = std::numbers::pi / grid.half_width();
  for (int i = 0; i < m; ++i) {
    // Nyquist modes cannot carry a phase in a real field, so their shift is dropped.
    const double kx = (2 * i == m) ? 0.0 : dk * signed_frequency(i, m);
    for (int j = 0; j < half; ++j) {
      const double ky = (2 * j == m) ? 0.0 : dk * j;
      spec[static_cast<std::size_t>(i) * half + j] *= std::polar(1.0, -(kx * shift_x + ky * shift_y));
    }
  }
  return inverse_fft(grid, std::move(spec));
}

std::pair<double, double> density_centroid(const Field2D& f) {
  const CartesianGrid2D& grid = f.grid();
  const int m = grid.points();
  double mass = 0.0, mx = 0.0, my = 0.0;
  for (int i = 0; i < m; ++i) {
    const double x = grid.coord(i);
    for (int j = 0; j < m; ++j) {
      const double rho = f(i, j) * f(i, j);
      mass += rho;
      mx += rho * x;
      my += rho * grid.coord(j);
    }
  }
  if (!(mass > 0.0)) return {0.0, 0.0};
  return {mx / mass, my / mass};
}

}  // namespace cqnls

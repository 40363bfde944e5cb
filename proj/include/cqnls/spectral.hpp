#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "cqnls/grid.hpp"

namespace cqnls {

using ComplexVector = std::vector<std::complex<double>, FftwAllocator<std::complex<double>>>;

/// Cached FFTW plans for one side length M. Transforms are unnormalized, matching FFTW.
/// All buffers must come from FftwAllocator so the cached plans' alignment assumptions hold.
class FftPlans {
 public:
  static const FftPlans& get(int m);

  int points() const { return m_; }
  /// Half-spectrum length M*(M/2+1) of the real transforms.
  std::size_t half_size() const { return static_cast<std::size_t>(m_) * (m_ / 2 + 1); }

  void forward(const double* in, std::complex<double>* out) const;
  /// Destroys `in`, as FFTW's multidimensional c2r transforms do.
  void inverse(std::complex<double>* in, double* out) const;
  void forward_complex(const std::complex<double>* in, std::complex<double>* out) const;
  void inverse_complex(const std::complex<double>* in, std::complex<double>* out) const;

  ~FftPlans();
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

 private:
  explicit FftPlans(int m);
  int m_;
  void* r2c_;
  void* c2r_;
  void* c2c_forward_;
  void* c2c_backward_;
};

/// Signed integer frequency of FFT index i on an M-point axis; the Nyquist index maps to +M/2.
inline int signed_frequency(int i, int m) { return i <= m / 2 ? i : i - m; }

ComplexVector forward_fft(const Field2D& f);
Field2D inverse_fft(const CartesianGrid2D& grid, ComplexVector spectrum);

double integrate2d(const Field2D& f);
double inner(const Field2D& f, const Field2D& g);
double lp_norm(const Field2D& f, double p);
/// Rescales f in place to unit L2 norm. Throws on the zero field.
void normalize(Field2D& f);
Field2D normalized(Field2D f);

double grad_norm_sq(const Field2D& f);
Field2D neg_laplacian(const Field2D& f);

/// Applies the Fourier multiplier m(|k|^2) to f.
Field2D apply_multiplier(const Field2D& f, const std::function<double(double)>& multiplier);

/// Periodic convolution h^2 * sum_j f(x_j) K(x - x_j), where K is sampled with its origin at node M/2.
Field2D fft_convolve(const Field2D& f, const Field2D& kernel);

/// f(x - shift) by band-limited interpolation.
Field2D spectral_shift(const Field2D& f, double shift_x, double shift_y);

/// Density-weighted centroid of |f|^2.
std::pair<double, double> density_centroid(const Field2D& f);

}  // namespace cqnls

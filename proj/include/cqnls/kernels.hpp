#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "cqnls/grid.hpp"

namespace cqnls {

/// A function of |x| on the plane.
using RadialFunction = std::function<double(double)>;

/// Even attractive two-body potential U >= 0 with unit mass, acting at scale N^alpha.
/// Construction validates the profile by radial quadrature on [0, support]; U is taken as zero beyond.
class TwoBodyKernel {
 public:
  TwoBodyKernel(RadialFunction profile, double alpha, double support, std::string name);

  /// exp(-r^2 / (2 width^2)) / (2 pi width^2).
  static TwoBodyKernel gaussian(double alpha, double width = 1.0);

  double operator()(double r) const { return r > support_ ? 0.0 : profile_(r); }
  double alpha() const { return alpha_; }
  double support() const { return support_; }
  double l1_norm() const { return l1_norm_; }
  /// Integral of |x| U(x).
  double first_moment() const { return first_moment_; }
  double sup_norm() const { return sup_norm_; }
  /// Full width at half maximum of the unscaled profile.
  double width() const { return width_; }
  const std::string& name() const { return name_; }
  /// N^alpha.
  double scale(double n) const;

 private:
  RadialFunction profile_;
  double alpha_;
  double support_;
  double l1_norm_ = 0.0;
  double first_moment_ = 0.0;
  double sup_norm_ = 0.0;
  double width_ = 0.0;
  std::string name_;
};

/// Three-body kernel W(u, v) = f(u) f(v) f(u - v) / Z for an even factor f >= 0, acting at scale N^beta.
/// Z is computed by quadrature so that W has unit integral.
class ThreeBodyKernel {
 public:
  ThreeBodyKernel(RadialFunction factor, double beta, double support, std::string name);

  /// f = exp(-r^2 / (2 width^2)), for which Z = 4 pi^2 width^4 / 3.
  static ThreeBodyKernel gaussian(double beta, double width = 1.0);

  double factor(double r) const { return r > support_ ? 0.0 : factor_(r); }
  double operator()(std::array<double, 2> u, std::array<double, 2> v) const;
  double beta() const { return beta_; }
  double support() const { return support_; }
  double normalization() const { return normalization_; }
  /// Full width at half maximum of the unscaled factor.
  double width() const { return width_; }
  const std::string& name() const { return name_; }
  /// N^beta.
  double scale(double n) const;

 private:
  RadialFunction factor_;
  double beta_;
  double support_;
  double normalization_ = 0.0;
  double width_ = 0.0;
  std::string name_;
};

struct KernelPair {
  TwoBodyKernel two_body;
  ThreeBodyKernel three_body;

  /// Gaussian U and Gaussian factor f of unit width.
  static KernelPair canonical(double alpha, double beta);
};

/// Kernel from a spec string: "gaussian", "gaussian:<width>" or "file:<path>" with rows "r value"
/// on a uniform grid starting at r = 0.
TwoBodyKernel two_body_from_spec(const std::string& spec, double alpha);
ThreeBodyKernel three_body_from_spec(const std::string& spec, double beta);

/// lambda^2 U(lambda |x|) centered at the origin node, rescaled to unit discrete mass.
/// Throws UnderResolved when width / lambda spans fewer than 4 cells or the discrete mass is off by more than 1e-6.
Field2D sample_two_body(const TwoBodyKernel& k, double lambda, const CartesianGrid2D& grid);
/// sample_two_body at lambda = N^alpha.
Field2D scaled_two_body(const TwoBodyKernel& k, double n, const CartesianGrid2D& grid);

/// Three-body kernel at scale mu sampled for periodic evaluation.
struct SampledThreeBody {
  /// f(mu |d h|) indexed by the periodic difference d; the origin is index (0, 0).
  Field2D factor;
  /// Real part of the DFT of `factor` over the r2c half spectrum.
  std::vector<double> spectrum;
  /// Discrete integral of f(mu u) f(mu v) f(mu (u - v)); dividing by it gives W exact unit mass on the grid.
  double normalization;
};

/// Throws UnderResolved under the width rule of sample_two_body, or when the discrete
/// normalization differs from Z / mu^4 by more than 1e-5 relative.
SampledThreeBody sample_three_body(const ThreeBodyKernel& k, double mu, const CartesianGrid2D& grid);

}  // namespace cqnls

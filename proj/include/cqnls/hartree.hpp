#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cqnls/fit.hpp"
#include "cqnls/kernels.hpp"
#include "cqnls/minimizer.hpp"
#include "cqnls/nls.hpp"

namespace cqnls {

/// Largest grid side for which three-body terms are evaluated unless the caller raises it.
inline constexpr int kDefaultThreeBodyPoints = 64;

/// int |grad v|^2 + c |x|^s v^2 - (a/2) int int U_N rho rho + (b/6) int int int W_N rho rho rho,
/// with U_N = lambda^2 U(lambda .), lambda = N^alpha ell, and W_N the analogue at mu = N^beta ell.
/// ell is the length unit of the coordinates; rescaled problems carry ell != 1.
struct HartreeParams {
  KernelPair kernels;
  double a = 0.0;
  double b = 0.0;
  double n = 3.0;
  double s = 2.0;
  Geometry mode = Geometry::Trapped;
  double trap_strength = 1.0;
  double length_scale = 1.0;

  void validate() const;
  double two_body_scale() const { return kernels.two_body.scale(n) * length_scale; }
  double three_body_scale() const { return kernels.three_body.scale(n) * length_scale; }
  /// The NLS functional with the same a, b, s, trap.
  NlsParams nls_limit() const;
  /// The same functional in coordinates x = ell * y for w(y) = ell v(ell y); energies scale by ell^2.
  HartreeParams rescaled(double ell) const;
};

/// int int U_N(x - y) rho(x) rho(y) for rho = v^2, by periodic FFT convolution.
double two_body_term(const Field2D& v, const TwoBodyKernel& k, double n);

struct ThreeBodyField {
  double value;
  /// inner(x) = int int W(x - y, x - z) rho(y) rho(z) dy dz, evaluated where rho(x) > 0.
  Field2D inner;
};

/// Factorized evaluation: for each x, g_x = rho f(mu (x - .)), inner(x) = <g_x, f_mu * g_x> / Z,
/// value = int rho inner. The quadratic form is summed in Fourier space, one transform per grid point.
/// Throws BudgetExceeded when the grid side exceeds `max_points`.
ThreeBodyField three_body_field(const Field2D& rho, const SampledThreeBody& kernel,
                                int max_points = kDefaultThreeBodyPoints);
double three_body_term(const Field2D& v, const ThreeBodyKernel& k, double n,
                       int max_points = kDefaultThreeBodyPoints);

/// Hartree energy on one grid with the kernels sampled once. Only the terms with nonzero
/// strength are sampled, so resolution guards apply to the terms in use.
class HartreeFunctional {
 public:
  HartreeFunctional(const HartreeParams& p, const CartesianGrid2D& grid, int max_points = kDefaultThreeBodyPoints);

  /// Energy and, when `gradient` is non-null, the L2 gradient
  /// 2(-Lap v) + 2 V v - 2a (U * rho) v + b inner v.
  Evaluation evaluate(const Field2D& v, Field2D* gradient) const;
  double energy(const Field2D& v) const { return evaluate(v, nullptr).energy; }
  double two_body(const Field2D& v) const;
  double three_body(const Field2D& v) const;

  const HartreeParams& params() const { return params_; }
  const Field2D& potential() const { return potential_; }

 private:
  HartreeParams params_;
  CartesianGrid2D grid_;
  int max_points_;
  Field2D potential_;
  std::optional<Field2D> two_body_kernel_;
  std::optional<SampledThreeBody> three_body_kernel_;
};

double hartree_energy(const Field2D& v, const HartreeParams& p, int max_points = kDefaultThreeBodyPoints);
Field2D hartree_gradient(const Field2D& v, const HartreeParams& p, int max_points = kDefaultThreeBodyPoints);

struct TwoBodyRatePoint {
  double n;
  /// ||v||_4^4 - two_body_term.
  double defect;
  /// 2 N^-alpha || |x| U ||_1 ||v||_6^3 ||grad v||_2.
  double bound;
};

struct TwoBodyRateReport {
  std::vector<TwoBodyRatePoint> points;
  /// Log-log fit of defect against N; absent when some defect is not positive.
  std::optional<PowerLawFit> fit;
  bool nonnegative;
  bool bounded;
  bool monotone;
};

struct ThreeBodyDefectPoint {
  double n;
  /// ||v||_6^6 - three_body_term.
  double defect;
};

struct ThreeBodyDefectReport {
  std::vector<ThreeBodyDefectPoint> points;
  std::optional<PowerLawFit> fit;
  bool nonnegative;
  bool monotone;
};

/// Requires v normalized and N ascending.
TwoBodyRateReport lemma_two_body_rate(const Field2D& v, const TwoBodyKernel& k, std::span<const double> n_list);
ThreeBodyDefectReport lemma_three_body_defect(const Field2D& v, const ThreeBodyKernel& k,
                                              std::span<const double> n_list,
                                              int max_points = kDefaultThreeBodyPoints);

/// Throws HypothesisViolation in the trapped case unless a < a* or (a >= a* and alpha < beta).
GroundStateResult minimize_hartree(const HartreeParams& p, Field2D init, const SolverOptions& opts,
                                   int max_points = kDefaultThreeBodyPoints);

/// Townes profile at the trial-optimal scale of the limiting NLS problem, or at scale 1 without one.
Field2D hartree_initial_guess(const HartreeParams& p, const CartesianGrid2D& grid);

struct HartreeScanPoint {
  double n;
  CollapsePoint point;
};

/// Trapped collapse with N_n = ell_n^(-1/eta) and (a_n, b_n) from collapse_sequence.
/// Requires 0 < eta < min{alpha/(s+3), beta} and alpha < beta when zeta >= 1.
struct HartreeCollapseSpec {
  CollapseSpec base;
  KernelPair kernels;
  double eta;

  void validate() const;
};

/// Per-point Hartree minimization in coordinates rescaled by ell_n, warm-started.
/// `coefficient` is E^H / (Q_s ell^s) and `h1_distance` is measured to Q0.
std::vector<HartreeScanPoint> hartree_collapse_scan(const HartreeCollapseSpec& spec, const CartesianGrid2D& rescaled_grid,
                                                    const SolverOptions& opts, int max_points = kDefaultThreeBodyPoints);

/// Homogeneous Hartree energies along b_N = N^-eta in coordinates rescaled by sqrt(b_N).
/// Requires a > a* and 0 < eta < 2 alpha < 2 beta. `energy` holds G^H, `coefficient` the ratio
/// b_N G^H / G^NLS_{a,1}, and `h1_distance` the distance to the NLS minimizer at b = 1 on the same grid.
struct HomogHartreeScan {
  double nls_energy;
  std::vector<HartreeScanPoint> points;
};
HomogHartreeScan homog_hartree_scan(double a, std::span<const double> n_list, const KernelPair& kernels, double eta,
                                    const CartesianGrid2D& rescaled_grid, const SolverOptions& opts,
                                    int max_points = kDefaultThreeBodyPoints);

}  // namespace cqnls

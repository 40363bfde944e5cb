#include "cqnls/hartree.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "cqnls/radial.hpp"
#include "cqnls/spectral.hpp"
#include "cqnls/townes.hpp"

namespace cqnls {

namespace {

constexpr double kSandwichSlack = 1e-10;

/// Both interaction terms lie in [0, ||rho||_p^p]; a violation means the discrete kernel lost
/// its unit mass or positivity.
void check_sandwich(double value, double upper, const char* what) {
  if (value < -kSandwichSlack || value > upper + kSandwichSlack) {
    std::ostringstream msg;
    msg << what << " term " << value << " outside [0, " << upper << "]";
    throw Error(msg.str());
  }
}

Field2D density(const Field2D& v) {
  Field2D rho = v;
  for (double& x : rho.values()) x *= x;
  return rho;
}

double power_integral(const Field2D& rho, int power) {
  CompensatedSum sum;
  for (double r : rho.values()) sum.add(power == 2 ? r * r : r * r * r);
  return sum.value() * rho.grid().cell_area();
}

void require_budget(const CartesianGrid2D& grid, int max_points) {
  if (grid.points() > max_points) {
    std::ostringstream msg;
    msg << "three-body evaluation on " << grid.points() << " points per side exceeds the budget of " << max_points;
    throw BudgetExceeded(msg.str());
  }
}

void require_normalized(const Field2D& v) {
  const double n = lp_norm(v, 2.0);
  if (std::abs(n - 1.0) > 1e-8) throw InvalidArgument("field must be L2-normalized (norm " + std::to_string(n) + ")");
}

void require_ascending(std::span<const double> n_list) {
  if (n_list.empty()) throw InvalidArgument("N list is empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (!(n_list[i] >= 1.0)) throw InvalidArgument("N values must be >= 1");
    if (i > 0 && !(n_list[i] > n_list[i - 1])) throw InvalidArgument("N values must be strictly ascending");
  }
}

template <class Point>
bool non_increasing(const std::vector<Point>& points) {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].defect > points[i - 1].defect + 1e-12) return false;
  }
  return true;
}

template <class Point>
std::optional<PowerLawFit> fit_defects(const std::vector<Point>& points) {
  if (points.size() < 3) return std::nullopt;
  std::vector<double> ns, ds;
  for (const auto& p : points) {
    if (!(p.defect > 0.0)) return std::nullopt;
    ns.push_back(p.n);
    ds.push_back(p.defect);
  }
  return fit_power_law(ns, ds);
}

}  // namespace

void HartreeParams::validate() const {
  if (!std::isfinite(a) || a < 0.0) throw InvalidArgument("two-body strength a must be finite and >= 0");
  if (!std::isfinite(b) || b < 0.0) throw InvalidArgument("three-body strength b must be finite and >= 0");
  if (!std::isfinite(n) || n < 3.0) throw InvalidArgument("particle number N must be >= 3");
  if (mode == Geometry::Trapped && !(s > 0.0)) throw InvalidArgument("trap power s must be > 0");
  if (!(trap_strength >= 0.0)) throw InvalidArgument("trap strength must be >= 0");
  if (!(length_scale > 0.0) || !std::isfinite(length_scale)) throw InvalidArgument("length scale must be > 0");
}

NlsParams HartreeParams::nls_limit() const { return NlsParams{a, b, s, mode, trap_strength}; }

HartreeParams HartreeParams::rescaled(double ell) const {
  if (!(ell > 0.0)) throw InvalidArgument("length scale must be positive");
  HartreeParams out = *this;
  out.b = b / (ell * ell);
  out.trap_strength = mode == Geometry::Trapped ? trap_strength * std::pow(ell, s + 2.0) : 0.0;
  out.length_scale = length_scale * ell;
  return out;
}

double two_body_term(const Field2D& v, const TwoBodyKernel& k, double n) {
  const Field2D rho = density(v);
  const double value = inner(rho, fft_convolve(rho, scaled_two_body(k, n, v.grid())));
  check_sandwich(value, power_integral(rho, 2), "two-body");
  return value;
}

ThreeBodyField three_body_field(const Field2D& rho, const SampledThreeBody& kernel, int max_points) {
  require_same_grid(rho, kernel.factor, "three-body evaluation");
  const CartesianGrid2D& grid = rho.grid();
  require_budget(grid, max_points);
  const int m = grid.points();
  const int mask = m - 1;
  const int half = m / 2 + 1;
  const auto& plans = FftPlans::get(m);

  // Parseval: sum_{y,z} g(y) f(y - z) g(z) = M^-2 sum_k F_k |G_k|^2, with the r2c half spectrum weighted.
  const double h2 = grid.cell_area();
  const double scale = h2 * h2 / (static_cast<double>(grid.size()) * kernel.normalization);
  std::vector<double> weighted(kernel.spectrum.size());
  for (std::size_t idx = 0; idx < weighted.size(); ++idx) {
    const int j = static_cast<int>(idx % half);
    weighted[idx] = ((j == 0 || j == m / 2) ? 1.0 : 2.0) * kernel.spectrum[idx] * scale;
  }

  AlignedVector g(grid.size());
  ComplexVector spec(plans.half_size());
  Field2D inner_field(grid);
  CompensatedSum total;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double rx = rho(i, j);
      if (rx == 0.0) continue;
      for (int yi = 0; yi < m; ++yi) {
        const int di = (i - yi) & mask;
        for (int yj = 0; yj < m; ++yj) g[yi * m + yj] = rho(yi, yj) * kernel.factor(di, (j - yj) & mask);
      }
      plans.forward(g.data(), spec.data());
      CompensatedSum quad;
      for (std::size_t idx = 0; idx < spec.size(); ++idx) quad.add(weighted[idx] * std::norm(spec[idx]));
      inner_field(i, j) = quad.value();
      total.add(rx * quad.value());
    }
  }
  return {total.value() * h2, std::move(inner_field)};
}

double three_body_term(const Field2D& v, const ThreeBodyKernel& k, double n, int max_points) {
  require_budget(v.grid(), max_points);
  const Field2D rho = density(v);
  const double value = three_body_field(rho, sample_three_body(k, k.scale(n), v.grid()), max_points).value;
  check_sandwich(value, power_integral(rho, 3), "three-body");
  return value;
}

HartreeFunctional::HartreeFunctional(const HartreeParams& p, const CartesianGrid2D& grid, int max_points)
    : params_(p), grid_(grid), max_points_(max_points), potential_(trap_potential(grid, p.s, p.trap_strength, p.mode)) {
  p.validate();
  if (p.a != 0.0) two_body_kernel_ = sample_two_body(p.kernels.two_body, p.two_body_scale(), grid);
  if (p.b != 0.0) {
    require_budget(grid, max_points);
    three_body_kernel_ = sample_three_body(p.kernels.three_body, p.three_body_scale(), grid);
  }
}

double HartreeFunctional::two_body(const Field2D& v) const {
  if (!two_body_kernel_) return two_body_term(v, params_.kernels.two_body, params_.n);
  const Field2D rho = density(v);
  return inner(rho, fft_convolve(rho, *two_body_kernel_));
}

double HartreeFunctional::three_body(const Field2D& v) const {
  if (!three_body_kernel_) return three_body_term(v, params_.kernels.three_body, params_.n, max_points_);
  return three_body_field(density(v), *three_body_kernel_, max_points_).value;
}

Evaluation HartreeFunctional::evaluate(const Field2D& v, Field2D* gradient) const {
  if (v.grid() != grid_) throw GridMismatch("field grid differs from the functional's grid");
  double kinetic = 0.0;
  if (gradient) {
    Field2D lap = neg_laplacian(v);
    kinetic = inner(v, lap);
    *gradient = std::move(lap);
    *gradient *= 2.0;
  } else {
    kinetic = grad_norm_sq(v);
  }
  const Field2D rho = density(v);
  const double area = grid_.cell_area();

  CompensatedSum trap;
  for (std::size_t k = 0; k < v.size(); ++k) trap.add(potential_[k] * rho[k]);
  double energy = kinetic + trap.value() * area;
  if (gradient) {
    for (std::size_t k = 0; k < v.size(); ++k) (*gradient)[k] += 2.0 * potential_[k] * v[k];
  }

  if (two_body_kernel_) {
    const Field2D conv = fft_convolve(rho, *two_body_kernel_);
    const double value = inner(rho, conv);
    check_sandwich(value, power_integral(rho, 2), "two-body");
    energy -= 0.5 * params_.a * value;
    if (gradient) {
      for (std::size_t k = 0; k < v.size(); ++k) (*gradient)[k] -= 2.0 * params_.a * conv[k] * v[k];
    }
  }
  if (three_body_kernel_) {
    const ThreeBodyField field = three_body_field(rho, *three_body_kernel_, max_points_);
    check_sandwich(field.value, power_integral(rho, 3), "three-body");
    energy += params_.b / 6.0 * field.value;
    // The variational derivative in rho is 3 inner by permutation symmetry of W.
    if (gradient) {
      for (std::size_t k = 0; k < v.size(); ++k) (*gradient)[k] += params_.b * field.inner[k] * v[k];
    }
  }
  return {energy, kinetic};
}

double hartree_energy(const Field2D& v, const HartreeParams& p, int max_points) {
  return HartreeFunctional(p, v.grid(), max_points).energy(v);
}

Field2D hartree_gradient(const Field2D& v, const HartreeParams& p, int max_points) {
  Field2D g(v.grid());
  HartreeFunctional(p, v.grid(), max_points).evaluate(v, &g);
  return g;
}

TwoBodyRateReport lemma_two_body_rate(const Field2D& v, const TwoBodyKernel& k, std::span<const double> n_list) {
  require_normalized(v);
  require_ascending(n_list);
  const Field2D rho = density(v);
  const double l4 = power_integral(rho, 2);
  const double l6_cubed = std::sqrt(power_integral(rho, 3));
  const double grad = std::sqrt(grad_norm_sq(v));
  TwoBodyRateReport report{{}, std::nullopt, true, true, true};
  for (double n : n_list) {
    const double defect = l4 - two_body_term(v, k, n);
    const double bound = 2.0 * std::pow(n, -k.alpha()) * k.first_moment() * l6_cubed * grad;
    report.points.push_back({n, defect, bound});
    report.nonnegative = report.nonnegative && defect >= -kSandwichSlack;
    report.bounded = report.bounded && defect <= bound + kSandwichSlack;
  }
  report.monotone = non_increasing(report.points);
  report.fit = fit_defects(report.points);
  return report;
}

ThreeBodyDefectReport lemma_three_body_defect(const Field2D& v, const ThreeBodyKernel& k,
                                              std::span<const double> n_list, int max_points) {
  require_normalized(v);
  require_ascending(n_list);
  const double l6 = power_integral(density(v), 3);
  ThreeBodyDefectReport report{{}, std::nullopt, true, true};
  for (double n : n_list) {
    const double defect = l6 - three_body_term(v, k, n, max_points);
    report.points.push_back({n, defect});
    report.nonnegative = report.nonnegative && defect >= -kSandwichSlack;
  }
  report.monotone = non_increasing(report.points);
  report.fit = fit_defects(report.points);
  return report;
}

GroundStateResult minimize_hartree(const HartreeParams& p, Field2D init, const SolverOptions& opts, int max_points) {
  p.validate();
  const double a_star = townes_reference().constants.a_star;
  if (p.mode == Geometry::Trapped && p.a >= a_star && !(p.kernels.two_body.alpha() < p.kernels.three_body.beta())) {
    std::ostringstream msg;
    msg << "Hartree minimization requires a < a* or (a ≥ a* and α < β); got a = " << p.a << ", a* = " << a_star
        << ", alpha = " << p.kernels.two_body.alpha() << ", beta = " << p.kernels.three_body.beta();
    throw HypothesisViolation(msg.str());
  }
  auto functional = std::make_shared<const HartreeFunctional>(p, init.grid(), max_points);
  SphereObjective obj;
  obj.evaluate = [functional](const Field2D& v, Field2D* g) { return functional->evaluate(v, g); };
  if (p.mode == Geometry::Trapped) {
    obj.potential = functional->potential();
  } else {
    obj.recenter = true;
  }
  return minimize_on_sphere(obj, std::move(init), opts);
}

Field2D hartree_initial_guess(const HartreeParams& p, const CartesianGrid2D& grid) {
  const auto& ref = townes_reference();
  double ell = 1.0;
  if (p.mode == Geometry::Homogeneous || ref.constants.qs.contains(p.s)) {
    ell = trial_optimal_scale(p.nls_limit(), ref.constants).value_or(1.0);
  }
  return embed_scaled(ref.q0, grid, ell);
}

void HartreeCollapseSpec::validate() const {
  base.validate();
  const double alpha = kernels.two_body.alpha(), beta = kernels.three_body.beta();
  const double window = std::min(alpha / (base.s + 3.0), beta);
  if (!(eta > 0.0 && eta < window)) {
    std::ostringstream msg;
    msg << "Hartree collapse requires 0 < η < min{α/(s+3), β} = " << window << "; got eta = " << eta;
    throw HypothesisViolation(msg.str());
  }
  if (base.zeta >= 1.0 && !(alpha < beta)) {
    std::ostringstream msg;
    msg << "Hartree collapse requires α<β if ζ ≥ 1; got alpha = " << alpha << ", beta = " << beta
        << ", zeta = " << base.zeta;
    throw HypothesisViolation(msg.str());
  }
}

std::vector<HartreeScanPoint> hartree_collapse_scan(const HartreeCollapseSpec& spec, const CartesianGrid2D& rescaled_grid,
                                                    const SolverOptions& opts, int max_points) {
  spec.validate();
  const auto triples = collapse_sequence(spec.base);
  const Field2D q0 = embed_scaled(townes_reference().q0, rescaled_grid, 1.0);
  const double qs = spec.base.constants.qs_at(spec.base.s);
  std::vector<HartreeScanPoint> points;
  Field2D current = q0;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    const double n = std::pow(t.ell, -1.0 / spec.eta);
    const HartreeParams p{spec.kernels, t.a, t.b, n, spec.base.s, Geometry::Trapped, 1.0, 1.0};
    GroundStateResult r = minimize_hartree(p.rescaled(t.ell), current, opts, max_points);
    points.push_back({n,
                      {static_cast<int>(i), t.a, t.b, t.ell, r.energy / (t.ell * t.ell),
                       r.energy / (qs * std::pow(t.ell, spec.base.s + 2.0)), h1_distance(r.field, q0), r.iterations,
                       r.converged}});
    current = std::move(r.field);
  }
  return points;
}

HomogHartreeScan homog_hartree_scan(double a, std::span<const double> n_list, const KernelPair& kernels, double eta,
                                    const CartesianGrid2D& rescaled_grid, const SolverOptions& opts, int max_points) {
  const auto& ref = townes_reference();
  const NlsParams limit{a, 1.0, 2.0, Geometry::Homogeneous, 0.0};
  if (classify_phase_homog(limit) != HomogPhase::GroundState) {
    throw HypothesisViolation("homogeneous Hartree collapse requires a > a*");
  }
  const double alpha = kernels.two_body.alpha(), beta = kernels.three_body.beta();
  if (!(eta > 0.0 && eta < 2.0 * alpha)) {
    throw HypothesisViolation("homogeneous Hartree collapse requires 0 < η < 2α; got eta = " + std::to_string(eta) +
                              ", alpha = " + std::to_string(alpha));
  }
  if (!(alpha < beta)) {
    throw HypothesisViolation("homogeneous Hartree collapse requires 2α < 2β; got alpha = " + std::to_string(alpha) +
                              ", beta = " + std::to_string(beta));
  }
  require_ascending(n_list);

  const double ell0 = trial_optimal_scale(limit, ref.constants).value_or(1.0);
  const GroundStateResult nls = minimize_nls(limit, embed_scaled(ref.q0, rescaled_grid, ell0), opts);
  HomogHartreeScan scan{nls.energy, {}};
  Field2D current = nls.field;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const double n = n_list[i];
    const double b = std::pow(n, -eta);
    const double ell = std::sqrt(b);
    const HartreeParams p{kernels, a, 1.0, n, 2.0, Geometry::Homogeneous, 0.0, ell};
    GroundStateResult r = minimize_hartree(p, current, opts, max_points);
    scan.points.push_back({n,
                           {static_cast<int>(i), a, b, ell, r.energy / b, r.energy / nls.energy,
                            h1_distance(r.field, nls.field), r.iterations, r.converged}});
    current = std::move(r.field);
  }
  return scan;
}

}  // namespace cqnls

#include "cqnls/nls.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cqnls/spectral.hpp"

namespace cqnls {

void NlsParams::validate() const {
  if (!std::isfinite(a) || a < 0.0) throw InvalidArgument("cubic strength a must be finite and >= 0");
  if (!std::isfinite(b)) throw InvalidArgument("quintic strength b must be finite");
  if (mode == Geometry::Trapped && !(s > 0.0)) throw InvalidArgument("trap power s must be > 0");
  if (!(trap_strength >= 0.0)) throw InvalidArgument("trap strength must be >= 0");
}

NlsParams NlsParams::rescaled(double ell) const {
  if (!(ell > 0.0)) throw InvalidArgument("length scale must be positive");
  NlsParams out = *this;
  out.b = b / (ell * ell);
  out.trap_strength = mode == Geometry::Trapped ? trap_strength * std::pow(ell, s + 2.0) : 0.0;
  return out;
}

Field2D trap_potential(const CartesianGrid2D& grid, double s, double strength, Geometry mode) {
  if (mode == Geometry::Homogeneous || strength == 0.0) return Field2D(grid);
  return Field2D::from_function(grid, [&](double x, double y) {
    const double r2 = x * x + y * y;
    return strength * (s == 2.0 ? r2 : std::pow(r2, 0.5 * s));
  });
}

namespace {

Evaluation evaluate_with(const Field2D& v, const NlsParams& p, const Field2D& potential, Field2D* gradient) {
  double kinetic = 0.0;
  if (gradient) {
    Field2D lap = neg_laplacian(v);
    kinetic = inner(v, lap);
    *gradient = std::move(lap);
    *gradient *= 2.0;
  } else {
    kinetic = grad_norm_sq(v);
  }
  CompensatedSum local;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double x = v[k];
    const double x2 = x * x;
    local.add(potential[k] * x2 - 0.5 * p.a * x2 * x2 + (p.b / 6.0) * x2 * x2 * x2);
    if (gradient) (*gradient)[k] += 2.0 * potential[k] * x - 2.0 * p.a * x2 * x + p.b * x2 * x2 * x;
  }
  return {kinetic + local.value() * v.grid().cell_area(), kinetic};
}

}  // namespace

Evaluation nls_evaluate(const Field2D& v, const NlsParams& p, Field2D* gradient) {
  const Field2D potential = trap_potential(v.grid(), p.s, p.trap_strength, p.mode);
  return evaluate_with(v, p, potential, gradient);
}

double nls_energy(const Field2D& v, const NlsParams& p) { return nls_evaluate(v, p, nullptr).energy; }

Field2D nls_gradient(const Field2D& v, const NlsParams& p) {
  Field2D g(v.grid());
  nls_evaluate(v, p, &g);
  return g;
}

double trial_energy(const NlsParams& p, const TownesConstants& c, double ell) {
  double e = (1.0 - p.a / c.a_star) / (ell * ell) + p.b * c.q6 / std::pow(ell, 4.0);
  if (p.mode == Geometry::Trapped) e += p.trap_strength * c.qs_at(p.s) * std::pow(ell, p.s) / p.s;
  return e;
}

std::optional<double> trial_optimal_scale(const NlsParams& p, const TownesConstants& c) {
  constexpr int samples = 400;
  const double lo = std::log(1e-4), hi = std::log(1e4);
  int best = 0;
  double best_e = INFINITY;
  for (int i = 0; i <= samples; ++i) {
    const double e = trial_energy(p, c, std::exp(lo + (hi - lo) * i / samples));
    if (e < best_e) {
      best_e = e;
      best = i;
    }
  }
  if (best == 0 || best == samples) return std::nullopt;
  // Golden-section refinement on the bracketing cells.
  double x0 = lo + (hi - lo) * (best - 1) / samples, x1 = lo + (hi - lo) * (best + 1) / samples;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = x1 - phi * (x1 - x0), c2 = x0 + phi * (x1 - x0);
  double f1 = trial_energy(p, c, std::exp(c1)), f2 = trial_energy(p, c, std::exp(c2));
  for (int it = 0; it < 100; ++it) {
    if (f1 < f2) {
      x1 = c2;
      c2 = c1;
      f2 = f1;
      c1 = x1 - phi * (x1 - x0);
      f1 = trial_energy(p, c, std::exp(c1));
    } else {
      x0 = c1;
      c1 = c2;
      f1 = f2;
      c2 = x0 + phi * (x1 - x0);
      f2 = trial_energy(p, c, std::exp(c2));
    }
  }
  return std::exp(0.5 * (x0 + x1));
}

GroundStateResult minimize_nls(const NlsParams& p, Field2D init, const SolverOptions& opts) {
  p.validate();
  SphereObjective obj;
  Field2D potential = trap_potential(init.grid(), p.s, p.trap_strength, p.mode);
  obj.evaluate = [p, potential](const Field2D& v, Field2D* g) { return evaluate_with(v, p, potential, g); };
  if (p.mode == Geometry::Trapped) {
    obj.potential = std::move(potential);
  } else {
    obj.recenter = true;
  }
  return minimize_on_sphere(obj, std::move(init), opts);
}

ScaledGroundState solve_scaled(const NlsParams& p, const CartesianGrid2D& rescaled_grid, const SolverOptions& opts,
                               std::optional<double> length_scale) {
  const auto& ref = townes_reference();
  const double ell = length_scale ? *length_scale : trial_optimal_scale(p, ref.constants).value_or(1.0);
  const NlsParams rp = p.rescaled(ell);
  GroundStateResult r = minimize_nls(rp, embed_scaled(ref.q0, rescaled_grid, 1.0), opts);
  const double energy = r.energy / (ell * ell);
  return {std::move(r), ell, energy};
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::Unbounded: return "unbounded";
    case Phase::ZeroInfimumNoMinimizer: return "zero_infimum_no_minimizer";
    case Phase::Minimizer: return "minimizer";
  }
  return "unknown";
}

std::string to_string(HomogPhase p) { return p == HomogPhase::GroundState ? "ground_state" : "no_ground_state"; }

namespace {

bool at_critical(double a, double a_star) { return std::abs(a - a_star) <= 1e-12 * a_star; }

std::vector<double> default_probe_scales() {
  std::vector<double> out;
  for (int k = 8; k >= -24; --k) out.push_back(std::pow(10.0, k / 4.0));
  return out;
}

}  // namespace

Phase classify_phase(const NlsParams& p, std::span<const double> probe_scales, double floor) {
  if (p.mode != Geometry::Trapped) throw InvalidArgument("classify_phase needs trapped mode");
  if (!(p.s > 0.0) || !std::isfinite(p.a) || p.a < 0.0 || !std::isfinite(p.b)) {
    throw InvalidArgument("invalid parameters for phase classification");
  }
  const TownesConstants& c = townes_reference().constants;
  Phase phase = Phase::Minimizer;
  if (p.b < 0.0 || (p.b == 0.0 && p.a > c.a_star && !at_critical(p.a, c.a_star))) {
    phase = Phase::Unbounded;
  } else if (p.b == 0.0 && at_critical(p.a, c.a_star)) {
    phase = Phase::ZeroInfimumNoMinimizer;
  }
  NlsParams physical = p;
  physical.trap_strength = 1.0;
  // Unbounded families keep falling toward the smallest probe scale; a deep interior minimum is
  // a bounded problem with a large negative energy.
  double lowest = INFINITY, lowest_scale = INFINITY, smallest_scale = INFINITY;
  for (double ell : probe_scales) {
    const double e = trial_energy(physical, c, ell);
    if (e < lowest) {
      lowest = e;
      lowest_scale = ell;
    }
    smallest_scale = std::min(smallest_scale, ell);
  }
  const bool probe_unbounded = lowest < floor && lowest_scale == smallest_scale;
  if (probe_unbounded != (phase == Phase::Unbounded)) {
    std::ostringstream msg;
    msg << "trial-family probe (lowest energy " << lowest << ") disagrees with the existence criterion; "
        << "extend the probe scales";
    throw Error(msg.str());
  }
  return phase;
}

Phase classify_phase(const NlsParams& p) {
  const auto scales = default_probe_scales();
  return classify_phase(p, scales);
}

HomogPhase classify_phase_homog(const NlsParams& p) {
  if (p.mode != Geometry::Homogeneous) throw InvalidArgument("classify_phase_homog needs homogeneous mode");
  const double a_star = townes_reference().constants.a_star;
  const bool critical = p.b == 0.0 && at_critical(p.a, a_star);
  const bool stabilized = p.b > 0.0 && p.a > a_star && !at_critical(p.a, a_star);
  return (critical || stabilized) ? HomogPhase::GroundState : HomogPhase::NoGroundState;
}

OnsetBracket divergence_onset(double s, double a_lo, double a_hi, int bisections, const CartesianGrid2D& grid,
                              const SolverOptions& opts) {
  const auto& ref = townes_reference();
  SolverOptions o = opts;
  o.exploratory = true;
  auto diverges = [&](double a) {
    NlsParams p{a, 0.0, s, Geometry::Trapped, 1.0};
    const double ell = trial_optimal_scale(p, ref.constants).value_or(0.5);
    const auto r = minimize_nls(p, embed_scaled(ref.q0, grid, ell), o);
    return r.status == SolverStatus::Diverged;
  };
  if (diverges(a_lo)) throw Error("minimization already diverges at the lower end of the onset bracket");
  if (!diverges(a_hi)) throw Error("minimization does not diverge at the upper end of the onset bracket");
  for (int i = 0; i < bisections; ++i) {
    const double mid = 0.5 * (a_lo + a_hi);
    (diverges(mid) ? a_hi : a_lo) = mid;
  }
  return {a_lo, a_hi};
}

void CollapseSpec::validate() const {
  if (!(zeta >= 0.0) || !std::isfinite(zeta)) {
    throw HypothesisViolation("collapse requires ζ ≥ 0 (got zeta = " + std::to_string(zeta) + ")");
  }
  if (!(s > 0.0)) throw InvalidArgument("trap power s must be > 0");
  constants.qs_at(s);
  if (ell_schedule.empty()) throw InvalidArgument("length schedule is empty");
  for (std::size_t i = 0; i < ell_schedule.size(); ++i) {
    if (!(ell_schedule[i] > 0.0)) throw InvalidArgument("length schedule entries must be positive");
    if (i > 0 && !(ell_schedule[i] < ell_schedule[i - 1])) {
      throw InvalidArgument("length schedule must be strictly decreasing");
    }
  }
}

std::vector<CollapseTriple> collapse_sequence(const CollapseSpec& spec) {
  spec.validate();
  const double a_star = spec.constants.a_star;
  const double qs = spec.constants.qs_at(spec.s);
  std::vector<CollapseTriple> out;
  for (double ell : spec.ell_schedule) {
    const double a = spec.zeta == 1.0 ? a_star : a_star - (1.0 - spec.zeta) * a_star * qs * std::pow(ell, spec.s + 2.0) / 2.0;
    const double b = spec.zeta == 0.0 ? 0.0 : spec.zeta * qs * std::pow(ell, spec.s + 4.0) / (4.0 * spec.constants.q6);
    if (a < 0.0 || b < 0.0 || !(std::max(0.0, a_star - a) + b > 0.0)) {
      std::ostringstream msg;
      msg << "schedule entry ell = " << ell << " gives a = " << a << ", b = " << b
          << ", violating a >= 0, b >= 0, max{0, a* - a} + b > 0";
      throw HypothesisViolation(msg.str());
    }
    out.push_back({a, b, ell});
  }
  return out;
}

double h1_distance(const Field2D& u, const Field2D& w) {
  Field2D d = u;
  d -= w;
  const double l2 = lp_norm(d, 2.0);
  return std::sqrt(l2 * l2 + grad_norm_sq(d));
}

double predicted_coefficient(double zeta, double s) { return 0.5 + 1.0 / s - zeta / 4.0; }

std::vector<CollapsePoint> collapse_scan(const CollapseSpec& spec, const CartesianGrid2D& rescaled_grid,
                                         const SolverOptions& opts) {
  const auto triples = collapse_sequence(spec);
  const auto& ref = townes_reference();
  const Field2D q0 = embed_scaled(ref.q0, rescaled_grid, 1.0);
  const double qs = spec.constants.qs_at(spec.s);
  std::vector<CollapsePoint> points;
  Field2D current = q0;
  for (std::size_t n = 0; n < triples.size(); ++n) {
    const auto& t = triples[n];
    const NlsParams rp = NlsParams{t.a, t.b, spec.s, Geometry::Trapped, 1.0}.rescaled(t.ell);
    GroundStateResult r = minimize_nls(rp, current, opts);
    const double ell2 = t.ell * t.ell;
    points.push_back({static_cast<int>(n), t.a, t.b, t.ell, r.energy / ell2,
                      r.energy / (qs * std::pow(t.ell, spec.s + 2.0)), h1_distance(r.field, q0), r.iterations,
                      r.converged});
    current = std::move(r.field);
  }
  return points;
}

std::vector<CollapsePoint> homog_collapse_scan(std::span<const double> a_schedule, std::span<const double> b_schedule,
                                               const TownesConstants& constants, const CartesianGrid2D& rescaled_grid,
                                               const SolverOptions& opts) {
  if (a_schedule.size() != b_schedule.size() || a_schedule.empty()) {
    throw InvalidArgument("a and b schedules must be nonempty and of equal length");
  }
  const double a_star = constants.a_star;
  for (std::size_t n = 0; n < a_schedule.size(); ++n) {
    if (!(a_schedule[n] > a_star) || !(b_schedule[n] > 0.0)) {
      throw HypothesisViolation("homogeneous collapse requires a_n > a* and b_n > 0");
    }
  }
  const auto& ref = townes_reference();
  const Field2D q0 = embed_scaled(ref.q0, rescaled_grid, 1.0);
  std::vector<CollapsePoint> points;
  Field2D current = q0;
  for (std::size_t n = 0; n < a_schedule.size(); ++n) {
    const double a = a_schedule[n], b = b_schedule[n];
    const double ell = std::sqrt(2.0 * a_star * constants.q6 * b / (a - a_star));
    const NlsParams rp = NlsParams{a, b, 2.0, Geometry::Homogeneous, 0.0}.rescaled(ell);
    GroundStateResult r = minimize_nls(rp, current, opts);
    const double g = r.energy / (ell * ell);
    const double ratio = g * 4.0 * a_star * a_star * constants.q6 * b / ((a - a_star) * (a - a_star));
    points.push_back({static_cast<int>(n), a, b, ell, g, ratio, h1_distance(r.field, q0), r.iterations, r.converged});
    current = std::move(r.field);
  }
  return points;
}

GroundStateResult homog_ground_state(double a, double b, const TownesConstants& constants,
                                     const CartesianGrid2D& unit_grid, const SolverOptions& opts) {
  if (!(b > 0.0)) throw InvalidArgument("homogeneous ground state needs b > 0");
  const NlsParams p{a, b, 2.0, Geometry::Homogeneous, 0.0};
  if (classify_phase_homog(p) != HomogPhase::GroundState) {
    throw HypothesisViolation("homogeneous ground states need b > 0 and a > a*");
  }
  const CartesianGrid2D grid(unit_grid.half_width() * std::sqrt(b), unit_grid.points());
  const double ell = trial_optimal_scale(p, constants).value_or(std::sqrt(b));
  return minimize_nls(p, embed_scaled(townes_reference().q0, grid, ell), opts);
}

}  // namespace cqnls

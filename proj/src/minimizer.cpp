#include "cqnls/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cqnls/spectral.hpp"

namespace cqnls {

std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged: return "converged";
    case SolverStatus::Stalled: return "stalled";
    case SolverStatus::IterationCap: return "iteration_cap";
    case SolverStatus::Diverged: return "diverged";
  }
  return "unknown";
}

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

/// P f = S kappa (kappa - Laplacian)^{-1} S f with S = sqrt(kappa / (kappa + V)).
class Preconditioner {
 public:
  Preconditioner(const SphereObjective& obj, bool enabled) : potential_(obj.potential), enabled_(enabled) {}

  Field2D apply(const Field2D& f, double kappa) const {
    if (!enabled_) return f;
    Field2D tmp = f;
    scale(tmp, kappa);
    tmp = apply_multiplier(tmp, [kappa](double k2) { return kappa / (kappa + k2); });
    scale(tmp, kappa);
    return tmp;
  }

 private:
  void scale(Field2D& f, double kappa) const {
    if (!potential_) return;
    for (std::size_t k = 0; k < f.size(); ++k) f[k] *= std::sqrt(kappa / (kappa + (*potential_)[k]));
  }

  const std::optional<Field2D>& potential_;
  bool enabled_;
};

/// A point on the sphere with its energy and, once computed, its gradient data.
struct Point {
  Field2D v;
  Evaluation ev{};
  Field2D g;
  Field2D r;
  double residual = INFINITY;
  bool has_gradient = false;

  explicit Point(Field2D field) : v(std::move(field)), g(v.grid()), r(v.grid()) {}
};

void complete(Point& p, const SphereObjective& obj) {
  p.ev = obj.evaluate(p.v, &p.g);
  p.r = p.g;
  p.r.add_scaled(-inner(p.g, p.v), p.v);
  p.residual = lp_norm(p.r, 2.0);
  p.has_gradient = true;
}

/// Retraction of v + t d with d tangent at v.
Point retract(const Point& base, const Field2D& d, double t, const SphereObjective& obj, bool with_gradient) {
  Field2D w = base.v;
  w.add_scaled(t, d);
  Point p(normalized(std::move(w)));
  if (with_gradient) {
    complete(p, obj);
  } else {
    p.ev = obj.evaluate(p.v, nullptr);
  }
  return p;
}

/// Derivative of t -> E(retract(v + t d)) at a completed point reached with step t.
double path_slope(const Point& p, const Field2D& d, double t, double d_norm_sq) {
  return inner(p.r, d) / std::sqrt(1.0 + t * t * d_norm_sq);
}

}  // namespace

GroundStateResult minimize_on_sphere(const SphereObjective& objective, Field2D init, const SolverOptions& opts) {
  if (!objective.evaluate) throw InvalidArgument("objective has no evaluator");
  if (!init.all_finite()) throw InvalidArgument("initial field is not finite");
  const CartesianGrid2D grid = init.grid();
  const double resolution_cap = 0.25 * grid.max_wavenumber() * grid.max_wavenumber();
  const Preconditioner precond(objective, opts.precondition);
  const bool use_cg = opts.method == DescentMethod::ConjugateGradient;

  Point cur(normalized(std::move(init)));
  complete(cur, objective);
  double max_kinetic = cur.ev.kinetic;

  auto divergence = [&](const Evaluation& e) -> std::string {
    std::ostringstream msg;
    if (!std::isfinite(e.energy) || !std::isfinite(e.kinetic)) {
      msg << "non-finite energy";
    } else if (e.energy < opts.energy_floor) {
      msg << "energy " << e.energy << " below floor " << opts.energy_floor;
    } else if (e.kinetic > opts.kinetic_cap) {
      msg << "kinetic energy " << e.kinetic << " above cap " << opts.kinetic_cap;
    } else if (e.kinetic > resolution_cap) {
      msg << "kinetic energy " << e.kinetic << " exceeds what the grid resolves (" << resolution_cap << ")";
    }
    return msg.str();
  };

  auto finish = [&](SolverStatus status, int iterations, std::string diagnostic) {
    GroundStateResult out{std::move(cur.v), cur.ev.energy, iterations, cur.residual, status == SolverStatus::Converged,
                          status, max_kinetic, std::move(diagnostic)};
    if (!opts.exploratory) {
      if (status == SolverStatus::Diverged) throw SolverDiverged("minimization diverged: " + out.diagnostic);
      if (status == SolverStatus::IterationCap) {
        throw IterationCapReached("iteration cap reached with residual " + std::to_string(out.gradient_residual));
      }
    }
    return out;
  };

  if (std::string why = divergence(cur.ev); !why.empty()) return finish(SolverStatus::Diverged, 0, why);

  double step = 0.0;
  bool have_history = false;
  bool recentered = false;
  Field2D d_prev(grid);
  Field2D r_prev(grid);
  double zr_prev = 0.0;
  double slope_prev = 0.0;

  for (int it = 1; it <= opts.max_iterations; ++it) {
    if (objective.recenter && opts.recenter_interval > 0 && it % opts.recenter_interval == 0) {
      const auto [cx, cy] = density_centroid(cur.v);
      if (std::hypot(cx, cy) > 1e-6 * grid.spacing()) {
        cur = Point(normalized(spectral_shift(cur.v, -cx, -cy)));
        complete(cur, objective);
        have_history = false;
        recentered = true;
      }
    }
    if (cur.residual < opts.tol) return finish(SolverStatus::Converged, it - 1, "");

    const double kappa = std::max(1.0, cur.ev.kinetic);
    const Field2D pg = precond.apply(cur.g, kappa);
    const Field2D pv = precond.apply(cur.v, kappa);
    // z is the preconditioned gradient made tangent along P v, so <z, v> = 0.
    Field2D z = pg;
    z.add_scaled(-inner(cur.v, pg) / inner(cur.v, pv), pv);
    const double zr = inner(z, cur.r);

    Field2D d = z;
    d *= -1.0;
    if (use_cg && have_history && zr_prev > 0.0) {
      const double beta = std::max(0.0, (zr - inner(z, r_prev)) / zr_prev);
      if (beta > 0.0) {
        Field2D transported = d_prev;
        transported.add_scaled(-inner(d_prev, cur.v), cur.v);
        d.add_scaled(beta, transported);
      }
    }
    double slope = inner(cur.r, d);
    if (!(slope < 0.0)) {
      d = z;
      d *= -1.0;
      slope = -zr;
    }
    if (!(slope < 0.0)) {
      d = cur.r;
      d *= -1.0;
      slope = -cur.residual * cur.residual;
    }
    const double d_norm_sq = inner(d, d);

    if (!have_history) {
      step = 0.25 / kappa;
    } else if (use_cg) {
      step = std::clamp(step * slope_prev / slope, 1e-3 * step, 1e3 * step);
    }

    // Below this first-order change an energy comparison is dominated by rounding.
    const double noise = 1e-14 * std::max(1.0, std::abs(cur.ev.energy));
    auto acceptable = [&](const Point& p, double t) {
      const double slack = (t * std::abs(slope) < noise) ? noise : 0.0;
      return std::isfinite(p.ev.energy) && p.ev.energy <= cur.ev.energy + kArmijo * t * slope + slack;
    };

    std::optional<Point> next;
    double taken = step;
    if (use_cg) {
      Point first = retract(cur, d, step, objective, true);
      const double s1 = path_slope(first, d, step, d_norm_sq);
      // Secant root of the directional derivative; exact for a quadratic model.
      double t2 = (s1 > slope) ? step * slope / (slope - s1) : 4.0 * step;
      t2 = std::clamp(t2, 0.05 * step, 8.0 * step);
      Point second = retract(cur, d, t2, objective, true);
      const bool ok1 = acceptable(first, step), ok2 = acceptable(second, t2);
      if (ok2 && (!ok1 || second.ev.energy <= first.ev.energy)) {
        next.emplace(std::move(second));
        taken = t2;
      } else if (ok1) {
        next.emplace(std::move(first));
        taken = step;
      } else {
        taken = std::min(step, t2);
      }
    }
    if (!next) {
      double t = use_cg ? 0.5 * taken : step;
      for (int k = 0; k < kMaxBacktracks; ++k, t *= 0.5) {
        Point p = retract(cur, d, t, objective, false);
        if (acceptable(p, t)) {
          complete(p, objective);
          next.emplace(std::move(p));
          taken = t;
          break;
        }
      }
    }
    if (!next) return finish(SolverStatus::Stalled, it - 1, "line search found no decrease");

    const double previous_energy = cur.ev.energy;
    if (use_cg) {
      step = taken;
    } else {
      Field2D s = next->v;
      s -= cur.v;
      Field2D y = next->r;
      y -= cur.r;
      const double sy = inner(s, y);
      step = (sy > 0.0) ? taken * taken * (-slope) / sy : 2.0 * taken;
      if (!std::isfinite(step) || step <= 0.0) step = taken;
    }
    d_prev = std::move(d);
    r_prev = cur.r;
    zr_prev = zr;
    slope_prev = slope;
    have_history = true;
    cur = std::move(*next);
    max_kinetic = std::max(max_kinetic, cur.ev.kinetic);

    if (opts.observer) {
      opts.observer(IterationRecord{it, cur.ev.energy, previous_energy, lp_norm(cur.v, 2.0), cur.residual,
                                    cur.ev.kinetic, recentered});
    }
    recentered = false;
    if (std::string why = divergence(cur.ev); !why.empty()) return finish(SolverStatus::Diverged, it, why);
  }
  return finish(SolverStatus::IterationCap, opts.max_iterations, "iteration cap reached");
}

}  // namespace cqnls

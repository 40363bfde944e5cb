#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cqnls/grid.hpp"
#include "cqnls/minimizer.hpp"
#include "cqnls/townes.hpp"

namespace cqnls {

enum class Geometry { Trapped, Homogeneous };

/// int |grad v|^2 + c |x|^s v^2 - (a/2) v^4 + (b/6) v^6.
/// The trap strength c is 1 for the physical problem; rescaled problems carry other values.
struct NlsParams {
  double a = 0.0;
  double b = 0.0;
  double s = 2.0;
  Geometry mode = Geometry::Trapped;
  double trap_strength = 1.0;

  void validate() const;
  /// The same functional in coordinates x = ell * y for w(y) = ell v(ell y); energies scale by ell^2.
  NlsParams rescaled(double ell) const;
};

/// c |x|^s on the grid, or zero in homogeneous mode.
Field2D trap_potential(const CartesianGrid2D& grid, double s, double strength, Geometry mode);

double nls_energy(const Field2D& v, const NlsParams& p);
Field2D nls_gradient(const Field2D& v, const NlsParams& p);
Evaluation nls_evaluate(const Field2D& v, const NlsParams& p, Field2D* gradient);

/// Energy of the Townes trial state ell^{-1} Q0(x / ell):
/// (1 - a/a*) ell^-2 + b Q6 ell^-4 + c Qs ell^s / s, the trap term dropped in homogeneous mode.
double trial_energy(const NlsParams& p, const TownesConstants& c, double ell);
/// Minimizing scale of trial_energy; nullopt when the trial energy has no interior minimum.
std::optional<double> trial_optimal_scale(const NlsParams& p, const TownesConstants& c);

GroundStateResult minimize_nls(const NlsParams& p, Field2D init, const SolverOptions& opts);

/// Ground state computed on a grid measured in units of the trial-optimal scale ell.
struct ScaledGroundState {
  GroundStateResult result;
  double length_scale;
  /// Energy in physical units, result.energy / ell^2.
  double energy;
};
ScaledGroundState solve_scaled(const NlsParams& p, const CartesianGrid2D& rescaled_grid, const SolverOptions& opts,
                               std::optional<double> length_scale = std::nullopt);

enum class Phase { Unbounded, ZeroInfimumNoMinimizer, Minimizer };
enum class HomogPhase { NoGroundState, GroundState };
std::string to_string(Phase p);
std::string to_string(HomogPhase p);

/// Trapped existence phase. The answer follows the existence theorem; the Townes trial family at
/// `probe_scales` must agree (lowest energy below `floor` and attained at the smallest scale iff
/// unbounded), otherwise an Error is thrown.
Phase classify_phase(const NlsParams& p, std::span<const double> probe_scales, double floor = -1e6);
Phase classify_phase(const NlsParams& p);
HomogPhase classify_phase_homog(const NlsParams& p);

/// Bisects the cubic strength at which trapped minimization (b = 0) starts to diverge.
struct OnsetBracket {
  double lower;
  double upper;
};
OnsetBracket divergence_onset(double s, double a_lo, double a_hi, int bisections, const CartesianGrid2D& grid,
                              const SolverOptions& opts);

struct CollapseSpec {
  double zeta = 0.0;
  double s = 2.0;
  TownesConstants constants;
  std::vector<double> ell_schedule;

  void validate() const;
};

struct CollapseTriple {
  double a;
  double b;
  double ell;
};

/// Inverts the blow-up length formula so each (a_n, b_n) reproduces its ell_n exactly.
std::vector<CollapseTriple> collapse_sequence(const CollapseSpec& spec);

struct CollapsePoint {
  int index;
  double a;
  double b;
  double ell;
  double energy;
  double coefficient;
  double h1_distance;
  int iterations;
  bool converged;
};

/// ||u - w||_{H^1}.
double h1_distance(const Field2D& u, const Field2D& w);

/// Predicted limit 1/2 + 1/s - zeta/4 of the collapse energy coefficient.
double predicted_coefficient(double zeta, double s);

/// Per-point minimization in coordinates rescaled by ell_n, warm-started along the schedule.
std::vector<CollapsePoint> collapse_scan(const CollapseSpec& spec, const CartesianGrid2D& rescaled_grid,
                                         const SolverOptions& opts);

/// Homogeneous collapse with ell_n = sqrt(2 a* Q6 b_n / (a_n - a*)). `energy` holds G_n and
/// `coefficient` the normalized ratio G_n 4 a*^2 Q6 b_n / (a_n - a*)^2.
std::vector<CollapsePoint> homog_collapse_scan(std::span<const double> a_schedule, std::span<const double> b_schedule,
                                               const TownesConstants& constants, const CartesianGrid2D& rescaled_grid,
                                               const SolverOptions& opts);

/// Homogeneous ground-state energy G_{a,b} on a box co-scaled with sqrt(b):
/// the grid passed in is the box used at b = 1.
GroundStateResult homog_ground_state(double a, double b, const TownesConstants& constants,
                                     const CartesianGrid2D& unit_grid, const SolverOptions& opts);

}  // namespace cqnls

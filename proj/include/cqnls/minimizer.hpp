#pragma once

#include <functional>
#include <optional>
#include <string>

#include "cqnls/grid.hpp"

namespace cqnls {

struct Evaluation {
  double energy;
  /// ||grad v||^2, tracked for divergence detection.
  double kinetic;
};

/// Energy on the L2 unit sphere. `evaluate` fills the L2 gradient when the pointer is non-null.
struct SphereObjective {
  std::function<Evaluation(const Field2D& v, Field2D* gradient)> evaluate;
  /// Nonnegative confining potential used to shape the preconditioner; absent means none.
  std::optional<Field2D> potential;
  /// Translation-invariant energies are pinned by periodic re-centering.
  bool recenter = false;
};

struct IterationRecord {
  int iteration;
  double energy;
  double previous_energy;
  double norm;
  double residual;
  double kinetic;
  /// A re-centering shift happened before this step; energies across it are not comparable.
  bool recentered;
};

enum class DescentMethod { ConjugateGradient, BarzilaiBorwein };

struct SolverOptions {
  DescentMethod method = DescentMethod::ConjugateGradient;
  double tol = 1e-8;
  int max_iterations = 50000;
  double energy_floor = -1e6;
  double kinetic_cap = 1e6;
  /// Return a non-converged result instead of throwing on divergence or the iteration cap.
  bool exploratory = false;
  int recenter_interval = 100;
  bool precondition = true;
  std::function<void(const IterationRecord&)> observer;
};

enum class SolverStatus { Converged, Stalled, IterationCap, Diverged };

std::string to_string(SolverStatus s);

struct GroundStateResult {
  Field2D field;
  double energy;
  int iterations;
  double gradient_residual;
  bool converged;
  SolverStatus status;
  double max_kinetic;
  std::string diagnostic;
};

/// Preconditioned Riemannian descent on {||v||_2 = 1} with retraction by renormalization.
/// Directions are Polak-Ribiere conjugate gradients with a secant line search on the
/// directional derivative, or plain Barzilai-Borwein steps. Every accepted step satisfies
/// a monotone Armijo condition. The residual is the L2 norm of the tangent gradient g - <g, v> v.
GroundStateResult minimize_on_sphere(const SphereObjective& objective, Field2D init, const SolverOptions& opts);

}  // namespace cqnls

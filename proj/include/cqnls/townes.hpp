#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "cqnls/grid.hpp"
#include "cqnls/radial.hpp"

namespace cqnls {

struct ShootingOptions {
  double r_max = 40.0;
  /// Integrator tolerance; the bisection itself always runs to adjacent doubles.
  double tol = 1e-12;
  double spacing = 0.005;
};

/// Positive radial solution of Q'' + Q'/r - Q + Q^3 = 0 with Q'(0) = 0.
/// Past the point where Q drops below 1e-3 the profile continues as A K0(r),
/// the decaying solution of the linearized equation.
RadialProfile shoot_townes(const ShootingOptions& opts);
RadialProfile shoot_townes(double r_max = 40.0, double tol = 1e-12);

/// Value of Q(0) found by the last bisection of this profile, i.e. values()[0].
inline double central_value(const RadialProfile& q) { return q.values()[0]; }

/// Max of |Q'' + Q'/r - Q + Q^3| over nodes with r <= r_limit, by fourth-order differences.
double townes_residual(const RadialProfile& q, double r_limit);

/// ||q||_2^2 as a radial function in the plane.
double critical_mass(const RadialProfile& q);
RadialProfile normalize_q0(const RadialProfile& q);

struct TownesConstants {
  double a_star = 0.0;
  /// (1/6) ||Q0||_6^6
  double q6 = 0.0;
  /// s -> s || |x|^{s/2} Q0 ||_2^2
  std::map<double, double> qs;
  std::vector<double> s_values;

  double qs_at(double s) const;
};

TownesConstants townes_constants(const RadialProfile& q0, double a_star, std::span<const double> s_list);

/// Radial norms used by the norm-identity checks; all with respect to the planar measure.
struct RadialNorms {
  double l2_sq;
  double grad_sq;
  double l4_4;
  double l6_6;
};
RadialNorms radial_norms(const RadialProfile& q);

/// Q, Q0 and constants for s in {1, 2, 3, 4} on the default shooting grid, computed once per process.
struct TownesReference {
  RadialProfile q;
  RadialProfile q0;
  TownesConstants constants;
};
const TownesReference& townes_reference();

/// ||grad v||^2 ||v||^2 - (a_star / 2) ||v||_4^4; nonnegative by the sharp Gagliardo-Nirenberg inequality.
double gn_deficit(const Field2D& v, double a_star);

void write_profile(std::ostream& out, const RadialProfile& q);
RadialProfile read_profile(std::istream& in);

}  // namespace cqnls

#include "cqnls/townes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "cqnls/spectral.hpp"

namespace cqnls {

namespace {

using State = std::array<double, 2>;

State rhs(double r, const State& y) { return {y[1], -y[1] / r + y[0] - y[0] * y[0] * y[0]}; }

/// Dormand-Prince 5(4) over [r, r + span] with internal step control.
State advance(double r, State y, double span, double tol) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                          e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;
  const double end = r + span;
  double h = span;
  int guard = 0;
  while (r < end) {
    if (++guard > 100000) throw ShootingFailure("step size collapsed during shooting");
    h = std::min(h, end - r);
    auto axpy = [&](std::initializer_list<std::pair<double, const State*>> terms) {
      State out = y;
      for (const auto& [c, k] : terms) {
        out[0] += h * c * (*k)[0];
        out[1] += h * c * (*k)[1];
      }
      return out;
    };
    const State k1 = rhs(r, y);
    const State k2 = rhs(r + c2 * h, axpy({{a21, &k1}}));
    const State k3 = rhs(r + c3 * h, axpy({{a31, &k1}, {a32, &k2}}));
    const State k4 = rhs(r + c4 * h, axpy({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State k5 = rhs(r + c5 * h, axpy({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State k6 = rhs(r + h, axpy({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State y5 = axpy({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State k7 = rhs(r + h, y5);
    double err = 0.0;
    for (int c = 0; c < 2; ++c) {
      const double e = h * (e1 * k1[c] + e3 * k3[c] + e4 * k4[c] + e5 * k5[c] + e6 * k6[c] + e7 * k7[c]);
      err = std::max(err, std::abs(e) / (tol + tol * std::max(std::abs(y[c]), std::abs(y5[c]))));
    }
    if (err <= 1.0) {
      r = (end - r - h <= 1e-15 * end) ? end : r + h;
      y = y5;
      h *= std::min(5.0, 0.9 * std::pow(std::max(err, 1e-10), -0.2));
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }
  return y;
}

/// Even power series sum_k c_k r^{2k} at the first node, from 4k^2 c_k = [Q - Q^3]_{k-1}.
State series_start(double q0, double r) {
  constexpr int terms = 6;
  std::array<double, terms> c{};
  std::array<double, terms> sq{};
  c[0] = q0;
  for (int k = 1; k < terms; ++k) {
    const int j = k - 1;
    sq[j] = 0.0;
    for (int i = 0; i <= j; ++i) sq[j] += c[i] * c[j - i];
    double cube = 0.0;
    for (int i = 0; i <= j; ++i) cube += c[i] * sq[j - i];
    c[k] = (c[j] - cube) / (4.0 * k * k);
  }
  double value = 0.0, slope = 0.0;
  for (int k = terms - 1; k >= 0; --k) {
    value = value * r * r + c[k];
    if (k > 0) slope = slope * r * r + 2.0 * k * c[k];
  }
  return {value, slope * r};
}

enum class Outcome { TooLarge, TooSmall, Undecided };

struct Trajectory {
  Outcome outcome = Outcome::Undecided;
  std::vector<double> values;
  double last_slope = 0.0;
};

constexpr double kTailThreshold = 1e-4;

/// Integrates node by node. With `record`, stops once Q falls below the tail threshold.
Trajectory integrate(double q0, const RadialGrid& grid, double tol, bool record) {
  Trajectory t;
  const double h = grid.spacing();
  const int n = grid.n_points();
  State y = series_start(q0, h);
  if (record) {
    t.values.push_back(q0);
    t.values.push_back(y[0]);
  }
  for (int i = 1; i + 1 < n; ++i) {
    y = advance(i * h, y, h, tol);
    if (record) {
      t.values.push_back(y[0]);
      t.last_slope = y[1];
      if (y[0] < kTailThreshold) return t;
    }
    if (y[0] < 0.0 || !std::isfinite(y[0])) {
      t.outcome = Outcome::TooLarge;
      return t;
    }
    if (y[1] > 0.0 || y[0] > 10.0 * q0) {
      t.outcome = Outcome::TooSmall;
      return t;
    }
  }
  return t;
}

}  // namespace

RadialProfile shoot_townes(const ShootingOptions& opts) {
  if (!(opts.r_max >= 15.0)) throw InvalidArgument("shooting needs r_max >= 15");
  if (!(opts.tol > 0.0 && opts.tol <= 1e-10)) throw InvalidArgument("shooting needs 0 < tol <= 1e-10");
  if (!(opts.spacing > 0.0)) throw InvalidArgument("shooting needs a positive spacing");
  int intervals = static_cast<int>(std::llround(opts.r_max / opts.spacing));
  intervals += intervals % 2;
  const RadialGrid grid(opts.r_max, intervals);

  double lo = 2.0, hi = 2.5;
  if (integrate(lo, grid, opts.tol, false).outcome != Outcome::TooSmall ||
      integrate(hi, grid, opts.tol, false).outcome != Outcome::TooLarge) {
    throw ShootingFailure("initial bracket [2.0, 2.5] does not separate the shooting outcomes");
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const Outcome o = integrate(mid, grid, opts.tol, false).outcome;
    if (o == Outcome::TooLarge) {
      hi = mid;
    } else if (o == Outcome::TooSmall) {
      lo = mid;
    } else {
      lo = hi = mid;
      break;
    }
  }

  Trajectory t = integrate(lo, grid, opts.tol, true);
  const int n = grid.n_points();
  const int matched = static_cast<int>(t.values.size()) - 1;
  if (t.values.back() >= kTailThreshold || matched + 1 >= n) {
    throw ShootingFailure("shooting never reached the decaying tail; increase r_max");
  }
  const auto nodes = grid.nodes();
  const double amplitude = t.values[matched] / std::cyl_bessel_k(0.0, nodes[matched]);
  std::vector<double> values = std::move(t.values);
  values.resize(n);
  for (int i = matched + 1; i < n; ++i) values[i] = amplitude * std::cyl_bessel_k(0.0, nodes[i]);
  return RadialProfile(grid, std::move(values), true);
}

RadialProfile shoot_townes(double r_max, double tol) {
  ShootingOptions opts;
  opts.r_max = r_max;
  opts.tol = tol;
  return shoot_townes(opts);
}

double townes_residual(const RadialProfile& q, double r_limit) {
  const auto f = q.values();
  const auto r = q.grid().nodes();
  const double h = q.grid().spacing();
  const int n = q.grid().n_points();
  // Sixth-order stencils; the profile is even so indices mirror through the origin.
  auto at = [&](int i) { return f[std::abs(i)]; };
  double worst = 0.0;
  for (int i = 0; i + 3 < n && r[i] <= r_limit; ++i) {
    const double d2 = (2.0 * at(i - 3) - 27.0 * at(i - 2) + 270.0 * at(i - 1) - 490.0 * f[i] + 270.0 * f[i + 1] -
                       27.0 * f[i + 2] + 2.0 * f[i + 3]) /
                      (180.0 * h * h);
    const double d1 = (-at(i - 3) + 9.0 * at(i - 2) - 45.0 * at(i - 1) + 45.0 * f[i + 1] - 9.0 * f[i + 2] + f[i + 3]) /
                      (60.0 * h);
    const double radial = (i == 0) ? d2 : d1 / r[i];
    worst = std::max(worst, std::abs(d2 + radial - f[i] + f[i] * f[i] * f[i]));
  }
  return worst;
}

double critical_mass(const RadialProfile& q) { return radial_norms(q).l2_sq; }

RadialNorms radial_norms(const RadialProfile& q) {
  const auto f = q.values();
  const auto df = q.slopes();
  std::vector<double> sq(f.size()), grad(f.size()), p4(f.size()), p6(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v2 = f[i] * f[i];
    sq[i] = v2;
    grad[i] = df[i] * df[i];
    p4[i] = v2 * v2;
    p6[i] = v2 * v2 * v2;
  }
  const auto& g = q.grid();
  return {g.integrate(sq), g.integrate(grad), g.integrate(p4), g.integrate(p6)};
}

RadialProfile normalize_q0(const RadialProfile& q) {
  RadialProfile once = q.scaled(1.0 / std::sqrt(critical_mass(q)));
  return once.scaled(1.0 / std::sqrt(critical_mass(once)));
}

double TownesConstants::qs_at(double s) const {
  const auto it = qs.find(s);
  if (it == qs.end()) throw InvalidArgument("no stored trap constant for s = " + std::to_string(s));
  return it->second;
}

TownesConstants townes_constants(const RadialProfile& q0, double a_star, std::span<const double> s_list) {
  TownesConstants c;
  c.a_star = a_star;
  c.q6 = radial_norms(q0).l6_6 / 6.0;
  const auto f = q0.values();
  const auto r = q0.grid().nodes();
  std::vector<double> integrand(f.size());
  for (double s : s_list) {
    if (!(s > 0.0)) throw InvalidArgument("trap power s must be positive");
    for (std::size_t i = 0; i < f.size(); ++i) integrand[i] = std::pow(r[i], s) * f[i] * f[i];
    c.qs[s] = s * q0.grid().integrate(integrand);
    c.s_values.push_back(s);
  }
  return c;
}

const TownesReference& townes_reference() {
  static const TownesReference ref = [] {
    RadialProfile q = shoot_townes(ShootingOptions{});
    RadialProfile q0 = normalize_q0(q);
    const double a_star = critical_mass(q);
    const std::vector<double> s_list{1.0, 2.0, 3.0, 4.0};
    TownesConstants constants = townes_constants(q0, a_star, s_list);
    return TownesReference{std::move(q), std::move(q0), std::move(constants)};
  }();
  return ref;
}

double gn_deficit(const Field2D& v, double a_star) {
  const double l2 = lp_norm(v, 2.0);
  const double l4 = lp_norm(v, 4.0);
  return grad_norm_sq(v) * l2 * l2 - 0.5 * a_star * l4 * l4 * l4 * l4;
}

namespace {

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_profile(std::ostream& out, const RadialProfile& q) {
  const auto r = q.grid().nodes();
  const auto f = q.values();
  out << "# r_max=" << format17(q.grid().r_max()) << " q0=" << format17(f[0]) << " intervals=" << (r.size() - 1)
      << " even=" << (q.even() ? 1 : 0) << '\n';
  for (std::size_t i = 0; i < r.size(); ++i) out << format17(r[i]) << ' ' << format17(f[i]) << '\n';
}

RadialProfile read_profile(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# ", 0) != 0) throw InvalidArgument("profile header missing");
  double r_max = 0.0, q0 = 0.0;
  long intervals = 0;
  int even = 1;
  if (std::sscanf(header.c_str(), "# r_max=%lf q0=%lf intervals=%ld even=%d", &r_max, &q0, &intervals, &even) != 4) {
    throw InvalidArgument("malformed profile header: " + header);
  }
  const RadialGrid grid(r_max, static_cast<int>(intervals));
  std::vector<double> values;
  values.reserve(grid.n_points());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double r = 0.0, v = 0.0;
    if (!(row >> r >> v)) throw InvalidArgument("malformed profile row: " + line);
    const std::size_t i = values.size();
    if (i >= grid.nodes().size() || std::abs(r - grid.nodes()[i]) > 1e-12 * r_max) {
      throw InvalidArgument("profile radii do not match the header grid");
    }
    values.push_back(v);
  }
  if (values.size() != grid.nodes().size()) throw InvalidArgument("profile row count does not match header");
  if (values[0] != q0) throw InvalidArgument("profile header q0 disagrees with the first sample");
  return RadialProfile(grid, std::move(values), even != 0);
}

}  // namespace cqnls

#include "cqnls/kernels.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include "cqnls/radial.hpp"
#include "cqnls/spectral.hpp"

namespace cqnls {

namespace {

constexpr int kQuadratureIntervals = 8000;
constexpr double kMinCellsPerWidth = 4.0;
/// A 16-point grid obeying the width rule spans about 4.7 standard deviations of a Gaussian factor,
/// which truncates its normalization by a few 1e-6.
constexpr double kThreeBodyContainment = 1e-5;

/// Radius where the profile first falls to half its maximum, refined by bisection.
double half_max_radius(const RadialFunction& f, double support, double peak) {
  const int steps = kQuadratureIntervals;
  const double dr = support / steps;
  for (int i = 1; i <= steps; ++i) {
    if (f(i * dr) <= 0.5 * peak) {
      double lo = (i - 1) * dr, hi = i * dr;
      for (int k = 0; k < 80; ++k) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) <= 0.5 * peak ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  throw InvalidArgument("kernel profile never falls to half its maximum within its support");
}

void require_finite_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be finite and > 0");
}

void require_resolved(double width, double scale, const CartesianGrid2D& grid, const char* what) {
  require_finite_positive(scale, "kernel scale");
  const double scaled = width / scale;
  if (scaled < kMinCellsPerWidth * grid.spacing()) {
    std::ostringstream msg;
    msg << what << " kernel at scale " << scale << " has width " << scaled << ", narrower than "
        << kMinCellsPerWidth << " cells of " << grid.spacing();
    throw UnderResolved(msg.str());
  }
}

/// Rows "r value" on a uniform grid from r = 0, as a cubic Hermite profile.
RadialFunction load_profile(const std::string& path, double& support) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open kernel file " + path);
  std::vector<double> rs, vs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    double r = 0.0, v = 0.0;
    if (!(row >> r >> v)) throw InvalidArgument("malformed row in kernel file " + path + ": " + line);
    rs.push_back(r);
    vs.push_back(v);
  }
  if (rs.size() < 5 || rs.front() != 0.0) {
    throw InvalidArgument("kernel file " + path + " needs at least 5 rows starting at r = 0");
  }
  const int intervals = static_cast<int>(rs.size()) - 1;
  if (intervals % 2 != 0) throw InvalidArgument("kernel file " + path + " needs an even number of intervals");
  const double dr = rs.back() / intervals;
  for (int i = 0; i <= intervals; ++i) {
    if (std::abs(rs[i] - i * dr) > 1e-9 * std::max(1.0, rs.back())) {
      throw InvalidArgument("kernel file " + path + " is not on a uniform radial grid");
    }
  }
  support = rs.back();
  auto profile = std::make_shared<RadialProfile>(RadialGrid(rs.back(), intervals), std::move(vs), true);
  return [profile](double r) { return (*profile)(r); };
}

struct KernelSpec {
  std::string path;
  double width = 1.0;
};

/// "gaussian", "gaussian:<width>" or "file:<path>"; an empty path means the Gaussian family.
KernelSpec parse_kernel_spec(const std::string& spec) {
  if (spec.rfind("file:", 0) == 0 && spec.size() > 5) return {spec.substr(5), 0.0};
  if (spec == "gaussian") return {};
  if (spec.rfind("gaussian:", 0) == 0) {
    try {
      std::size_t used = 0;
      const double w = std::stod(spec.substr(9), &used);
      if (used == spec.size() - 9) return {"", w};
    } catch (const std::exception&) {
    }
  }
  throw InvalidArgument("unknown kernel '" + spec + "' (expected gaussian, gaussian:<width> or file:<path>)");
}

}  // namespace

TwoBodyKernel::TwoBodyKernel(RadialFunction profile, double alpha, double support, std::string name)
    : profile_(std::move(profile)), alpha_(alpha), support_(support), name_(std::move(name)) {
  if (!profile_) throw InvalidArgument("two-body kernel has no profile");
  require_finite_positive(alpha_, "alpha");
  require_finite_positive(support_, "kernel support");
  const RadialGrid grid(support_, kQuadratureIntervals);
  std::vector<double> u(grid.n_points()), ru(grid.n_points());
  for (int i = 0; i < grid.n_points(); ++i) {
    const double r = grid.nodes()[i];
    u[i] = profile_(r);
    if (!(u[i] >= 0.0) || !std::isfinite(u[i])) {
      throw InvalidArgument("two-body kernel '" + name_ + "' must be finite and >= 0");
    }
    ru[i] = r * u[i];
    sup_norm_ = std::max(sup_norm_, u[i]);
  }
  l1_norm_ = grid.integrate(u);
  first_moment_ = grid.integrate(ru);
  if (std::abs(l1_norm_ - 1.0) > 1e-8) {
    std::ostringstream msg;
    msg << "two-body kernel '" << name_ << "' has mass " << l1_norm_ << ", expected 1 within 1e-8";
    throw InvalidArgument(msg.str());
  }
  if (!std::isfinite(first_moment_)) throw InvalidArgument("two-body kernel first moment is not finite");
  width_ = 2.0 * half_max_radius(profile_, support_, sup_norm_);
}

TwoBodyKernel TwoBodyKernel::gaussian(double alpha, double width) {
  require_finite_positive(width, "kernel width");
  const double c = 1.0 / (2.0 * std::numbers::pi * width * width);
  TwoBodyKernel k([c, width](double r) { return c * std::exp(-0.5 * r * r / (width * width)); }, alpha, 12.0 * width,
                  "gaussian");
  const double expected = width * std::sqrt(0.5 * std::numbers::pi);
  if (std::abs(k.first_moment() - expected) > 1e-6 * expected) {
    throw Error("gaussian two-body first moment disagrees with its closed form");
  }
  return k;
}

double TwoBodyKernel::scale(double n) const {
  require_finite_positive(n, "N");
  return std::pow(n, alpha_);
}

ThreeBodyKernel::ThreeBodyKernel(RadialFunction factor, double beta, double support, std::string name)
    : factor_(std::move(factor)), beta_(beta), support_(support), name_(std::move(name)) {
  if (!factor_) throw InvalidArgument("three-body kernel has no factor");
  require_finite_positive(beta_, "beta");
  require_finite_positive(support_, "kernel support");
  double peak = 0.0;
  for (int i = 0; i <= kQuadratureIntervals; ++i) {
    const double v = factor_(support_ * i / kQuadratureIntervals);
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("three-body factor '" + name_ + "' must be finite and >= 0");
    }
    peak = std::max(peak, v);
  }
  width_ = 2.0 * half_max_radius(factor_, support_, peak);

  // Z = int f(u) (f * f)(u) du. A box of half-width 1.6 * support keeps periodic images of f
  // out of reach for |u| <= support.
  const CartesianGrid2D grid(1.6 * support_, 256);
  const Field2D f = Field2D::from_function(grid, [this](double x, double y) { return this->factor(std::hypot(x, y)); });
  normalization_ = inner(f, fft_convolve(f, f));
  require_finite_positive(normalization_, "three-body normalization");

  // W(x - y, x - z) must be invariant under permutations of (x, y, z).
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> coord(-support_ / 4.0, support_ / 4.0);
  const double tol = 1e-12 * peak * peak * peak / normalization_;
  for (int t = 0; t < 100; ++t) {
    const std::array<double, 2> x{coord(rng), coord(rng)}, y{coord(rng), coord(rng)}, z{coord(rng), coord(rng)};
    auto diff = [](std::array<double, 2> p, std::array<double, 2> q) { return std::array{p[0] - q[0], p[1] - q[1]}; };
    const double w0 = (*this)(diff(x, y), diff(x, z));
    const double w1 = (*this)(diff(y, x), diff(y, z));
    const double w2 = (*this)(diff(z, y), diff(z, x));
    if (std::abs(w0 - w1) > tol || std::abs(w0 - w2) > tol) {
      throw InvalidArgument("three-body kernel '" + name_ + "' is not permutation symmetric");
    }
  }
}

double ThreeBodyKernel::operator()(std::array<double, 2> u, std::array<double, 2> v) const {
  return factor(std::hypot(u[0], u[1])) * factor(std::hypot(v[0], v[1])) *
         factor(std::hypot(u[0] - v[0], u[1] - v[1])) / normalization_;
}

ThreeBodyKernel ThreeBodyKernel::gaussian(double beta, double width) {
  require_finite_positive(width, "kernel width");
  ThreeBodyKernel k([width](double r) { return std::exp(-0.5 * r * r / (width * width)); }, beta, 12.0 * width,
                    "gaussian");
  const double w2 = width * width;
  const double expected = 4.0 * std::numbers::pi * std::numbers::pi * w2 * w2 / 3.0;
  if (std::abs(k.normalization() - expected) > 1e-6 * expected) {
    throw Error("gaussian three-body normalization disagrees with its closed form");
  }
  return k;
}

double ThreeBodyKernel::scale(double n) const {
  require_finite_positive(n, "N");
  return std::pow(n, beta_);
}

KernelPair KernelPair::canonical(double alpha, double beta) {
  return {TwoBodyKernel::gaussian(alpha), ThreeBodyKernel::gaussian(beta)};
}

TwoBodyKernel two_body_from_spec(const std::string& spec, double alpha) {
  const KernelSpec k = parse_kernel_spec(spec);
  if (k.path.empty()) return TwoBodyKernel::gaussian(alpha, k.width);
  double support = 0.0;
  RadialFunction f = load_profile(k.path, support);
  return TwoBodyKernel(std::move(f), alpha, support, spec);
}

ThreeBodyKernel three_body_from_spec(const std::string& spec, double beta) {
  const KernelSpec k = parse_kernel_spec(spec);
  if (k.path.empty()) return ThreeBodyKernel::gaussian(beta, k.width);
  double support = 0.0;
  RadialFunction f = load_profile(k.path, support);
  return ThreeBodyKernel(std::move(f), beta, support, spec);
}

Field2D sample_two_body(const TwoBodyKernel& k, double lambda, const CartesianGrid2D& grid) {
  require_resolved(k.width(), lambda, grid, "two-body");
  Field2D u = Field2D::from_function(grid, [&](double x, double y) { return lambda * lambda * k(lambda * std::hypot(x, y)); });
  const double mass = integrate2d(u);
  if (std::abs(mass - k.l1_norm()) > 1e-6) {
    std::ostringstream msg;
    msg << "two-body kernel at scale " << lambda << " has discrete mass " << mass << " on a box of half-width "
        << grid.half_width() << "; it is not contained or not resolved";
    throw UnderResolved(msg.str());
  }
  u *= 1.0 / mass;
  return u;
}

Field2D scaled_two_body(const TwoBodyKernel& k, double n, const CartesianGrid2D& grid) {
  return sample_two_body(k, k.scale(n), grid);
}

SampledThreeBody sample_three_body(const ThreeBodyKernel& k, double mu, const CartesianGrid2D& grid) {
  require_resolved(k.width(), mu, grid, "three-body");
  const int m = grid.points();
  const double h = grid.spacing();
  Field2D factor(grid);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      factor(i, j) = k.factor(mu * h * std::hypot(signed_frequency(i, m), signed_frequency(j, m)));
    }
  }
  const ComplexVector spec = forward_fft(factor);
  std::vector<double> re(spec.size());
  CompensatedSum cubes;
  const int half = m / 2 + 1;
  for (std::size_t idx = 0; idx < spec.size(); ++idx) {
    re[idx] = spec[idx].real();
    const int j = static_cast<int>(idx % half);
    const double weight = (j == 0 || j == m / 2) ? 1.0 : 2.0;
    cubes.add(weight * re[idx] * re[idx] * re[idx]);
  }
  const double h2 = grid.cell_area();
  const double normalization = cubes.value() * h2 * h2 / static_cast<double>(grid.size());
  const double expected = k.normalization() / std::pow(mu, 4.0);
  if (std::abs(normalization - expected) > kThreeBodyContainment * expected) {
    std::ostringstream msg;
    msg << "three-body kernel at scale " << mu << " has discrete normalization " << normalization << " against "
        << expected << "; it is not contained or not resolved";
    throw UnderResolved(msg.str());
  }
  return {std::move(factor), std::move(re), normalization};
}

}  // namespace cqnls

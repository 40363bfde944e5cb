#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cqnls/errors.hpp"
#include "cqnls/fit.hpp"
#include "cqnls/grid.hpp"
#include "cqnls/radial.hpp"
#include "cqnls/spectral.hpp"
#include "cqnls/townes.hpp"
#include "generators.hpp"

using namespace cqnls;
using cqnls::testing::Gen;
using cqnls::testing::gaussian_field;
using std::numbers::pi;

TEST_CASE("grid places the origin at node M/2 and rejects bad sizes") {
  const CartesianGrid2D g(12.0, 64);
  CHECK(g.spacing() == doctest::Approx(24.0 / 64));
  CHECK(g.coord(32) == 0.0);
  CHECK(g.coord(0) == -12.0);
  CHECK_THROWS_AS(CartesianGrid2D(12.0, 48), InvalidArgument);
  CHECK_THROWS_AS(CartesianGrid2D(12.0, 8), InvalidArgument);
  CHECK_THROWS_AS(CartesianGrid2D(-1.0, 64), InvalidArgument);
}

TEST_CASE("compensated sum recovers cancellations a naive sum loses") {
  CompensatedSum s;
  double naive = 0.0;
  for (double x : {1.0, 1e100, 1.0, -1e100}) {
    s.add(x);
    naive += x;
  }
  CHECK(s.value() == 2.0);
  CHECK(naive != 2.0);
}

TEST_CASE("fields on different grids do not mix") {
  Field2D a(CartesianGrid2D(4.0, 16));
  const Field2D b(CartesianGrid2D(5.0, 16));
  CHECK_THROWS_AS(a += b, GridMismatch);
}

// Closed forms for g = exp(-r^2 / (2 w^2)): int g = 2 pi w^2, ||g||^2 = pi w^2, ||grad g||^2 = pi.
TEST_CASE("Gaussian integrals match closed forms") {
  const CartesianGrid2D grid(12.0, 128);
  for (double w : {0.7, 1.0, 1.5}) {
    const Field2D g = gaussian_field(grid, w);
    CHECK(integrate2d(g) == doctest::Approx(2 * pi * w * w).epsilon(1e-12));
    CHECK(inner(g, g) == doctest::Approx(pi * w * w).epsilon(1e-12));
    CHECK(grad_norm_sq(g) == doctest::Approx(pi).epsilon(1e-10));
    // ||g||_4^4 = int exp(-2 r^2 / w^2) = pi w^2 / 2.
    CHECK(std::pow(lp_norm(g, 4.0), 4.0) == doctest::Approx(pi * w * w / 2).epsilon(1e-12));
  }
}

TEST_CASE("FFT convolution of normalized Gaussians adds variances") {
  const CartesianGrid2D grid(12.0, 128);
  const double w1 = 0.8, w2 = 1.1, w = std::hypot(w1, w2);
  Field2D f = gaussian_field(grid, w1, 0.5, -0.25);
  f *= 1.0 / (2 * pi * w1 * w1);
  Field2D k = gaussian_field(grid, w2);
  k *= 1.0 / (2 * pi * w2 * w2);
  Field2D expected = gaussian_field(grid, w, 0.5, -0.25);
  expected *= 1.0 / (2 * pi * w * w);
  const Field2D got = fft_convolve(f, k);
  CHECK((got - expected).max_abs() < 1e-13);
}

TEST_CASE("negative Laplacian of a Gaussian matches the analytic form") {
  const CartesianGrid2D grid(10.0, 128);
  const double w = 1.2;
  const Field2D g = gaussian_field(grid, w);
  const Field2D expected = Field2D::from_function(grid, [w](double x, double y) {
    const double r2 = x * x + y * y;
    return (2.0 / (w * w) - r2 / (w * w * w * w)) * std::exp(-0.5 * r2 / (w * w));
  });
  CHECK((neg_laplacian(g) - expected).max_abs() < 1e-11);
}

TEST_CASE("property: FFT round trip, Parseval and multiplier identities on random fields") {
  Gen gen(101);
  for (int trial = 0; trial < 20; ++trial) {
    const CartesianGrid2D grid(gen.uniform(3.0, 9.0), 1 << gen.integer(4, 6));
    const Field2D f = gen.noise(grid);
    const Field2D back = inverse_fft(grid, forward_fft(f));
    CHECK((back - f).max_abs() < 1e-13 * grid.size());

    const ComplexVector spec = forward_fft(f);
    const int m = grid.points();
    double energy = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j <= m / 2; ++j) {
        const double weight = (j == 0 || j == m / 2) ? 1.0 : 2.0;
        energy += weight * std::norm(spec[static_cast<std::size_t>(i) * (m / 2 + 1) + j]);
      }
    }
    CHECK(energy * grid.cell_area() / grid.size() == doctest::Approx(inner(f, f)).epsilon(1e-12));

    const Field2D identity = apply_multiplier(f, [](double) { return 1.0; });
    CHECK((identity - f).max_abs() < 1e-12);
    const Field2D lap = apply_multiplier(f, [](double k2) { return k2; });
    CHECK((lap - neg_laplacian(f)).max_abs() < 1e-9 * (1.0 + neg_laplacian(f).max_abs()));
  }
}

TEST_CASE("property: normalization, inner-product symmetry and convolution commutativity") {
  Gen gen(202);
  const CartesianGrid2D grid(13.0, 64);
  for (int trial = 0; trial < 20; ++trial) {
    const Field2D f = gen.bumps(grid, 1.0, false);
    const Field2D g = gen.bumps(grid, 1.0, true);
    CHECK(inner(normalized(f), normalized(f)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(inner(f, g) == doctest::Approx(inner(g, f)).epsilon(1e-15));
    const Field2D fg = fft_convolve(f, g), gf = fft_convolve(g, f);
    CHECK((fg - gf).max_abs() < 1e-12 * (1.0 + fg.max_abs()));
    CHECK(std::abs(inner(f, g)) <= std::sqrt(inner(f, f) * inner(g, g)) * (1 + 1e-14));
  }
}

TEST_CASE("property: spectral shifts compose and move the centroid") {
  Gen gen(303);
  const CartesianGrid2D grid(14.0, 64);
  for (int trial = 0; trial < 10; ++trial) {
    const Field2D f = gen.normalized_bumps(grid, 1.0);
    const double dx = gen.uniform(-1.0, 1.0), dy = gen.uniform(-1.0, 1.0);
    const Field2D there = spectral_shift(f, dx, dy);
    const Field2D back = spectral_shift(there, -dx, -dy);
    CHECK((back - f).max_abs() < 1e-12);
    const auto [x0, y0] = density_centroid(f);
    const auto [x1, y1] = density_centroid(there);
    CHECK(x1 - x0 == doctest::Approx(dx).epsilon(1e-9));
    CHECK(y1 - y0 == doctest::Approx(dy).epsilon(1e-9));
  }
}

TEST_CASE("normalize rejects the zero field and lp_norm rejects p < 1") {
  Field2D z(CartesianGrid2D(4.0, 16));
  CHECK_THROWS_AS(normalize(z), InvalidArgument);
  CHECK_THROWS_AS(lp_norm(z, 0.5), InvalidArgument);
}

TEST_CASE("radial Simpson weights integrate the disk measure exactly for cubics in r") {
  const RadialGrid g(3.0, 60);
  std::vector<double> f;
  for (double r : g.nodes()) f.push_back(1.0 + r * r);
  // int_0^3 (1 + r^2) 2 pi r dr = 2 pi (9/2 + 81/4)
  CHECK(g.integrate(f) == doctest::Approx(2 * pi * (4.5 + 20.25)).epsilon(1e-13));
  CHECK(g.weights()[0] == 0.0);
  CHECK_THROWS_AS(RadialGrid(3.0, 7), InvalidArgument);
}

TEST_CASE("radial profile interpolation is fourth-order accurate") {
  auto max_error = [](int intervals) {
    const RadialGrid g(6.0, intervals);
    std::vector<double> v;
    for (double r : g.nodes()) v.push_back(std::exp(-r * r));
    const RadialProfile p(g, v, true);
    double err = 0.0;
    for (double r = 0.013; r < 5.9; r += 0.0517) err = std::max(err, std::abs(p(r) - std::exp(-r * r)));
    return err;
  };
  const double e1 = max_error(60), e2 = max_error(120);
  CHECK(e1 < 1e-4);
  CHECK(e1 / e2 > 12.0);
}

TEST_CASE("embedding a radial profile preserves the L2 norm under dilation") {
  const RadialGrid g(30.0, 3000);
  std::vector<double> v;
  for (double r : g.nodes()) v.push_back(std::exp(-0.5 * r * r) / std::sqrt(pi));
  const RadialProfile p(g, v, true);
  const CartesianGrid2D grid(12.0, 128);
  for (double scale : {0.7, 1.0, 1.6}) {
    const Field2D f = embed_scaled(p, grid, scale);
    CHECK(inner(f, f) == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(radial_to_field(RadialProfile(RadialGrid(5.0, 100), std::vector<double>(101, 1.0), true), grid),
                  InvalidArgument);
}

TEST_CASE("power-law fit recovers exact exponents and rejects degenerate data") {
  std::vector<double> xs{0.1, 0.2, 0.4, 0.8}, ys;
  for (double x : xs) ys.push_back(3.0 * std::pow(x, 1.75));
  const PowerLawFit fit = fit_power_law(xs, ys);
  CHECK(fit.exponent == doctest::Approx(1.75).epsilon(1e-13));
  CHECK(fit.prefactor == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-13));
  const std::vector<double> neg{1.0, -1.0, 2.0, 3.0};
  CHECK_THROWS_AS(fit_power_law(xs, neg), InvalidArgument);
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(fit_power_law(two, two), InvalidArgument);
}

TEST_CASE("integration and norms on trivial fields") {
  for (int m : {16, 32, 64}) {
    Field2D one(CartesianGrid2D(2.0, m));
    for (double& v : one.values()) v = 1.0;
    CHECK(integrate2d(one) == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(grad_norm_sq(one) == doctest::Approx(0.0));
  }
  const CartesianGrid2D grid(12.0, 256);
  CHECK(integrate2d(gaussian_field(grid, 1.0)) == doctest::Approx(2 * pi).epsilon(1e-8));
  const Field2D zero(grid);
  CHECK(integrate2d(zero) == 0.0);
  CHECK(lp_norm(zero, 4.0) == 0.0);
  CHECK(lp_norm(normalized(gaussian_field(grid, 0.9)), 2.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("kinetic energy of single Fourier modes is exact") {
  for (double l : {3.0, 7.5}) {
    const CartesianGrid2D grid(l, 32);
    // On [-L, L)^2, int |grad sin(pi x / L)|^2 = 2 pi^2 and int |grad cos(2 pi y / L)|^2 = 8 pi^2.
    const Field2D f = Field2D::from_function(grid, [l](double x, double y) {
      return std::sin(pi * x / l) + std::cos(2 * pi * y / l);
    });
    CHECK(grad_norm_sq(f) == doctest::Approx(10 * pi * pi).epsilon(1e-12));
  }
}

TEST_CASE("spectral kinetic energy agrees with a fourth-order finite-difference stencil") {
  const CartesianGrid2D grid(12.0, 256);
  const Field2D g = gaussian_field(grid, 1.0, 0.3, -0.2);
  const int m = grid.points();
  const double h = grid.spacing();
  auto wrap = [m](int i) { return (i % m + m) % m; };
  double fd = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double dx = (-g(wrap(i + 2), j) + 8 * g(wrap(i + 1), j) - 8 * g(wrap(i - 1), j) + g(wrap(i - 2), j)) / (12 * h);
      const double dy = (-g(i, wrap(j + 2)) + 8 * g(i, wrap(j + 1)) - 8 * g(i, wrap(j - 1)) + g(i, wrap(j - 2))) / (12 * h);
      fd += (dx * dx + dy * dy) * h * h;
    }
  }
  CHECK(std::abs(grad_norm_sq(g) - fd) < 1e-4);
  CHECK(grad_norm_sq(g) == doctest::Approx(pi).epsilon(1e-10));
}

TEST_CASE("convolving a unit-mass sample translates the kernel; a zero kernel gives zero") {
  const CartesianGrid2D grid(6.0, 64);
  const int m = grid.points();
  const Field2D kernel = gaussian_field(grid, 0.7, 0.4, -0.3);
  Field2D delta(grid);
  const int i0 = 41, j0 = 12;
  delta(i0, j0) = 1.0 / grid.cell_area();
  const Field2D out = fft_convolve(delta, kernel);
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double expected = kernel((i - i0 + m / 2 + m) % m, (j - j0 + m / 2 + m) % m);
      worst = std::max(worst, std::abs(out(i, j) - expected));
    }
  }
  CHECK(worst < 1e-14);
  CHECK(fft_convolve(delta, Field2D(grid)).max_abs() == 0.0);
}

TEST_CASE("power-law fit: constants give exponent zero and noisy data stay close") {
  const std::vector<double> xs{0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  const std::vector<double> flat(xs.size(), 2.5);
  const PowerLawFit f0 = fit_power_law(xs, flat);
  CHECK(f0.exponent == doctest::Approx(0.0));
  CHECK(f0.prefactor == doctest::Approx(2.5).epsilon(1e-14));
  Gen gen(77);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> ys;
    for (double x : xs) ys.push_back(std::pow(x, -0.5) * (1.0 + 0.01 * gen.uniform(-1.0, 1.0)));
    const PowerLawFit fit = fit_power_law(xs, ys);
    CHECK(std::abs(fit.exponent + 0.5) < 0.05);
    CHECK(fit.r_squared >= 0.0);
    CHECK(fit.r_squared <= 1.0);
  }
}

TEST_CASE("radial embedding reproduces constants, e^{-r}, and moves with its center") {
  const CartesianGrid2D grid(4.0, 64);
  const RadialGrid rg(6.0, 6000);
  const RadialProfile one(rg, std::vector<double>(rg.nodes().size(), 1.0), true);
  const Field2D c = radial_to_field(one, grid);
  for (double v : c.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  std::vector<double> decay;
  for (double r : rg.nodes()) decay.push_back(std::exp(-r));
  const RadialProfile p(rg, decay, false);
  const Field2D f = radial_to_field(p, grid);
  const Field2D exact = Field2D::from_function(grid, [](double x, double y) { return std::exp(-std::hypot(x, y)); });
  CHECK((f - exact).max_abs() < 1e-6);

  const Field2D moved = radial_to_field(p, grid, 1.5, -1.0);
  const auto peak = std::max_element(moved.values().begin(), moved.values().end()) - moved.values().begin();
  const int m = grid.points();
  CHECK(grid.coord(static_cast<int>(peak) / m) == doctest::Approx(1.5));
  CHECK(grid.coord(static_cast<int>(peak) % m) == doctest::Approx(-1.0));
}

TEST_CASE("the sampled Townes profile has the expected L4 norm") {
  const auto& ref = townes_reference();
  const Field2D q0 = embed_scaled(ref.q0, CartesianGrid2D(14.0, 256), 1.0);
  CHECK(lp_norm(q0, 4.0) == doctest::Approx(std::pow(2.0 / ref.constants.a_star, 0.25)).epsilon(1e-8));
  CHECK(grad_norm_sq(q0) == doctest::Approx(1.0).epsilon(2e-3));
}

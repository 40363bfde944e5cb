#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "cqnls/errors.hpp"
#include "cqnls/radial.hpp"
#include "cqnls/spectral.hpp"
#include "cqnls/townes.hpp"
#include "generators.hpp"

using namespace cqnls;
using cqnls::testing::Gen;
using std::numbers::pi;

namespace {

// Independent shooting oracle: classical RK4 at a fixed step on y = (Q, Q'), started from the
// two-term series at r = h, bisecting Q(0) on whether the orbit crosses zero or turns upward.
struct Orbit {
  bool overshoot;
  double mass;  // int_0^r_mass Q^2 2 pi r dr by the trapezoid rule
};

Orbit rk4_orbit(double q0, double h, double r_mass) {
  using Y = std::array<double, 2>;
  auto rhs = [](double r, const Y& y) { return Y{y[1], -y[1] / r + y[0] - y[0] * y[0] * y[0]}; };
  // Q(r) = q0 + c r^2 with c = (q0 - q0^3) / 4.
  const double c = (q0 - q0 * q0 * q0) / 4.0;
  double r = h;
  Y y{q0 + c * h * h, 2.0 * c * h};
  double mass = 0.5 * h * (y[0] * y[0] * 2 * pi * h);
  while (r < 40.0) {
    const Y k1 = rhs(r, y);
    const Y k2 = rhs(r + h / 2, {y[0] + h / 2 * k1[0], y[1] + h / 2 * k1[1]});
    const Y k3 = rhs(r + h / 2, {y[0] + h / 2 * k2[0], y[1] + h / 2 * k2[1]});
    const Y k4 = rhs(r + h, {y[0] + h * k3[0], y[1] + h * k3[1]});
    const double before = y[0] * y[0] * 2 * pi * r;
    for (int i = 0; i < 2; ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    r += h;
    if (r <= r_mass + 0.5 * h) mass += 0.5 * h * (before + y[0] * y[0] * 2 * pi * r);
    if (y[0] < 0.0) return {true, mass};
    if (y[1] > 0.0) return {false, mass};
  }
  return {true, mass};
}

std::pair<double, double> rk4_townes(double h) {
  double lo = 2.0, hi = 2.5;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rk4_orbit(mid, h, 9.0).overshoot ? hi : lo) = mid;
  }
  return {0.5 * (lo + hi), rk4_orbit(0.5 * (lo + hi), h, 9.0).mass};
}

}  // namespace

TEST_CASE("shooting agrees with an independent RK4 + Richardson oracle") {
  const auto [q_h, m_h] = rk4_townes(2e-3);
  const auto [q_h2, m_h2] = rk4_townes(1e-3);
  const double q_oracle = (16.0 * q_h2 - q_h) / 15.0;
  // The trapezoid mass is second order, so its extrapolation uses 4.
  const double mass_oracle = (4.0 * m_h2 - m_h) / 3.0;

  const RadialProfile q = shoot_townes();
  CHECK(central_value(q) == doctest::Approx(q_oracle).epsilon(1e-7));
  // The oracle stops at r = 9; the K0 tail beyond carries about 1e-6 of the mass.
  CHECK(critical_mass(q) == doctest::Approx(mass_oracle).epsilon(1e-5));
  CHECK(critical_mass(q) > mass_oracle);
}

TEST_CASE("Townes constants match the reference values within the stated tolerances") {
  const auto& ref = townes_reference();
  CHECK(std::abs(central_value(ref.q) - 2.2062) <= 1e-3);
  CHECK(std::abs(ref.constants.a_star - 11.7009) <= 2e-3);
  CHECK(townes_residual(ref.q, 30.0) < 1e-6);
  CHECK(ref.q.derivative_at_zero() == doctest::Approx(0.0));
}

TEST_CASE("norm identities hold for the normalized profile") {
  const auto& ref = townes_reference();
  const RadialNorms n = radial_norms(ref.q0);
  CHECK(std::abs(n.l2_sq - 1.0) <= 1e-6);
  CHECK(std::abs(n.grad_sq - 1.0) <= 1e-6);
  CHECK(std::abs(0.5 * ref.constants.a_star * n.l4_4 - 1.0) <= 1e-6);
  CHECK(ref.constants.q6 == doctest::Approx(n.l6_6 / 6.0).epsilon(1e-14));
}

TEST_CASE("Q6 and Q_s agree with Cartesian quadrature of the embedded profile") {
  const auto& ref = townes_reference();
  const CartesianGrid2D grid(14.0, 256);
  const Field2D q0 = embed_scaled(ref.q0, grid, 1.0);
  const double cart_q6 = std::pow(lp_norm(q0, 6.0), 6.0) / 6.0;
  CHECK(ref.constants.q6 == doctest::Approx(cart_q6).epsilon(1e-8));
  for (double s : {1.0, 2.0, 3.0, 4.0}) {
    const Field2D weighted = Field2D::from_function(grid, [&](double x, double y) {
      const double r = std::hypot(x, y);
      return std::pow(r, s) * ref.q0(r) * ref.q0(r);
    });
    // Odd s leaves a cusp |x|^s at the origin that limits the Cartesian rule to low order.
    const double tol = std::fmod(s, 2.0) == 0.0 ? 1e-7 : 1e-3;
    CHECK(ref.constants.qs_at(s) == doctest::Approx(s * integrate2d(weighted)).epsilon(tol));
  }
  CHECK_THROWS_AS(ref.constants.qs_at(2.5), InvalidArgument);
}

TEST_CASE("constants for a new trap power follow the weighted-moment definition") {
  const auto& ref = townes_reference();
  const std::vector<double> s_list{2.0, 6.0};
  const TownesConstants c = townes_constants(ref.q0, ref.constants.a_star, s_list);
  CHECK(c.qs_at(2.0) == doctest::Approx(ref.constants.qs_at(2.0)).epsilon(1e-14));
  std::vector<double> f;
  const auto nodes = ref.q0.grid().nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) f.push_back(std::pow(nodes[i], 6.0) * std::pow(ref.q0.values()[i], 2));
  CHECK(c.qs_at(6.0) == doctest::Approx(6.0 * ref.q0.grid().integrate(f)).epsilon(1e-12));
}

TEST_CASE("profile files round-trip exactly") {
  const auto& ref = townes_reference();
  std::stringstream io;
  write_profile(io, ref.q);
  const RadialProfile back = read_profile(io);
  REQUIRE(back.values().size() == ref.q.values().size());
  for (std::size_t i = 0; i < back.values().size(); ++i) CHECK(back.values()[i] == ref.q.values()[i]);
  std::stringstream bad("not a profile\n");
  CHECK_THROWS_AS(read_profile(bad), Error);
}

TEST_CASE("property: the Gagliardo-Nirenberg deficit is nonnegative on random normalized fields") {
  const auto& ref = townes_reference();
  Gen gen(404);
  const CartesianGrid2D grid(14.0, 128);
  double smallest = INFINITY;
  for (int trial = 0; trial < 100; ++trial) {
    const Field2D v = gen.normalized_bumps(grid, 1.5, gen.integer(0, 1) == 1);
    const double d = gn_deficit(v, ref.constants.a_star);
    smallest = std::min(smallest, d);
    CHECK(d >= -1e-8);
  }
  // The deficit is homogeneous of degree 4 in v.
  const Field2D v = gen.normalized_bumps(grid, 1.0);
  CHECK(gn_deficit(2.0 * v, ref.constants.a_star) ==
        doctest::Approx(16.0 * gn_deficit(v, ref.constants.a_star)).epsilon(1e-12));
  MESSAGE("smallest deficit over 100 fields: " << smallest);
}

TEST_CASE("the Gagliardo-Nirenberg deficit nearly vanishes at the Townes profile") {
  const auto& ref = townes_reference();
  for (double scale : {0.8, 1.0, 1.5}) {
    const Field2D q0 = embed_scaled(ref.q0, CartesianGrid2D(14.0, 256), scale);
    const double d = gn_deficit(q0, ref.constants.a_star);
    CHECK(std::abs(d) < 2e-3);
  }
}

TEST_CASE("the shot profile decays at the outer radius and solves the radial equation") {
  const auto& ref = townes_reference();
  CHECK(ref.q.values().back() < 1e-8);
  CHECK(ref.q.values().back() > 0.0);
  CHECK(townes_residual(ref.q, ref.q.grid().r_max() - 2.0) < 1e-8);
}

TEST_CASE("critical mass converges under radial refinement and is quadratic in the profile") {
  ShootingOptions coarse;
  ShootingOptions fine;
  fine.spacing = coarse.spacing / 2.0;
  const double a_coarse = critical_mass(shoot_townes(coarse));
  const double a_fine = critical_mass(shoot_townes(fine));
  CHECK(std::abs(a_fine - a_coarse) < 1e-6);

  const auto& ref = townes_reference();
  for (double lambda : {0.5, 3.0}) {
    CHECK(critical_mass(ref.q.scaled(lambda)) ==
          doctest::Approx(lambda * lambda * ref.constants.a_star).epsilon(1e-14));
  }
  CHECK(critical_mass(normalize_q0(ref.q)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trap constants are positive and vanish linearly as the trap power goes to zero") {
  const auto& ref = townes_reference();
  const std::vector<double> s_list{0.01, 0.02, 2.0};
  const TownesConstants c = townes_constants(ref.q0, ref.constants.a_star, s_list);
  CHECK(c.q6 > 0.0);
  CHECK(c.qs_at(2.0) > 0.0);
  // For small s, Q_s = s (1 + O(s)) because Q0 has unit mass.
  CHECK(c.qs_at(0.01) / c.qs_at(0.02) == doctest::Approx(0.5).epsilon(0.04));
  CHECK(c.qs_at(0.01) == doctest::Approx(0.01).epsilon(0.05));
  const std::vector<double> bad{0.0};
  CHECK_THROWS_AS(townes_constants(ref.q0, ref.constants.a_star, bad), InvalidArgument);
}

TEST_CASE("a wide Gaussian sits strictly above the Gagliardo-Nirenberg bound") {
  const auto& ref = townes_reference();
  const CartesianGrid2D grid(30.0, 128);
  Field2D v = Field2D::from_function(grid, [](double x, double y) { return std::exp(-(x * x + y * y) / 18.0); });
  normalize(v);
  CHECK(gn_deficit(v, ref.constants.a_star) > 0.0);
}

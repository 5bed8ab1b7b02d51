#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "cfsd/grid.hpp"
#include "cfsd/random_states.hpp"
#include "support.hpp"

using namespace cfsd;

TEST_CASE("grid construction invariants") {
  const auto g = SizeGrid::geometric(1e-4, 1e3, 512);
  CHECK(g.n() == 512);
  CHECK(g.x_min() == doctest::Approx(1e-4));
  CHECK(g.x_max() == doctest::Approx(1e3));
  // constant edge ratio
  const double rho = g.edges[1] / g.edges[0];
  for (int i = 1; i < g.n(); ++i) {
    CHECK(std::abs(g.edges[i + 1] / g.edges[i] - rho) < 1e-12 * rho);
  }
  for (int i = 0; i < g.n(); ++i) {
    CHECK(g.widths[i] > 0.0);
    CHECK(g.edges[i] < g.centers[i]);
    CHECK(g.centers[i] < g.edges[i + 1]);
  }
  const auto u = SizeGrid::uniform(0.0625, 16.0, 255);
  for (int i = 0; i < u.n(); ++i) {
    CHECK(u.widths[i] == doctest::Approx(u.widths[0]));
  }
}

TEST_CASE("moments: zero, single cell, projection") {
  const auto g = SizeGrid::geometric(1e-4, 1e3, 256);
  DensityState z;
  z.phi.assign(g.n(), 0.0);
  for (double r : {0.0, 1.0, 2.0}) CHECK(moment(g, z, r) == 0.0);

  DensityState one = z;
  const int j = 100;
  one.phi[j] = 1.0 / g.widths[j];
  for (double r : {0.0, 0.7, 1.0, 2.0}) {
    CHECK(moment(g, one, r) == doctest::Approx(std::pow(g.centers[j], r)));
  }

  // exp(-x): M1 -> Gamma(2) = 1 on a fine grid
  const auto fine = SizeGrid::uniform(1e-6, 60.0, 16384);
  const auto s = project_initial([](double x) { return std::exp(-x); }, fine);
  CHECK(moment(fine, s, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.time == 0.0);
  CHECK(s.ledger.initial_mass == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.ledger.leakage == 0.0);
}

TEST_CASE("moment is linear and monotone") {
  const auto g = SizeGrid::geometric(1e-3, 100.0, 128);
  std::mt19937_64 rng(7);
  const auto s1 = random_smooth_state(g, rng);
  const auto s2 = random_smooth_state(g, rng);
  DensityState sum;
  sum.phi.resize(g.n());
  for (int i = 0; i < g.n(); ++i) sum.phi[i] = 2.0 * s1.phi[i] + 3.0 * s2.phi[i];
  for (double r : {0.5, 1.0, 2.0}) {
    CHECK(moment(g, sum, r) ==
          doctest::Approx(2.0 * moment(g, s1, r) + 3.0 * moment(g, s2, r)));
    CHECK(moment(g, s1, r) >= 0.0);
  }
}

TEST_CASE("norms") {
  auto c = test::linear_coeffs();
  const auto g = SizeGrid::geometric(1e-4, 1e3, 256);
  std::mt19937_64 rng(11);
  const auto s = random_smooth_state(g, rng);
  CHECK(norm_E0(g, s, c.m) ==
        doctest::Approx(moment(g, s, 1.0) + moment(g, s, c.m)));
  CHECK(norm_Xr(g, s, 1.5) == doctest::Approx(moment(g, s, 1.5)));

  // single-cell mass below one with theta0 = 0: |.|_Y = x_j
  RateCoefficients c0 = c;
  c0.theta0 = 0.0;
  DensityState one;
  one.phi.assign(g.n(), 0.0);
  const int j = g.cell_of(0.02);
  one.phi[j] = 1.0 / g.widths[j];
  CHECK(norm_Y(g, one, c0) == doctest::Approx(g.centers[j]));

  // theta0=1/2, a=0, theta=1, m=2: ell is 1 below one and x^2 above
  RateCoefficients cw = c;
  set_zero_rate(cw);
  cw.theta = 1.0;
  double expect = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    const double x = g.centers[i];
    expect += (x < 1.0 ? 1.0 : x * x) * s.phi[i] * g.widths[i];
  }
  CHECK(norm_Y(g, s, cw) == doctest::Approx(expect));
}

TEST_CASE("projection rejects bad data") {
  const auto g = SizeGrid::geometric(1e-3, 10.0, 64);
  CHECK_THROWS_WITH_AS(
      project_initial([](double x) { return std::exp(-x / 100.0); }, g),
      doctest::Contains("support beyond x_max"), std::invalid_argument);
  CHECK_THROWS_AS(project_initial([](double x) { return 1.0 - x; }, g),
                  std::invalid_argument);
  const auto z = project_initial([](double) { return 0.0; }, g);
  for (double v : z.phi) CHECK(v == 0.0);
}

TEST_CASE("projection converges at second order") {
  // halving the spacing cuts the moment error by about four
  auto exact = 1.0;  // int x e^{-x}
  auto err = [&](int n) {
    const auto g = SizeGrid::uniform(1e-4, 60.0, n);
    const auto s = project_initial([](double x) { return std::exp(-x); }, g);
    return std::abs(moment(g, s, 2.0) - 2.0) + std::abs(moment(g, s, 1.0) - exact);
  };
  const double e1 = err(256), e2 = err(512);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.2));

  const auto gg = SizeGrid::geometric(1e-5, 200.0, 1024);
  const auto s = project_initial([](double x) { return std::exp(-x); }, gg);
  CHECK(s.ledger.balance_residual(moment(gg, s, 1.0)) == 0.0);
}

TEST_CASE("ledger balance accounting") {
  MassLedger led;
  led.initial_mass = 2.0;
  led.leakage = 0.25;
  led.overflow = 0.25;
  led.clip_added = 0.0;
  CHECK(led.balance_residual(1.5) == doctest::Approx(0.0));
  CHECK(led.balance_residual(1.5 + 2e-8) == doctest::Approx(1e-8));
}

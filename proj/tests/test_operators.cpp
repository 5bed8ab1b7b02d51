#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cfsd/operators.hpp"
#include "cfsd/quadrature.hpp"
#include "cfsd/random_states.hpp"
#include "support.hpp"

using namespace cfsd;

namespace {

double mass_of_rate(const SizeGrid& g, const std::vector<double>& rate) {
  double acc = 0.0;
  for (int i = 0; i < g.n(); ++i) acc += g.centers[i] * rate[i] * g.widths[i];
  return acc;
}

double number_of_rate(const SizeGrid& g, const std::vector<double>& rate) {
  double acc = 0.0;
  for (int i = 0; i < g.n(); ++i) acc += rate[i] * g.widths[i];
  return acc;
}

}  // namespace

TEST_CASE("assembly degenerate cases") {
  const auto g = SizeGrid::geometric(1e-4, 1e3, 128);

  auto c = test::linear_coeffs();
  set_zero_rate(c);
  const auto ops = assemble(c, g);
  CHECK(ops.frag_gain.empty());
  CHECK(ops.channels.empty());
  for (double v : ops.frag_loss) CHECK(v == 0.0);

  // uniform interior second-difference stencil
  const auto u = SizeGrid::uniform(0.5, 64.5, 64);
  const auto opsu = assemble(c, u);
  const double h2 = u.widths[10] * u.widths[10];
  CHECK(opsu.diff_lower[10] == doctest::Approx(1.0 / h2));
  CHECK(opsu.diff_diag[10] == doctest::Approx(-2.0 / h2));
  CHECK(opsu.diff_upper[10] == doctest::Approx(1.0 / h2));
}

TEST_CASE("diffusion sign structure and mass column sums") {
  const auto g = SizeGrid::geometric(1e-4, 1e3, 256);
  auto c = test::linear_coeffs();
  const auto ops = assemble(c, g);
  for (int i = 0; i < g.n(); ++i) {
    CHECK(ops.diff_diag[i] < 0.0);
    if (i > 0) CHECK(ops.diff_lower[i] >= 0.0);
    if (i < g.n() - 1) CHECK(ops.diff_upper[i] >= 0.0);
  }
  // mass rate of the diffusion part equals the leak weight at the last cell
  std::mt19937_64 rng(3);
  const auto s = random_smooth_state(g, rng);
  const auto rate = apply_diffusion(ops, s.phi);
  const double drift = mass_of_rate(g, rate);
  const double leak = diffusion_leak_weight(ops) * s.phi[g.n() - 1];
  CHECK(drift == doctest::Approx(-leak).epsilon(1e-12));
}

TEST_CASE("fragmentation renormalization and exact mass neutrality") {
  const auto g = SizeGrid::geometric(1e-4, 1e3, 256);
  auto c = test::linear_coeffs();
  const auto ops = assemble(c, g);
  REQUIRE_FALSE(ops.frag_gain.empty());

  // resolved parents renormalize to within round-off of one
  for (int j = g.first_center_above(4.0 * g.x_min()); j < g.n(); ++j) {
    CHECK(std::abs(ops.frag_renorm[j] - 1.0) < 1e-9);
  }
  // gain entries nonnegative
  for (double v : ops.frag_gain) CHECK(v >= 0.0);

  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto s = random_smooth_state(g, rng);
    const auto rate = apply_frag(ops, s.phi);
    double gross = 0.0;
    for (int i = 0; i < g.n(); ++i) {
      gross += g.centers[i] * ops.frag_loss[i] * std::abs(s.phi[i]) * g.widths[i];
    }
    CHECK(std::abs(mass_of_rate(g, rate)) <= 1e-13 * std::max(gross, 1e-300));
  }

  // a == 0 gives the zero operator
  auto c0 = test::linear_coeffs();
  set_zero_rate(c0);
  const auto ops0 = assemble(c0, g);
  const auto s0 = random_smooth_state(g, rng);
  const auto rate0 = apply_frag(ops0, s0.phi);
  for (double v : rate0) CHECK(v == 0.0);
}

TEST_CASE("fragmentation number production for linear rate, uniform daughters") {
  // number rate = M1 for a(x)=x, b=2/y: each breakup nets one extra particle
  const auto g = SizeGrid::geometric(1e-6, 1e3, 512);
  auto c = test::linear_coeffs();
  const auto ops = assemble(c, g);
  const auto s = project_initial([](double x) { return std::exp(-x); }, g);
  const auto rate = apply_frag(ops, s.phi);
  const double M1 = moment(g, s, 1.0);
  CHECK(number_of_rate(g, rate) == doctest::Approx(M1).epsilon(2e-5));
}

TEST_CASE("coalescence bilinearity and symmetry") {
  const auto g = SizeGrid::geometric(1e-4, 1e3, 128);
  auto c = test::benchmark_coeffs();
  const auto ops = assemble(c, g);
  std::mt19937_64 rng(17);
  const auto f1 = random_smooth_state(g, rng);
  const auto f2 = random_smooth_state(g, rng);

  const auto base = apply_coag(ops, f1.phi, f2.phi);
  std::vector<double> sf1(f1.phi), sf2(f2.phi);
  for (auto& v : sf1) v *= 2.0;
  for (auto& v : sf2) v *= -0.5;
  const auto scaled = apply_coag(ops, sf1, sf2);
  for (int i = 0; i < g.n(); ++i) {
    CHECK(scaled.rate[i] == doctest::Approx(-1.0 * base.rate[i]).epsilon(1e-12));
  }

  // the gain term is swap-symmetric: the difference of the two orderings is
  // purely the loss asymmetry
  const auto ab = apply_coag(ops, f1.phi, f2.phi);
  const auto ba = apply_coag(ops, f2.phi, f1.phi);
  const auto lam1 = coag_loss_rates(ops, f1.phi);
  const auto lam2 = coag_loss_rates(ops, f2.phi);
  for (int i = 0; i < g.n(); ++i) {
    const double gain_ab = ab.rate[i] + f1.phi[i] * lam2[i];
    const double gain_ba = ba.rate[i] + f2.phi[i] * lam1[i];
    CHECK(gain_ab == doctest::Approx(gain_ba).epsilon(1e-12));
  }

  // zero in either slot kills the output
  std::vector<double> zero(g.n(), 0.0);
  const auto z = apply_coag(ops, zero, f1.phi);
  for (int i = 0; i < g.n(); ++i) CHECK(z.rate[i] == 0.0);
}

TEST_CASE("constant-kernel monodisperse moment rates") {
  const auto g = SizeGrid::geometric(1e-4, 1e3, 512);
  RateCoefficients c;
  set_zero_rate(c);
  set_powerlaw_daughters(c, 0.0);
  c.theta0 = 0.5;
  c.theta = 0.75;
  c.m = 2.0;
  const double kappa = 0.7;
  set_constant_kernel(c, kappa);
  certify_kernel_constants(c);
  const auto ops = assemble(c, g);

  DensityState s;
  s.phi.assign(g.n(), 0.0);
  const int j = g.cell_of(2.0);  // 2*x_j well inside the grid
  s.phi[j] = 3.0 / g.widths[j];
  const double M0 = moment(g, s, 0.0);

  const auto out = apply_coag(ops, s.phi, s.phi);
  CHECK(number_of_rate(g, out.rate) ==
        doctest::Approx(-0.5 * kappa * M0 * M0).epsilon(1e-12));
  CHECK(std::abs(mass_of_rate(g, out.rate)) <=
        1e-13 * std::max(out.gross_mass_flux, 1e-300));
  CHECK(out.overflow_mass == 0.0);
}

TEST_CASE("coalescence mass neutrality for compactly supported states") {
  const auto g = SizeGrid::geometric(1e-4, 1e3, 256);
  auto c = test::benchmark_coeffs();
  const auto ops = assemble(c, g);
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const auto s = random_compact_state(g, rng, 0.5 * g.x_max());
    const auto out = apply_coag(ops, s.phi, s.phi);
    CHECK(out.overflow_mass == 0.0);
    CHECK(std::abs(mass_of_rate(g, out.rate)) <=
          1e-13 * std::max(out.gross_mass_flux, 1e-300));
  }
}

TEST_CASE("overflow channel books the mass of out-of-range products") {
  const auto g = SizeGrid::geometric(1e-4, 10.0, 128);
  auto c = test::benchmark_coeffs(0.5);
  const auto ops = assemble(c, g);
  DensityState s;
  s.phi.assign(g.n(), 0.0);
  const int j = g.cell_of(8.0);  // merging two of these overflows
  s.phi[j] = 1.0 / g.widths[j];
  const auto out = apply_coag(ops, s.phi, s.phi);
  CHECK(out.overflow_mass > 0.0);
  // the interior mass rate must equal minus the overflow rate
  CHECK(mass_of_rate(g, out.rate) == doctest::Approx(-out.overflow_mass));
}

TEST_CASE("gain positivity") {
  const auto g = SizeGrid::geometric(1e-4, 1e3, 128);
  auto c = test::benchmark_coeffs();
  const auto ops = assemble(c, g);
  std::mt19937_64 rng(29);
  const auto s = random_smooth_state(g, rng);
  // the coalescence gain alone: subtract the loss part
  const auto out = apply_coag(ops, s.phi, s.phi);
  const auto lam = coag_loss_rates(ops, s.phi);
  for (int i = 0; i < g.n(); ++i) {
    CHECK(out.rate[i] + s.phi[i] * lam[i] >= -1e-18);
  }
  // fragmentation gain likewise
  const auto fr = apply_frag(ops, s.phi);
  for (int i = 0; i < g.n(); ++i) {
    CHECK(fr[i] + ops.frag_loss[i] * s.phi[i] >= -1e-18);
  }
}

TEST_CASE("bilinear bound ratios") {
  const auto g = SizeGrid::geometric(1e-4, 1e3, 256);
  auto c = test::benchmark_coeffs();
  const auto ops = assemble(c, g);

  DensityState zero;
  zero.phi.assign(g.n(), 0.0);
  const auto rz = check_bilinear_bound(ops, zero, zero);
  CHECK(rz.ratio_quotient == 0.0);
  CHECK(rz.ratio_split == 0.0);
  CHECK(rz.pass);

  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const auto a = random_smooth_state(g, rng);
    const auto b = random_smooth_state(g, rng);
    const auto r = check_bilinear_bound(ops, a, b);
    INFO("rep=", rep, " rq=", r.ratio_quotient, " rs=", r.ratio_split);
    CHECK(r.ratio_quotient <= 1.0);
    CHECK(r.ratio_split <= 1.0);
    CHECK(r.pass);
  }
}

TEST_CASE("coordinate export") {
  const auto g = SizeGrid::geometric(1e-3, 10.0, 16);
  auto c = test::linear_coeffs();
  const auto ops = assemble(c, g);
  std::ostringstream diff, frag;
  export_coordinate(ops, diff, frag);
  CHECK(diff.str().find("# i j value") == 0);
  CHECK(frag.str().size() > 20);
}

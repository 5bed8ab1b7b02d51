#include "cfsd/random_states.hpp"

#include <cmath>

namespace cfsd {

namespace {

struct Mixture {
  double c[3], p[3], lam[3];
  double operator()(double x) const {
    double v = 0.0;
    for (int q = 0; q < 3; ++q) v += c[q] * std::pow(x, p[q]) * std::exp(-lam[q] * x);
    return v;
  }
};

Mixture draw_mixture(std::mt19937_64& rng, double amplitude) {
  std::uniform_real_distribution<double> uc(0.1, 1.0), up(1.0, 3.0), ul(0.7, 4.0);
  Mixture m;
  for (int q = 0; q < 3; ++q) {
    m.c[q] = amplitude * uc(rng) / 3.0;
    m.p[q] = up(rng);
    m.lam[q] = ul(rng);
  }
  return m;
}

}  // namespace

DensityState random_smooth_state(const SizeGrid& g, std::mt19937_64& rng,
                                 double amplitude) {
  const Mixture m = draw_mixture(rng, amplitude);
  return project_initial([&](double x) { return m(x); }, g);
}

DensityState random_compact_state(const SizeGrid& g, std::mt19937_64& rng,
                                  double x_cut, double amplitude) {
  const Mixture m = draw_mixture(rng, amplitude);
  // smooth cutoff well inside x_cut so no mass sits near the overflow edge
  const double x0 = 0.5 * x_cut;
  DensityState s;
  s.phi.assign(g.n(), 0.0);
  for (int i = 0; i < g.n(); ++i) {
    const double x = g.centers[i];
    if (x >= x_cut) break;
    const double taper = x < x0 ? 1.0 : 0.5 * (1.0 + std::cos(M_PI * (x - x0) / (x_cut - x0)));
    s.phi[i] = m(x) * taper;
  }
  s.ledger.initial_mass = moment(g, s, 1.0);
  return s;
}

std::vector<double> random_nonpositive_field(const SizeGrid& g,
                                             std::mt19937_64& rng,
                                             double amplitude) {
  const Mixture m = draw_mixture(rng, amplitude);
  std::vector<double> v(g.n());
  for (int i = 0; i < g.n(); ++i) v[i] = -m(g.centers[i]);
  return v;
}

}  // namespace cfsd

#include "cfsd/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cfsd/quadrature.hpp"

namespace cfsd {

namespace {

SizeGrid finish(std::vector<double> edges, SizeGrid::Spacing sp) {
  SizeGrid g;
  g.edges = std::move(edges);
  g.spacing = sp;
  const int n = int(g.edges.size()) - 1;
  g.centers.resize(n);
  g.widths.resize(n);
  for (int i = 0; i < n; ++i) {
    g.centers[i] = 0.5 * (g.edges[i] + g.edges[i + 1]);
    g.widths[i] = g.edges[i + 1] - g.edges[i];
    if (!(g.widths[i] > 0.0)) throw std::invalid_argument("grid: widths must be positive");
  }
  return g;
}

}  // namespace

SizeGrid SizeGrid::geometric(double x_min, double x_max, int n) {
  if (!(0.0 < x_min && x_min < 1.0 && 1.0 < x_max) || n < 8) {
    throw std::invalid_argument("grid: need 0 < x_min < 1 < x_max and n >= 8");
  }
  std::vector<double> e(n + 1);
  const double la = std::log(x_min), lb = std::log(x_max);
  for (int i = 0; i <= n; ++i) e[i] = std::exp(la + (lb - la) * i / double(n));
  e.front() = x_min;
  e.back() = x_max;
  return finish(std::move(e), Spacing::geometric);
}

SizeGrid SizeGrid::uniform(double x_min, double x_max, int n) {
  if (!(0.0 < x_min && x_min < x_max) || n < 8) {
    throw std::invalid_argument("grid: need 0 < x_min < x_max and n >= 8");
  }
  std::vector<double> e(n + 1);
  for (int i = 0; i <= n; ++i) e[i] = x_min + (x_max - x_min) * i / double(n);
  e.front() = x_min;
  e.back() = x_max;
  return finish(std::move(e), Spacing::uniform);
}

int SizeGrid::cell_of(double x) const {
  if (x <= edges.front()) return 0;
  if (x >= edges.back()) return n() - 1;
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  return int(it - edges.begin()) - 1;
}

int SizeGrid::first_center_above(double x) const {
  auto it = std::upper_bound(centers.begin(), centers.end(), x);
  return int(it - centers.begin());
}

double MassLedger::balance_residual(double interior_M1) const {
  const double scale = std::max(std::abs(initial_mass), 1e-300);
  return (interior_M1 + leakage + overflow - clip_added - initial_mass) / scale;
}

double moment(const SizeGrid& g, const DensityState& s, double r) {
  double acc = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    acc += std::pow(g.centers[i], r) * s.phi[i] * g.widths[i];
  }
  return acc;
}

double moment_abs(const SizeGrid& g, const DensityState& s, double r) {
  double acc = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    acc += std::pow(g.centers[i], r) * std::abs(s.phi[i]) * g.widths[i];
  }
  return acc;
}

double norm_Xr(const SizeGrid& g, const DensityState& s, double r) {
  return moment_abs(g, s, r);
}

double norm_E0(const SizeGrid& g, const DensityState& s, double m) {
  return moment_abs(g, s, 1.0) + moment_abs(g, s, m);
}

double norm_Y(const SizeGrid& g, const DensityState& s, const RateCoefficients& c) {
  double acc = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    acc += eval_ell(g.centers[i], c) * std::abs(s.phi[i]) * g.widths[i];
  }
  return acc;
}

DensityState project_initial(const std::function<double(double)>& f,
                             const SizeGrid& g) {
  // reject data the grid would silently truncate
  const double interior_scale = std::max(std::abs(f(g.centers[g.n() / 2])), 1.0);
  for (int q = 1; q <= 8; ++q) {
    const double x = g.x_max() * (1.0 + 0.35 * q);
    const double v = f(x);
    if (std::abs(v) > 1e-12 * interior_scale) {
      std::ostringstream os;
      os << "project_initial: initial datum has support beyond x_max="
         << g.x_max() << " (f(" << x << ")=" << v
         << "); enlarge the grid or truncate explicitly";
      throw std::invalid_argument(os.str());
    }
  }

  DensityState s;
  s.phi.resize(g.n());
  s.time = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    const double avg =
        quad::gauss4([&](double x) {
          const double v = f(x);
          if (v < 0.0) {
            throw std::invalid_argument("project_initial: negative sample");
          }
          return v;
        }, g.edges[i], g.edges[i + 1]) /
        g.widths[i];
    s.phi[i] = avg;
  }
  s.ledger.initial_mass = moment(g, s, 1.0);
  return s;
}

}  // namespace cfsd

#include "cfsd/operators.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cfsd/quadrature.hpp"

namespace cfsd {

namespace {

struct DaughterSlice {
  double number = 0.0;
  double mass = 0.0;
};

// number and mass of daughters of a parent of size y falling in [lo, hi].
// lo == 0 is integrated with geometric subdivision toward the (possibly
// singular) origin.
DaughterSlice daughter_cell_integrals(const RateCoefficients& c, double y,
                                      double lo, double hi) {
  DaughterSlice s;
  if (hi <= lo) return s;
  if (c.b_mass_cdf && c.b_number_cdf) {
    s.mass = c.b_mass_cdf(y, hi) - c.b_mass_cdf(y, lo);
    s.number = c.b_number_cdf(y, hi) - c.b_number_cdf(y, lo);
    return s;
  }
  auto piece = [&](double a, double b) {
    s.mass += quad::gauss4([&](double x) { return x * c.b(x, y); }, a, b);
    s.number += quad::gauss4([&](double x) { return c.b(x, y); }, a, b);
  };
  if (lo > 0.0) {
    piece(lo, hi);
    return s;
  }
  double right = hi;
  for (int q = 0; q < 40 && right > hi * 1e-12; ++q) {
    const double left = right * 0.5;
    piece(left, right);
    right = left;
  }
  return s;
}

}  // namespace

DiscreteOperators assemble(const RateCoefficients& c, const SizeGrid& g,
                           const AssembleOptions& opt) {
  DiscreteOperators ops;
  ops.grid = g;
  ops.coeffs = c;
  ops.diffusion_on = opt.diffusion;
  const int n = g.n();

  // diffusion: flux form with a zero ghost at size 0 and an absorbing right edge
  ops.diff_lower.assign(n, 0.0);
  ops.diff_diag.assign(n, 0.0);
  ops.diff_upper.assign(n, 0.0);
  ops.ghost_h_left = g.centers[0];
  ops.ghost_h_right = g.edges[n] - g.centers[n - 1];
  if (opt.diffusion) {
    for (int i = 0; i < n; ++i) {
      const double hl = (i == 0) ? ops.ghost_h_left : g.centers[i] - g.centers[i - 1];
      const double hr = (i == n - 1) ? ops.ghost_h_right : g.centers[i + 1] - g.centers[i];
      const double w = g.widths[i];
      if (i > 0) ops.diff_lower[i] = 1.0 / (hl * w);
      if (i < n - 1) ops.diff_upper[i] = 1.0 / (hr * w);
      ops.diff_diag[i] = -(1.0 / hl + 1.0 / hr) / w;
    }
  }

  // fragmentation
  ops.frag_loss.assign(n, 0.0);
  ops.frag_col_offset.assign(n + 1, 0);
  if (opt.fragmentation && c.frag_active) {
    for (int j = 0; j < n; ++j) {
      ops.frag_loss[j] = c.a(g.centers[j]);
      if (!std::isfinite(ops.frag_loss[j]) || ops.frag_loss[j] < 0.0) {
        throw std::runtime_error("assemble: fragmentation rate not finite/nonnegative");
      }
    }
    int off = 0;
    for (int j = 0; j < n; ++j) {
      ops.frag_col_offset[j] = off;
      off += j + 1;
    }
    ops.frag_col_offset[n] = off;
    ops.frag_gain.assign(off, 0.0);
    ops.frag_renorm.assign(n, 1.0);

    std::vector<double> births(n);
    for (int j = 0; j < n; ++j) {
      const double y = g.centers[j];
      std::fill(births.begin(), births.begin() + j + 1, 0.0);
      for (int i = 0; i <= j; ++i) {
        const double lo = (i == 0) ? 0.0 : g.edges[i];
        const double hi = std::min(g.edges[i + 1], y);
        const auto slice = daughter_cell_integrals(c, y, lo, hi);
        if (!(slice.mass >= 0.0) || !std::isfinite(slice.mass) ||
            !(slice.number >= 0.0) || !std::isfinite(slice.number)) {
          throw std::runtime_error("assemble: daughter integrals not finite/nonnegative");
        }
        if (slice.mass <= 0.0 || slice.number <= 0.0) continue;
        // two-pivot placement of the slice, preserving number and mass
        const double sbar = slice.mass / slice.number;
        if (sbar <= g.centers[0]) {
          births[0] += slice.mass / g.centers[0];  // sub-pivot daughters: keep the mass
        } else {
          int p = int(std::upper_bound(g.centers.begin(), g.centers.begin() + j + 1,
                                       sbar) - g.centers.begin()) - 1;
          p = std::min(std::max(p, 0), j - 1);
          const double eta = (g.centers[p + 1] - sbar) /
                             (g.centers[p + 1] - g.centers[p]);
          births[p] += eta * slice.number;
          births[p + 1] += (1.0 - eta) * slice.number;
        }
      }
      double mass_sum = 0.0;
      for (int i = 0; i <= j; ++i) mass_sum += g.centers[i] * births[i];
      if (!(mass_sum > 0.0)) {
        throw std::runtime_error("assemble: parent column carries no daughter mass");
      }
      const double cfac = y / mass_sum;
      ops.frag_renorm[j] = cfac;
      if (y > opt.renorm_guard_above * g.x_min() &&
          (cfac < 0.5 || cfac > 2.0)) {
        std::ostringstream os;
        os << "assemble: daughter renormalization " << cfac << " at parent "
           << y << " signals a grid inadequate for the given b";
        throw std::runtime_error(os.str());
      }
      const double aj = ops.frag_loss[j];
      // gain coefficient per (daughter cell i, parent j): density rate at i
      // per unit density at j; column mass is exact after renormalization
      for (int i = 0; i <= j; ++i) {
        ops.frag_gain[ops.frag_col_offset[j] + i] =
            aj * cfac * births[i] * g.widths[j] / g.widths[i];
      }
    }
  } else {
    ops.frag_loss.assign(n, 0.0);
  }

  // coalescence
  if (opt.coagulation && c.coag_active) {
    ops.kmat.assign(size_t(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double kij = c.k(g.centers[i], g.centers[j]);
        if (!std::isfinite(kij) || kij < 0.0) {
          throw std::runtime_error("assemble: kernel evaluation not finite/nonnegative");
        }
        ops.kmat[size_t(i) * n + j] = kij;
        ops.kmat[size_t(j) * n + i] = kij;
      }
    }
    ops.channels.reserve(size_t(n) * (n + 1) / 2);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double kij = ops.kernel(i, j);
        if (kij == 0.0) continue;
        CoagChannel ch;
        ch.i = i;
        ch.j = j;
        ch.w = 0.5 * kij * g.widths[i] * g.widths[j];
        const double v = g.centers[i] + g.centers[j];
        if (v > g.centers[n - 1]) {
          ch.p = -1;
          ch.eta = 0.0;
        } else {
          // bracketing pivots x_p <= v < x_{p+1}
          int p = int(std::upper_bound(g.centers.begin(), g.centers.end(), v) -
                      g.centers.begin()) - 1;
          p = std::clamp(p, 0, n - 2);
          ch.p = p;
          ch.eta = (g.centers[p + 1] - v) / (g.centers[p + 1] - g.centers[p]);
        }
        ops.channels.push_back(ch);
      }
    }
  }

  return ops;
}

std::vector<double> apply_diffusion(const DiscreteOperators& ops,
                                    const std::vector<double>& phi) {
  const int n = ops.n();
  std::vector<double> out(n, 0.0);
  if (!ops.diffusion_on) return out;
  for (int i = 0; i < n; ++i) {
    double v = ops.diff_diag[i] * phi[i];
    if (i > 0) v += ops.diff_lower[i] * phi[i - 1];
    if (i < n - 1) v += ops.diff_upper[i] * phi[i + 1];
    out[i] = v;
  }
  return out;
}

std::vector<double> apply_frag(const DiscreteOperators& ops,
                               const std::vector<double>& phi) {
  const int n = ops.n();
  std::vector<double> out(n, 0.0);
  if (ops.frag_gain.empty()) {
    for (int i = 0; i < n; ++i) out[i] = -ops.frag_loss[i] * phi[i];
    return out;
  }
  for (int j = 0; j < n; ++j) {
    const double pj = phi[j];
    if (pj == 0.0) continue;
    const double* col = ops.frag_gain.data() + ops.frag_col_offset[j];
    for (int i = 0; i <= j; ++i) out[i] += col[i] * pj;
  }
  for (int i = 0; i < n; ++i) out[i] -= ops.frag_loss[i] * phi[i];
  return out;
}

std::vector<double> coag_loss_rates(const DiscreteOperators& ops,
                                    const std::vector<double>& psi) {
  const int n = ops.n();
  std::vector<double> lam(n, 0.0);
  if (ops.kmat.empty()) return lam;
  for (int i = 0; i < n; ++i) {
    const double* row = ops.kmat.data() + size_t(i) * n;
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += row[j] * psi[j] * ops.grid.widths[j];
    lam[i] = s;
  }
  return lam;
}

CoagApplyResult apply_coag(const DiscreteOperators& ops,
                           const std::vector<double>& phi,
                           const std::vector<double>& psi) {
  const int n = ops.n();
  CoagApplyResult res;
  res.rate.assign(n, 0.0);
  if (ops.channels.empty()) return res;

  const auto& x = ops.grid.centers;
  const auto& dx = ops.grid.widths;

  double gain_mass = 0.0;
  for (const auto& ch : ops.channels) {
    const double pairing = (ch.i == ch.j)
                               ? phi[ch.i] * psi[ch.i]
                               : phi[ch.i] * psi[ch.j] + phi[ch.j] * psi[ch.i];
    const double births = ch.w * pairing;  // number rate of merged particles
    if (births == 0.0) continue;
    const double v = x[ch.i] + x[ch.j];
    if (ch.p < 0) {
      res.overflow_number += births;
      res.overflow_mass += births * v;
    } else {
      res.rate[ch.p] += ch.eta * births / dx[ch.p];
      res.rate[ch.p + 1] += (1.0 - ch.eta) * births / dx[ch.p + 1];
      gain_mass += births * v;
    }
  }

  const auto lam = coag_loss_rates(ops, psi);
  double loss_mass = 0.0;
  for (int i = 0; i < n; ++i) {
    res.rate[i] -= phi[i] * lam[i];
    loss_mass += x[i] * phi[i] * lam[i] * dx[i];
  }
  res.gross_mass_flux = gain_mass + res.overflow_mass + std::abs(loss_mass);
  return res;
}

double diffusion_leak_weight(const DiscreteOperators& ops) {
  if (!ops.diffusion_on) return 0.0;
  return 1.0 + ops.grid.centers[ops.n() - 1] / ops.ghost_h_right;
}

double discrete_daughter_deficiency(const DiscreteOperators& ops, double r) {
  // min over parents above 1 of 1 - (r-th moment of the placed daughters)
  // / x_j^r, recovered from the stored gain coefficients.
  const auto& g = ops.grid;
  const int n = ops.n();
  double dmin = 1.0;
  if (ops.frag_gain.empty()) return dmin;
  for (int j = g.first_center_above(1.0); j < n; ++j) {
    const double aj = ops.frag_loss[j];
    const double* col = ops.frag_gain.data() + ops.frag_col_offset[j];
    if (aj <= 0.0) continue;
    double rmom = 0.0;  // sum_i x_i^r * (renormalized births at i per parent)
    for (int i = 0; i <= j; ++i) {
      if (col[i] == 0.0) continue;
      rmom += col[i] * std::pow(g.centers[i], r) * g.widths[i] / (aj * g.widths[j]);
    }
    dmin = std::min(dmin, 1.0 - rmom / std::pow(g.centers[j], r));
  }
  return dmin;
}

BilinearBoundReport check_bilinear_bound(const DiscreteOperators& ops,
                                         const DensityState& psi,
                                         const DensityState& phi) {
  BilinearBoundReport rep;
  const auto& c = ops.coeffs;
  const auto out = apply_coag(ops, psi.phi, phi.phi);
  DensityState tmp;
  tmp.phi = out.rate;
  rep.lhs_E0 = norm_E0(ops.grid, tmp, c.m);

  const double psi_Y = norm_Y(ops.grid, psi, c);
  const double phi_Y = norm_Y(ops.grid, phi, c);
  const double psi_E0 = norm_E0(ops.grid, psi, c.m);
  const double phi_E0 = norm_E0(ops.grid, phi, c.m);

  rep.quotient_bound = 1.5 * c.kstar * psi_Y * phi_Y;
  rep.ratio_quotient =
      rep.quotient_bound > 0.0 ? rep.lhs_E0 / rep.quotient_bound : 0.0;
  rep.split_applicable = c.Kstar > 0.0;
  if (rep.split_applicable) {
    rep.split_bound = 1.5 * c.Kstar * (psi_Y * phi_E0 + psi_E0 * phi_Y);
    rep.ratio_split = rep.split_bound > 0.0 ? rep.lhs_E0 / rep.split_bound : 0.0;
  }
  const double tol = 1.0 + 1e-6;
  rep.pass = rep.ratio_quotient <= tol &&
             (!rep.split_applicable || rep.ratio_split <= tol);
  return rep;
}

void export_coordinate(const DiscreteOperators& ops, std::ostream& diff_out,
                       std::ostream& frag_out) {
  const int n = ops.n();
  diff_out << "# i j value\n";
  for (int i = 0; i < n; ++i) {
    if (i > 0 && ops.diff_lower[i] != 0.0)
      diff_out << i << ' ' << i - 1 << ' ' << ops.diff_lower[i] << '\n';
    diff_out << i << ' ' << i << ' ' << ops.diff_diag[i] << '\n';
    if (i < n - 1 && ops.diff_upper[i] != 0.0)
      diff_out << i << ' ' << i + 1 << ' ' << ops.diff_upper[i] << '\n';
  }
  frag_out << "# i j value\n";
  for (int j = 0; j < n; ++j) {
    double diag_extra = 0.0;
    if (!ops.frag_gain.empty()) {
      const double* col = ops.frag_gain.data() + ops.frag_col_offset[j];
      for (int i = 0; i < j; ++i) {
        if (col[i] != 0.0) frag_out << i << ' ' << j << ' ' << col[i] << '\n';
      }
      diag_extra = col[j];
    }
    const double d = diag_extra - ops.frag_loss[j];
    if (d != 0.0) frag_out << j << ' ' << j << ' ' << d << '\n';
  }
}

}  // namespace cfsd

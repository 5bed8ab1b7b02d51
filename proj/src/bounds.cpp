#include "cfsd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfsd {

namespace {

double rel_scale(double a, double b) {
  return std::max({std::abs(a), std::abs(b), 1e-300});
}

// sum over cells with pivot above `cut` of x^q * extra(x) * psi * dx
template <typename Extra>
double upper_sum(const SizeGrid& g, const std::vector<double>& psi, double cut,
                 double q, Extra&& extra) {
  double acc = 0.0;
  for (int i = g.first_center_above(cut); i < g.n(); ++i) {
    acc += std::pow(g.centers[i], q) * extra(i) * psi[i] * g.widths[i];
  }
  return acc;
}

}  // namespace

MomentBoundConstants assemble_constants(const DiscreteOperators& ops, double r) {
  const auto& c = ops.coeffs;
  if (!(r > 1.0) || r > c.m + 1e-12) {
    throw std::invalid_argument("assemble_constants: requires r in (1, m]");
  }
  if (!(c.theta < 1.0)) {
    throw std::invalid_argument("assemble_constants: requires theta < 1");
  }
  MomentBoundConstants mc;
  mc.r = r;
  mc.theta = c.theta;

  if (c.frag_active) {
    mc.delta_r_quadrature = compute_delta_r(c, r);
    mc.delta_r_discrete = discrete_daughter_deficiency(ops, r);
    mc.delta_r = std::min(mc.delta_r_quadrature, mc.delta_r_discrete);
    if (!(mc.delta_r > 0.0)) {
      throw std::runtime_error("assemble_constants: nonpositive daughter deficiency");
    }
  } else {
    // the deficiency only scales terms that vanish with a = 0
    mc.delta_r_quadrature = mc.delta_r_discrete = mc.delta_r = 0.5;
  }

  mc.kappa2 = r * (r + 3.0) * std::pow(2.0, std::max(r - 3.0, 0.0));
  if (c.coag_active) {
    if (!(c.k0 > 0.0) || !(c.kstar > 0.0)) {
      throw std::invalid_argument(
          "assemble_constants: coalescence bound constants (k0, kstar) are "
          "required; validate the diagonal-sum and split hypotheses first");
    }
    mc.I1_coef = (r <= 2.0) ? std::pow(2.0, r + 1.0) * c.k0
                            : std::pow(4.0, r) * c.k0;
    mc.I2_coef = mc.kappa2 * c.kstar;
    mc.I3_coef = std::pow(2.0, r + 2.0) * c.kstar;
    mc.kappa1 = std::max({mc.I1_coef, mc.I2_coef, mc.I3_coef});
  }

  mc.R_r = std::pow(std::max(1.0, 2.0 * r / mc.delta_r), 1.0 / (r - 1.0));
  if (c.frag_active) {
    double a_sup = 0.0;
    if (c.a_sup_exact) {
      a_sup = c.a_sup_exact(1.0, mc.R_r);
    } else {
      for (int q = 0; q < 1024; ++q) {
        const double x = std::exp(std::log(mc.R_r) * q / 1023.0);
        a_sup = std::max(a_sup, c.a(x));
      }
    }
    for (int i = ops.grid.first_center_above(1.0); i < ops.n(); ++i) {
      const double x = ops.grid.centers[i];
      if (x > mc.R_r) break;
      a_sup = std::max(a_sup, c.a(x));
    }
    mc.a_sup = a_sup;
  }

  const double p = 1.0 / (1.0 - c.theta);
  mc.young = std::pow(2.0 / mc.delta_r, c.theta * p) * std::pow(mc.kappa1, p);
  mc.kappa3 = mc.a_sup + 3.0 * r + r * r + mc.kappa1 * (3.0 + 2.0 * r) +
              mc.young * (2.0 + 2.0 * r);
  return mc;
}

Lge1Report lge1_check(const DiscreteOperators& ops, const DensityState& psi,
                      double r, const MomentBoundConstants& mc) {
  const auto& g = ops.grid;
  Lge1Report rep;
  const auto rate = apply_frag(ops, psi.phi);
  double lhs = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    lhs += eval_wr(g.centers[i], r) * rate[i] * g.widths[i];
  }
  rep.lhs = lhs;
  const auto& a = ops.frag_loss;
  rep.rhs = -mc.delta_r * upper_sum(g, psi.phi, 1.0, r, [&](int i) { return a[i]; }) +
            upper_sum(g, psi.phi, 1.0, 1.0, [&](int i) { return a[i]; });
  rep.margin = (rep.rhs - rep.lhs) / rel_scale(rep.lhs, rep.rhs);
  rep.pass = rep.margin >= -kCheckerTol;
  if (!rep.pass && !ops.frag_gain.empty()) {
    // locate the parent with the largest per-parent excess
    double worst = 0.0;
    for (int j = g.first_center_above(1.0); j < g.n(); ++j) {
      const double* col = ops.frag_gain.data() + ops.frag_col_offset[j];
      double transfer = 0.0;
      for (int i = 0; i <= j; ++i) {
        transfer += eval_wr(g.centers[i], r) * col[i] * g.widths[i];
      }
      const double xj = g.centers[j];
      const double per_parent =
          psi.phi[j] * (transfer - a[j] * g.widths[j] *
                                       (eval_wr(xj, r) + xj - mc.delta_r * std::pow(xj, r)));
      if (per_parent > worst) {
        worst = per_parent;
        rep.worst_parent = j;
      }
    }
  }
  return rep;
}

double interpolant_moment(const SizeGrid& g, const std::vector<double>& phi,
                          double q, double lo, double hi) {
  const int n = g.n();
  double acc = 0.0;
  auto segment = [&](double xa, double xb, double va, double vb) {
    const double a = std::max(xa, lo), b = std::min(xb, hi);
    if (b <= a) return;
    const double slope = (vb - va) / (xb - xa);
    const double A = va - slope * xa;
    acc += A * (std::pow(b, q + 1.0) - std::pow(a, q + 1.0)) / (q + 1.0) +
           slope * (std::pow(b, q + 2.0) - std::pow(a, q + 2.0)) / (q + 2.0);
  };
  segment(0.0, g.centers[0], 0.0, phi[0]);
  for (int i = 0; i + 1 < n; ++i) {
    segment(g.centers[i], g.centers[i + 1], phi[i], phi[i + 1]);
  }
  segment(g.centers[n - 1], g.edges[n], phi[n - 1], 0.0);
  return acc;
}

Lge2Report lge2_check(const DiscreteOperators& ops, const DensityState& psi,
                      double r) {
  const auto& g = ops.grid;
  const int n = g.n();
  Lge2Report rep;
  if (!ops.diffusion_on) return rep;

  const auto rate = apply_diffusion(ops, psi.phi);
  double D = 0.0;
  for (int i = 0; i < n; ++i) {
    D += eval_wr(g.centers[i], r) * rate[i] * g.widths[i];
  }
  rep.lhs = -D;

  // Integrated-by-parts form over the linear interpolant with ghost zeros:
  // the second derivative of the weight is 3(r-1)x below 1 and r(r-1)x^{r-2}
  // above; the right edge carries the truncation outflow.
  const double cut = std::min(1.0, g.x_max());
  const double I_low = interpolant_moment(g, psi.phi, 1.0, 0.0, cut);
  const double I_high = interpolant_moment(g, psi.phi, r - 2.0, cut, g.x_max());
  rep.boundary_term =
      eval_wr(g.x_max(), r) * psi.phi[n - 1] / (g.x_max() - g.centers[n - 1]);
  rep.identity_rhs =
      -3.0 * (r - 1.0) * I_low - r * (r - 1.0) * I_high + rep.boundary_term;
  rep.identity_residual =
      std::abs(rep.lhs - rep.identity_rhs) / rel_scale(rep.lhs, rep.identity_rhs);
  rep.pass_identity = rep.identity_residual <= kCheckerTol;

  const double M1_hat = interpolant_moment(g, psi.phi, 1.0, 0.0, g.x_max());
  rep.rhs_ineq = -3.0 * r * M1_hat - r * r * I_high;
  rep.slack = rep.lhs - rep.rhs_ineq;
  rep.pass_ineq = rep.slack >= -kCheckerTol * rel_scale(rep.lhs, rep.rhs_ineq);
  rep.pass = rep.pass_identity && rep.pass_ineq;
  return rep;
}

Lge3Report lge3_check(const DiscreteOperators& ops, const DensityState& psi,
                      double r, const MomentBoundConstants& mc) {
  const auto& c = ops.coeffs;
  if (c.theta0 > 0.5 + 1e-12) {
    throw std::invalid_argument("lge3_check: requires theta0 <= 1/2");
  }
  const auto& g = ops.grid;
  Lge3Report rep;
  if (ops.channels.empty()) return rep;

  const int split = g.first_center_above(1.0);
  const auto& x = g.centers;
  const auto& p = psi.phi;

  for (const auto& ch : ops.channels) {
    const int i = ch.i, j = ch.j;
    const double vv = (i == j) ? p[i] * p[i] : 2.0 * p[i] * p[j];
    if (vv == 0.0) continue;
    const double wdiff =
        eval_wr(x[i] + x[j], r) - eval_wr(x[i], r) - eval_wr(x[j], r);
    const double contrib = ch.w * vv * wdiff;  // already carries the 1/2
    if (i >= split && j >= split) {
      rep.I1 += contrib;
    } else if (i < split && j < split) {
      rep.I2 += contrib;
    } else {
      rep.I3 += contrib;
    }
  }

  const double M1 = moment(g, psi, 1.0);
  const double M_low = (r <= 2.0) ? M1 : moment(g, psi, r - 1.0);
  const auto one_plus_a_theta = [&](int i) {
    return std::pow(1.0 + c.a(x[i]), c.theta);
  };
  const double weighted_tail = upper_sum(g, p, 1.0, r, one_plus_a_theta);

  rep.I1_bound = mc.I1_coef * M_low * weighted_tail;
  rep.I2_bound = mc.I2_coef * M1 * M1;
  rep.I3_bound = mc.I3_coef * M1 * weighted_tail;

  const double m1c = (rep.I1 - rep.I1_bound) / rel_scale(rep.I1, rep.I1_bound);
  const double m2c = (rep.I2 - rep.I2_bound) / rel_scale(rep.I2, rep.I2_bound);
  const double m3c = (rep.I3 - rep.I3_bound) / rel_scale(rep.I3, rep.I3_bound);
  rep.worst_margin = std::max({m1c, m2c, m3c});
  rep.pass = rep.worst_margin <= kCheckerTol;
  return rep;
}

double lge4_rhs(const DiscreteOperators& ops, const DensityState& psi, double r,
                const MomentBoundConstants& mc) {
  const auto& g = ops.grid;
  const double M1 = moment(g, psi, 1.0);
  const double Mhigh = moment(g, psi, 1.0 + std::max(r - 2.0, 0.0));
  double W1 = 0.0;
  for (int i = g.first_center_above(1.0); i < g.n(); ++i) {
    W1 += eval_wr(g.centers[i], r) * psi.phi[i] * g.widths[i];
  }
  const double p = 1.0 / (1.0 - mc.theta);
  return mc.kappa3 * std::pow(1.0 + M1 + Mhigh, p) * (1.0 + M1 + W1);
}

Lge4Report lge4_check(const DiscreteOperators& ops, const DensityState& psi,
                      double r, const MomentBoundConstants& mc) {
  const auto& g = ops.grid;
  Lge4Report rep;
  const auto diff = apply_diffusion(ops, psi.phi);
  const auto frag = apply_frag(ops, psi.phi);
  const auto coag = apply_coag(ops, psi.phi, psi.phi);
  for (int i = 0; i < g.n(); ++i) {
    const double w = eval_wr(g.centers[i], r) * g.widths[i];
    rep.diffusion_part += w * diff[i];
    rep.fragmentation_part += w * frag[i];
    rep.coagulation_part += w * coag.rate[i];
  }
  rep.lhs = rep.diffusion_part + rep.fragmentation_part + rep.coagulation_part;
  rep.rhs = lge4_rhs(ops, psi, r, mc);
  rep.margin = (rep.rhs - rep.lhs) / rel_scale(rep.lhs, rep.rhs);
  rep.pass = rep.margin >= -kCheckerTol;
  return rep;
}

LogValue LogValue::from_value(double v) {
  LogValue lv;
  lv.log = v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
  return lv;
}

LogValue LogValue::from_log(double lg) {
  LogValue lv;
  lv.log = lg;
  return lv;
}

double LogValue::value() const {
  return representable() ? std::exp(log) : std::numeric_limits<double>::infinity();
}

LogValue GronwallBound::at(double t) const {
  return LogValue::from_log(std::log(kappa) + kappa * t +
                            std::log1p(r * norm_f_E0));
}

GronwallBound gronwall_trajectory(const DiscreteOperators& ops,
                                  const DensityState& f, double r,
                                  const MomentBoundConstants& mc) {
  if (!(r > 1.0) || r > std::min(ops.coeffs.m, 2.0) + 1e-12) {
    throw std::invalid_argument("gronwall_trajectory: requires r in (1, min(m,2)]");
  }
  GronwallBound b;
  b.r = r;
  const double M1f = moment(ops.grid, f, 1.0);
  const double p = 1.0 / (1.0 - mc.theta);
  b.kappa = std::max(mc.kappa3 * std::pow(1.0 + 2.0 * M1f, p), 2.0 * r + 6.0);
  b.norm_f_E0 = norm_E0(ops.grid, f, ops.coeffs.m);
  return b;
}

BootstrapChain bootstrap_bound(const DiscreteOperators& ops,
                               const DensityState& f, double T) {
  const auto& c = ops.coeffs;
  BootstrapChain chain;
  const double m = c.m;
  const double M1f = moment(ops.grid, f, 1.0);
  const double p = 1.0 / (1.0 - c.theta);

  if (m <= 2.0) {
    const auto mc = assemble_constants(ops, m);
    const auto gb = gronwall_trajectory(ops, f, m, mc);
    BootstrapLevel lv;
    lv.r = m;
    lv.kappa = gb.kappa;
    lv.mu = gb.at(T);
    lv.vacuous = !lv.mu.representable();
    chain.levels.push_back(lv);
    return chain;
  }

  const int steps = int(std::floor(m));
  for (int i = 1; i <= steps; ++i) {
    const double r = m - std::floor(m) + i;
    BootstrapLevel lv;
    lv.r = r;
    if (i == 1) {
      if (r <= 1.0 + 1e-12) {
        // int (x + x) phi = 2 M1, constant in time
        lv.kappa = 0.0;
        lv.mu = LogValue::from_value(2.0 * M1f);
      } else {
        const auto mc = assemble_constants(ops, r);
        const auto gb = gronwall_trajectory(ops, f, r, mc);
        lv.kappa = gb.kappa;
        lv.mu = gb.at(T);
      }
    } else {
      const auto mc = assemble_constants(ops, r);
      double W0 = 0.0;
      for (int q = 0; q < ops.n(); ++q) {
        W0 += eval_wr(ops.grid.centers[q], r) * f.phi[q] * ops.grid.widths[q];
      }
      lv.kappa = std::max(mc.kappa3 * std::pow(1.0 + M1f, p),
                          2.0 * r * M1f + 2.0 * (W0 + 1.0 + M1f));
      const LogValue prev = chain.levels.back().mu;
      // (1 + mu_{r-1})^{1/(1-theta)} in log space
      const double log1p_mu = prev.log <= 0.0 ? std::log1p(std::exp(prev.log))
                                              : prev.log + std::log1p(std::exp(-prev.log));
      const double pow_log = p * log1p_mu;
      if (pow_log > 709.0) {
        lv.mu = LogValue::from_log(std::numeric_limits<double>::infinity());
      } else {
        lv.mu = LogValue::from_log(std::log(lv.kappa) +
                                   lv.kappa * T * std::exp(pow_log));
      }
    }
    lv.vacuous = !lv.mu.representable();
    chain.levels.push_back(lv);
  }
  return chain;
}

}  // namespace cfsd

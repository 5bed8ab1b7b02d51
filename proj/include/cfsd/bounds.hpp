#pragma once

#include <limits>
#include <vector>

#include "cfsd/operators.hpp"

namespace cfsd {

// Explicit constants of the weighted-moment estimate chain at order r.
// Every entry is assembled from the proof steps, never calibrated.
struct MomentBoundConstants {
  double r = 2.0;
  double theta = 0.75;
  double delta_r = 0.0;             // effective deficiency used by the checkers
  double delta_r_quadrature = 0.0;  // continuum infimum estimate
  double delta_r_discrete = 1.0;    // deficiency of the assembled gain table
  double kappa2 = 0.0;              // r (r+3) 2^{(r-3)+}
  double I1_coef = 0.0;             // 2^{r+1} k0 if r <= 2, else 4^r k0
  double I2_coef = 0.0;             // kappa2 * kstar
  double I3_coef = 0.0;             // 2^{r+2} * kstar
  double kappa1 = 0.0;              // max of the three I coefficients
  double R_r = 1.0;                 // max{1, 2r/delta_r}^{1/(r-1)}
  double a_sup = 0.0;               // sup of a on [1, R_r]
  double young = 0.0;               // (2/delta_r)^{th/(1-th)} kappa1^{1/(1-th)}
  double kappa3 = 0.0;              // a_sup + 3r + r^2 + kappa1(3+2r) + young(2+2r)
};

MomentBoundConstants assemble_constants(const DiscreteOperators& ops, double r);

inline constexpr double kCheckerTol = 1e-8;

struct Lge1Report {
  double lhs = 0.0, rhs = 0.0;
  double margin = 0.0;  // (rhs - lhs) / scale, negative means violated
  bool pass = true;
  int worst_parent = -1;
};
Lge1Report lge1_check(const DiscreteOperators& ops, const DensityState& psi,
                      double r, const MomentBoundConstants& mc);

struct Lge2Report {
  double lhs = 0.0;                // minus the weighted divergence, operator path
  double identity_rhs = 0.0;       // interpolant-exact integrated-by-parts form
  double identity_residual = 0.0;  // relative
  double boundary_term = 0.0;      // truncation outflow part of the identity
  double rhs_ineq = 0.0;
  double slack = 0.0;              // lhs - rhs_ineq, >= 0 for nonnegative states
  bool pass_identity = true;
  bool pass_ineq = true;
  bool pass = true;
};
Lge2Report lge2_check(const DiscreteOperators& ops, const DensityState& psi,
                      double r);

struct Lge3Report {
  double I1 = 0.0, I2 = 0.0, I3 = 0.0;
  double I1_bound = 0.0, I2_bound = 0.0, I3_bound = 0.0;
  double worst_margin = 0.0;
  bool pass = true;
};
Lge3Report lge3_check(const DiscreteOperators& ops, const DensityState& psi,
                      double r, const MomentBoundConstants& mc);

struct Lge4Report {
  double lhs = 0.0, rhs = 0.0;
  double diffusion_part = 0.0, fragmentation_part = 0.0, coagulation_part = 0.0;
  double margin = 0.0;
  bool pass = true;
};
double lge4_rhs(const DiscreteOperators& ops, const DensityState& psi, double r,
                const MomentBoundConstants& mc);
Lge4Report lge4_check(const DiscreteOperators& ops, const DensityState& psi,
                      double r, const MomentBoundConstants& mc);

// Values carried in natural log so the exponential chains never overflow.
struct LogValue {
  double log = -std::numeric_limits<double>::infinity();

  static LogValue from_value(double v);
  static LogValue from_log(double lg);
  double value() const;  // exp(log); +inf when not representable
  bool representable() const { return log <= 709.0; }
};

// A-priori trajectory bound on int (x + x^r) phi(t) for r in (1, min(m,2)]:
// kappa e^{kappa t} (1 + r |f|_E0) with kappa assembled from kappa3.
struct GronwallBound {
  double r = 2.0;
  double kappa = 0.0;
  double norm_f_E0 = 0.0;
  LogValue at(double t) const;
};
GronwallBound gronwall_trajectory(const DiscreteOperators& ops,
                                  const DensityState& f, double r,
                                  const MomentBoundConstants& mc);

// Iterated bound chain for m > 2: orders r_i = m - floor(m) + i, seeded by
// the conserved mass (r=1) or the Gronwall level, then
//   mu_r(T) <= kappa(r) exp(kappa(r) (1 + mu_{r-1}(T))^{1/(1-theta)} T).
struct BootstrapLevel {
  double r = 0.0;
  double kappa = 0.0;
  LogValue mu;
  bool vacuous = false;  // exceeds double range at this horizon
};
struct BootstrapChain {
  std::vector<BootstrapLevel> levels;
  const BootstrapLevel& final_level() const { return levels.back(); }
};
BootstrapChain bootstrap_bound(const DiscreteOperators& ops,
                               const DensityState& f, double T);

// Interpolant-exact integral of x^q against the piecewise-linear extension
// of the state (ghost zeros at size 0 and at the right edge), restricted to
// [lo, hi]. Shared by the diffusion-lemma checker and its tests.
double interpolant_moment(const SizeGrid& g, const std::vector<double>& phi,
                          double q, double lo, double hi);

}  // namespace cfsd

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cfsd {

// Rate coefficients (a, b, k) of the size-structured model:
//   a(x)    overall breakup rate of particles of size x        [1/time]
//   b(x,y)  daughter size density for a parent of size y       [1/size]
//   k(x,y)  symmetric coalescence kernel                       [1/time per density]
// together with the kernel-growth parameters (theta0, theta, m) and the
// constants entering the structural hypotheses on k and b.
class RateCoefficients {
 public:
  using Fn1 = std::function<double(double)>;
  using Fn2 = std::function<double(double, double)>;

  Fn1 a;
  Fn2 b;
  Fn2 k;

  double theta0 = 0.5;  // small-size kernel singularity order, in [0,1)
  double theta = 0.75;  // rate-growth exponent, in (theta0, 1]
  double m = 2.0;       // large-size moment order, > 1

  // Hypothesis constants. kstar: weight-quotient bound; Kstar: split bound;
  // k0: diagonal-sum bound on (1,inf)^2; Kbig/alpha: rate-product bound.
  double kstar = 0.0;
  double Kstar = 0.0;
  double k0 = 0.0;
  double Kbig = 0.0;
  double alpha = 1.0;
  double delta2 = 0.0;  // second-moment deficiency of b, in (0,1)

  bool frag_active = true;  // false iff a == 0
  bool coag_active = true;  // false iff k == 0

  std::string a_name = "custom";
  std::string b_name = "custom";
  std::string k_name = "custom";

  // Optional closed forms carried by the builtin families.
  // b_mass_cdf(y, x) = int_0^x s b(s,y) ds.
  std::function<double(double, double)> b_mass_cdf;
  // b_number_cdf(y, x) = int_0^x b(s,y) ds.
  std::function<double(double, double)> b_number_cdf;
  // delta_r_exact(r) = exact infimum of 1 - y^{-r} int_0^y x^r b dx.
  std::function<double(double)> delta_r_exact;
  // a_sup_exact(lo, hi) = sup of a on [lo, hi].
  std::function<double(double, double)> a_sup_exact;
};

// Kernel weight: x^{1-2 theta0} below 1, (1+a(x))^theta x^m above (the upper
// branch at x = 1; the weight is only defined up to null sets).
double eval_ell(double x, const RateCoefficients& c);

// Moment test weight: ((r-1)/2) x^3 on [0,1], x^r + ((r-3)/2) x above; C^1
// across the junction and convex on [0,inf).
double eval_wr(double x, double r);

// Absorption potential gamma * ell(x) / (x + x^m).
double eval_V(double x, double gamma, const RateCoefficients& c);

struct DeltaROptions {
  double y_lo = 1e-3;
  double y_hi = 1e3;
  int n_samples = 256;
  double rel_tol = 1e-10;
};

// Infimum over sampled parent sizes of 1 - y^{-r} int_0^y x^r b(x,y) dx,
// by adaptive quadrature; builtin families contribute their analytic limit.
// Throws if the estimate leaves (0,1).
double compute_delta_r(const RateCoefficients& c, double r,
                       const DeltaROptions& opt = {});

struct HypothesisCheck {
  std::string name;
  bool applicable = true;
  bool pass = true;
  double margin = 0.0;  // worst-case constraint residual; <= 0 means satisfied
  std::string detail;
};

struct ValidationReport {
  std::vector<HypothesisCheck> checks;
  bool all_pass() const;
  const HypothesisCheck* find(const std::string& name) const;
};

// Log-spaced sample set spanning [1e-6, 1e6]; shared between constant
// certification and hypothesis validation so the two never disagree.
const std::vector<double>& hypothesis_sample_grid();

// Sampling-based check of every structural hypothesis; failures are reported
// as data (worst margins), never thrown.
ValidationReport validate_hypotheses(const RateCoefficients& c);

// Fill any unset kernel constants (kstar, Kstar, ...) with a numerical sup
// over the shared sample grid times a safety factor.
void certify_kernel_constants(RateCoefficients& c, double safety = 1.25);

// --- builtin families ---------------------------------------------------

// a(x) = A x^gamma.
void set_power_rate(RateCoefficients& c, double A, double gamma);
void set_zero_rate(RateCoefficients& c);

// b(x,y) = (nu+2) x^nu / y^{nu+1}, nu > -1; mass-normalized identically.
void set_powerlaw_daughters(RateCoefficients& c, double nu);

void set_zero_kernel(RateCoefficients& c);
void set_constant_kernel(RateCoefficients& c, double kappa);
// kappa * xy / ((1+x)(1+y)); bounded, vanishing at zero size.
void set_bounded_product_kernel(RateCoefficients& c, double kappa);
// (x^{1/3} + y^{1/3})(x^{-1/3} + y^{-1/3}).
void set_smoluchowski_kernel(RateCoefficients& c);
// K (1+a(x))^alpha (1+a(y))^alpha; requires a to be set first.
void set_rate_product_kernel(RateCoefficients& c, double K, double alpha);
// k0 * xy/(x+y) * [(1+a(x))^theta + (1+a(y))^theta]; requires a, theta.
void set_diagonal_sum_kernel(RateCoefficients& c, double k0);

// Piecewise-linear table lookups (log-spaced abscissae recommended).
void set_tabulated_rate(RateCoefficients& c, std::vector<double> xs,
                        std::vector<double> vals);
void set_tabulated_kernel(RateCoefficients& c, std::vector<double> xs,
                          std::vector<double> vals /* row-major xs x xs */);

}  // namespace cfsd

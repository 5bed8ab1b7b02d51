#pragma once

#include <functional>
#include <string>
#include <vector>

namespace cfsd {

// Closed-form references for the degenerate sub-models; each is exact for
// its mechanism subset and drives convergence and correctness checks.

// Absorbing-boundary heat solution by the reflection integral
//   u(t,x) = int_0^inf [G(t,x-y) - G(t,x+y)] f(y) dy,   G(t,z) = e^{-z^2/4t}/sqrt(4 pi t)
double heat_dirichlet(const std::function<double(double)>& f, double t, double x,
                      double rel_tol = 1e-10);

// Odd Gaussian profile x e^{-x^2/4 t0} / sqrt(4 pi t0^3): unit first moment,
// and its heat evolution stays in the family with t0 -> t0 + t.
double heat_profile(double t0, double x);
double heat_profile_evolved(double t0, double t, double x);

// Linear-rate binary breakup (a(x)=x, b=2/y) from an exponential datum:
// density (1+t)^2 e^{-x(1+t)}; first moment 1, zeroth moment 1+t.
double pure_frag_linear(double t, double x);

// Zeroth moment under a constant kernel: M0(t) = M0 / (1 + kappa M0 t / 2).
double pure_coag_constant_M0(double t, double kappa, double M0_init);

// --- convergence battery ------------------------------------------------

struct RefinementRow {
  double h = 0.0;      // grid spacing or time step
  double error = 0.0;  // L1 distance to the reference
  double ratio = 0.0;  // previous error / this error (0 on the first row)
};

struct ConvergenceReport {
  std::string name;
  std::vector<RefinementRow> rows;
  bool pass = true;
  std::string detail;
};

struct ConvergenceOptions {
  int refine_extra = 0;  // extra halvings appended to each sweep
};

// Pure-diffusion space and time refinement, pure-fragmentation and
// constant-kernel moment tracking; writes one CSV per study when out_dir is
// nonempty.
std::vector<ConvergenceReport> run_convergence_battery(
    const std::string& out_dir, const ConvergenceOptions& opt = {});

}  // namespace cfsd

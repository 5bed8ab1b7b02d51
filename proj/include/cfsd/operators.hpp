#pragma once

#include <iosfwd>
#include <vector>

#include "cfsd/coefficients.hpp"
#include "cfsd/grid.hpp"

namespace cfsd {

// One coalescence channel: cells (i,j) merge into size centers[i]+centers[j],
// split onto pivot p and p+1 with number fraction eta on p (fixed-pivot
// split: number and mass of the newborn are both preserved). p < 0 routes
// the product to the overflow ledger instead.
struct CoagChannel {
  int i, j;
  int p;
  double eta;
  double w;  // (1/2) k(x_i,x_j) dx_i dx_j
};

struct CoagApplyResult {
  std::vector<double> rate;     // density rate of change
  double overflow_mass = 0.0;   // mass rate leaving through the overflow channel
  double overflow_number = 0.0;
  double gross_mass_flux = 0.0; // |gain| + |loss| mass turnover, for tolerances
};

struct BilinearBoundReport {
  double lhs_E0 = 0.0;
  double quotient_bound = 0.0;  // (3/2) kstar |psi|_Y |phi|_Y
  double split_bound = 0.0;     // (3/2) Kstar (|psi|_Y |phi|_E0 + |psi|_E0 |phi|_Y)
  double ratio_quotient = 0.0;
  double ratio_split = 0.0;
  bool split_applicable = false;
  bool pass = true;
};

// Frozen discrete realization of diffusion, fragmentation, and coalescence
// on a fixed grid. Assembly is deterministic; nothing mutates afterwards.
class DiscreteOperators {
 public:
  SizeGrid grid;
  RateCoefficients coeffs;
  bool diffusion_on = true;

  // diffusion: finite-volume flux form, tridiagonal
  std::vector<double> diff_lower, diff_diag, diff_upper;
  double ghost_h_left = 0.0;   // centers[0] - 0
  double ghost_h_right = 0.0;  // edges[n] - centers[n-1]

  // fragmentation: loss a(x_i) on the diagonal plus a column-renormalized
  // gain table; gain[col(j)+i] multiplies phi_j and adds to the density rate
  // of cell i <= j. Column sums reproduce the parent mass exactly.
  std::vector<double> frag_loss;       // a(x_i)
  std::vector<double> frag_gain;       // packed upper triangle, column-major
  std::vector<int> frag_col_offset;    // size n+1; column j occupies [off_j, off_j + j]
  std::vector<double> frag_renorm;     // per-parent renormalization factor
  std::vector<double> frag_rmoment;    // per-parent sum_i x_i^{r?} ... see note
  // frag_rmoment is filled per request by discrete_daughter_deficiency().

  // coalescence
  std::vector<CoagChannel> channels;   // i <= j, non-overflow and overflow
  std::vector<double> kmat;            // k(x_i,x_j), row-major n*n

  int n() const { return grid.n(); }
  double kernel(int i, int j) const { return kmat[size_t(i) * n() + j]; }
};

struct AssembleOptions {
  bool diffusion = true;
  bool fragmentation = true;
  bool coagulation = true;
  // Parents below renorm_guard_above * x_min may carry any renormalization
  // factor (their daughters are mostly sub-grid); all others must stay in
  // [0.5, 2] or assembly fails as inadequate for the given b.
  double renorm_guard_above = 4.0;
};

DiscreteOperators assemble(const RateCoefficients& c, const SizeGrid& g,
                           const AssembleOptions& opt = {});

// rate fields ----------------------------------------------------------

std::vector<double> apply_diffusion(const DiscreteOperators& ops,
                                    const std::vector<double>& phi);
std::vector<double> apply_frag(const DiscreteOperators& ops,
                               const std::vector<double>& phi);
// per-cell coalescence loss frequency lambda_i = sum_j k_ij psi_j dx_j
std::vector<double> coag_loss_rates(const DiscreteOperators& ops,
                                    const std::vector<double>& psi);
CoagApplyResult apply_coag(const DiscreteOperators& ops,
                           const std::vector<double>& phi,
                           const std::vector<double>& psi);

// mass-weighted column sum of diffusion: zero in the interior, the right
// boundary column carries the (negative of the) leakage weight.
double diffusion_leak_weight(const DiscreteOperators& ops);

// smallest discrete daughter r-moment deficiency over parents above 1;
// tightness counterpart of the continuum infimum, used by the bound checkers.
double discrete_daughter_deficiency(const DiscreteOperators& ops, double r);

BilinearBoundReport check_bilinear_bound(const DiscreteOperators& ops,
                                         const DensityState& psi,
                                         const DensityState& phi);

// coordinate text export ("i j value" triplets) for inspection
void export_coordinate(const DiscreteOperators& ops, std::ostream& diff_out,
                       std::ostream& frag_out);

}  // namespace cfsd

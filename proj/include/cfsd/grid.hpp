#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cfsd/coefficients.hpp"

namespace cfsd {

// Truncated size axis (x_min, x_max) split into cells; pivots are arithmetic
// cell centers. The left boundary condition is imposed through a ghost value
// at size zero, the right boundary is absorbing at the last edge.
struct SizeGrid {
  enum class Spacing { uniform, geometric };

  std::vector<double> edges;    // n+1, strictly increasing
  std::vector<double> centers;  // n
  std::vector<double> widths;   // n
  Spacing spacing = Spacing::geometric;

  int n() const { return int(centers.size()); }
  double x_min() const { return edges.front(); }
  double x_max() const { return edges.back(); }
  // index of the cell whose [edge_i, edge_{i+1}) contains x; clamped
  int cell_of(double x) const;
  // first index whose pivot exceeds x (cells split by pivot position)
  int first_center_above(double x) const;

  static SizeGrid geometric(double x_min, double x_max, int n);
  static SizeGrid uniform(double x_min, double x_max, int n);
};

// Running account of where mass went: everything that ever left the interior
// is booked here, so interior + leakage + overflow - clip_added = initial.
struct MassLedger {
  double initial_mass = 0.0;
  double leakage = 0.0;     // through the right boundary
  double overflow = 0.0;    // coalescence products beyond the grid
  double clip_added = 0.0;  // mass created by clipping round-off negatives

  double balance_residual(double interior_M1) const;
};

struct DensityState {
  std::vector<double> phi;  // cell-averaged density
  double time = 0.0;
  MassLedger ledger;
};

double moment(const SizeGrid& g, const DensityState& s, double r);
double moment_abs(const SizeGrid& g, const DensityState& s, double r);
double norm_Xr(const SizeGrid& g, const DensityState& s, double r);
double norm_E0(const SizeGrid& g, const DensityState& s, double m);
double norm_Y(const SizeGrid& g, const DensityState& s, const RateCoefficients& c);

// Cell averages of f by per-cell 4-point Gauss-Legendre; rejects negative
// samples and initial data with visible support beyond the grid.
DensityState project_initial(const std::function<double(double)>& f,
                             const SizeGrid& g);

}  // namespace cfsd

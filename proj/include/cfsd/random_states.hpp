#pragma once

#include <random>

#include "cfsd/grid.hpp"

namespace cfsd {

// Smooth nonnegative test states: small mixtures of x^p e^{-lambda x} bumps,
// projected per cell. They vanish at size zero, decay rapidly, and carry
// finite weighted moments of every order used by the checkers.
DensityState random_smooth_state(const SizeGrid& g, std::mt19937_64& rng,
                                 double amplitude = 1.0);

// Same profile shape restricted to (0, x_cut); used for conservation checks
// that must stay clear of the overflow channel.
DensityState random_compact_state(const SizeGrid& g, std::mt19937_64& rng,
                                  double x_cut, double amplitude = 1.0);

// Componentwise nonpositive field (the negative of a smooth state sampled at
// the pivots).
std::vector<double> random_nonpositive_field(const SizeGrid& g,
                                             std::mt19937_64& rng,
                                             double amplitude = 1.0);

}  // namespace cfsd

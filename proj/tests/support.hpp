#pragma once

#include "cfsd/coefficients.hpp"
#include "cfsd/grid.hpp"
#include "cfsd/operators.hpp"

namespace cfsd::test {

// Full-mechanism benchmark coefficients: linear breakup rate, uniform binary
// daughters (delta2 = 1/3), diagonal-sum coalescence kernel.
inline RateCoefficients benchmark_coeffs(double k0 = 1.0, double theta = 0.75,
                                         double m = 2.0, double theta0 = 0.5) {
  RateCoefficients c;
  c.theta0 = theta0;
  c.theta = theta;
  c.m = m;
  set_power_rate(c, 1.0, 1.0);
  set_powerlaw_daughters(c, 0.0);
  set_diagonal_sum_kernel(c, k0);
  certify_kernel_constants(c);
  return c;
}

inline RateCoefficients linear_coeffs() {  // no coalescence
  RateCoefficients c;
  c.theta0 = 0.5;
  c.theta = 0.75;
  c.m = 2.0;
  set_power_rate(c, 1.0, 1.0);
  set_powerlaw_daughters(c, 0.0);
  set_zero_kernel(c);
  return c;
}

}  // namespace cfsd::test

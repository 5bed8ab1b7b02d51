#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cfsd::quad {

// Adaptive Gauss-Kronrod (G7-K15). The deep bisection limit matters for
// integrands with integrable endpoint singularities (x^p, p > -1), where the
// error is driven down geometrically near the endpoint; deeper trees blow up
// combinatorially once the tolerance saturates.
inline constexpr int kMaxDepth = 20;

template <typename F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10) {
  if (!(a < b)) return 0.0;
  using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0.0;
  const double val = gk::integrate(std::forward<F>(f), a, b, kMaxDepth, rel_tol, &err);
  if (!std::isfinite(val)) {
    throw std::runtime_error("quadrature: non-finite integrand");
  }
  return val;
}

template <typename F>
double integrate_to_inf(F&& f, double a, double rel_tol = 1e-10) {
  using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0.0;
  const double val = gk::integrate(std::forward<F>(f), a,
                                   std::numeric_limits<double>::infinity(),
                                   kMaxDepth, rel_tol, &err);
  if (!std::isfinite(val)) {
    throw std::runtime_error("quadrature: non-finite integrand");
  }
  return val;
}

// Fixed 4-point Gauss-Legendre on [a,b]; used for per-cell projections where
// the integrand is smooth on the cell.
template <typename F>
double gauss4(F&& f, double a, double b) {
  // nodes/weights on [-1,1]
  static constexpr double xg[2] = {0.3399810435848562648, 0.8611363115940525752};
  static constexpr double wg[2] = {0.6521451548625461426, 0.3478548451374538574};
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int q = 0; q < 2; ++q) {
    s += wg[q] * (f(c - h * xg[q]) + f(c + h * xg[q]));
  }
  return s * h;
}

}  // namespace cfsd::quad

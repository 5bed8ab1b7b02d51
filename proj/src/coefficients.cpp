#include "cfsd/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cfsd/quadrature.hpp"

namespace cfsd {

double eval_ell(double x, const RateCoefficients& c) {
  if (!(x > 0.0)) throw std::invalid_argument("eval_ell: requires x > 0");
  if (x < 1.0) return std::pow(x, 1.0 - 2.0 * c.theta0);
  const double ax = c.a(x);
  if (!std::isfinite(ax)) throw std::runtime_error("eval_ell: a(x) not finite");
  return std::pow(1.0 + ax, c.theta) * std::pow(x, c.m);
}

double eval_wr(double x, double r) {
  if (!std::isfinite(x) || x < 0.0) {
    throw std::invalid_argument("eval_wr: requires finite x >= 0");
  }
  if (x <= 1.0) return 0.5 * (r - 1.0) * x * x * x;
  return std::pow(x, r) + 0.5 * (r - 3.0) * x;
}

double eval_V(double x, double gamma, const RateCoefficients& c) {
  if (!(x > 0.0) || !(gamma > 0.0)) {
    throw std::invalid_argument("eval_V: requires x > 0 and gamma > 0");
  }
  return gamma * eval_ell(x, c) / (x + std::pow(x, c.m));
}

namespace {

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> xs(n);
  const double la = std::log(lo), lb = std::log(hi);
  for (int i = 0; i < n; ++i) {
    xs[i] = std::exp(la + (lb - la) * i / double(n - 1));
  }
  return xs;
}

double daughter_rth_moment(const RateCoefficients& c, double y, double r,
                           double rel_tol) {
  // int_0^y x^r b(x,y) dx, adaptive; the integrand may have an integrable
  // singularity at 0, handled by deep bisection.
  return quad::integrate([&](double x) { return std::pow(x, r) * c.b(x, y); },
                         0.0, y, rel_tol);
}

}  // namespace

double compute_delta_r(const RateCoefficients& c, double r,
                       const DeltaROptions& opt) {
  if (!(r > 1.0)) throw std::invalid_argument("compute_delta_r: requires r > 1");
  double inf = 1.0;
  for (double y : log_spaced(opt.y_lo, opt.y_hi, opt.n_samples)) {
    const double mom = daughter_rth_moment(c, y, r, opt.rel_tol);
    inf = std::min(inf, 1.0 - mom / std::pow(y, r));
  }
  if (c.delta_r_exact) inf = std::min(inf, c.delta_r_exact(r));
  if (!(inf > 0.0) || !(inf < 1.0)) {
    std::ostringstream os;
    os << "compute_delta_r: estimate " << inf << " outside (0,1) at r=" << r;
    throw std::runtime_error(os.str());
  }
  return inf;
}

bool ValidationReport::all_pass() const {
  for (const auto& h : checks) {
    if (h.applicable && !h.pass) return false;
  }
  return true;
}

const HypothesisCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& h : checks) {
    if (h.name == name) return &h;
  }
  return nullptr;
}

const std::vector<double>& hypothesis_sample_grid() {
  static const std::vector<double> xs = log_spaced(1e-6, 1e6, 97);
  return xs;
}

namespace {

struct WorstPair {
  double margin = -std::numeric_limits<double>::infinity();
  double x = 0.0, y = 0.0;
};

template <typename F>
WorstPair worst_over_pairs(const std::vector<double>& xs, F&& residual) {
  WorstPair w;
  for (double x : xs) {
    for (double y : xs) {
      const double r = residual(x, y);
      if (r > w.margin) w = {r, x, y};
    }
  }
  return w;
}

std::string pair_detail(const WorstPair& w) {
  std::ostringstream os;
  os << "worst at (x,y)=(" << w.x << "," << w.y << ")";
  return os.str();
}

}  // namespace

ValidationReport validate_hypotheses(const RateCoefficients& c) {
  ValidationReport rep;
  const auto& xs = hypothesis_sample_grid();
  const double tol = 1e-9;

  // parameter ordering
  {
    HypothesisCheck h;
    h.name = "parameter_ordering";
    h.pass = (0.0 <= c.theta0 && c.theta0 < c.theta && c.theta <= 1.0 && c.m > 1.0);
    h.margin = h.pass ? -1.0 : 1.0;
    h.detail = "0 <= theta0 < theta <= 1, m > 1";
    rep.checks.push_back(h);
  }

  // a locally bounded and nonnegative
  {
    HypothesisCheck h;
    h.name = "rate_locally_bounded";
    double worst = -std::numeric_limits<double>::infinity();
    double amax = 0.0;
    bool finite = true;
    for (double x : xs) {
      const double ax = c.a(x);
      finite = finite && std::isfinite(ax);
      worst = std::max(worst, -ax);
      amax = std::max(amax, std::abs(ax));
    }
    h.pass = finite && worst <= tol;
    h.margin = worst;
    std::ostringstream os;
    os << "max |a| on samples = " << amax;
    h.detail = os.str();
    rep.checks.push_back(h);
  }

  // daughter mass normalization: int_0^y x b dx = y
  {
    HypothesisCheck h;
    h.name = "daughter_mass_normalized";
    h.applicable = c.frag_active;
    if (h.applicable) {
      double worst = 0.0;
      for (double y : log_spaced(1e-3, 1e3, 33)) {
        const double mass = c.b_mass_cdf
                                ? c.b_mass_cdf(y, y)
                                : quad::integrate(
                                      [&](double x) { return x * c.b(x, y); },
                                      0.0, y, 1e-10);
        worst = std::max(worst, std::abs(mass - y) / y);
      }
      h.pass = worst <= 1e-8;
      h.margin = worst;
      h.detail = "max relative residual of the unit-mass identity";
    }
    rep.checks.push_back(h);
  }

  // second-moment deficiency: int_0^y x^2 b dx <= (1-delta2) y^2
  {
    HypothesisCheck h;
    h.name = "daughter_spread";
    h.applicable = c.frag_active;
    if (h.applicable) {
      if (!(c.delta2 > 0.0 && c.delta2 < 1.0)) {
        h.pass = false;
        h.margin = 1.0;
        h.detail = "delta2 outside (0,1)";
      } else {
        double worst = -1.0;
        for (double y : log_spaced(1e-3, 1e3, 33)) {
          const double mom2 = daughter_rth_moment(c, y, 2.0, 1e-10);
          worst = std::max(worst, mom2 / (y * y) - (1.0 - c.delta2));
        }
        h.pass = worst <= tol;
        h.margin = worst;
        h.detail = "second daughter moment vs (1-delta2) y^2";
      }
    }
    rep.checks.push_back(h);
  }

  // kernel symmetry
  {
    HypothesisCheck h;
    h.name = "kernel_symmetric";
    h.applicable = c.coag_active;
    if (h.applicable) {
      auto w = worst_over_pairs(xs, [&](double x, double y) {
        const double kxy = c.k(x, y), kyx = c.k(y, x);
        return std::abs(kxy - kyx) / std::max({std::abs(kxy), std::abs(kyx), 1e-300});
      });
      h.pass = w.margin <= 1e-12;
      h.margin = w.margin;
      h.detail = pair_detail(w);
    }
    rep.checks.push_back(h);
  }

  // weight-quotient bound: k (x+y+(x+y)^m) <= kstar ell(x) ell(y)
  {
    HypothesisCheck h;
    h.name = "kernel_weight_bound";
    h.applicable = c.coag_active && c.kstar > 0.0;
    if (h.applicable) {
      auto w = worst_over_pairs(xs, [&](double x, double y) {
        const double denom = x + y + std::pow(x + y, c.m);
        const double bound = c.kstar * eval_ell(x, c) * eval_ell(y, c);
        return (c.k(x, y) * denom - bound) / std::max(bound, 1e-300);
      });
      h.pass = w.margin <= tol;
      h.margin = w.margin;
      h.detail = pair_detail(w);
    }
    rep.checks.push_back(h);
  }

  // split bound: k (x+y+(x+y)^m) <= Kstar [ell(x)(y+y^m) + ell(y)(x+x^m)]
  const auto split_residual = [&](double x, double y, double Ks) {
    const double denom = x + y + std::pow(x + y, c.m);
    const double Ey = y + std::pow(y, c.m), Ex = x + std::pow(x, c.m);
    const double bound = Ks * (eval_ell(x, c) * Ey + eval_ell(y, c) * Ex);
    return (c.k(x, y) * denom - bound) / std::max(bound, 1e-300);
  };
  bool split_passes = false;
  {
    HypothesisCheck h;
    h.name = "kernel_split_bound";
    h.applicable = c.coag_active && c.Kstar > 0.0;
    if (h.applicable) {
      auto w = worst_over_pairs(
          xs, [&](double x, double y) { return split_residual(x, y, c.Kstar); });
      h.pass = w.margin <= tol;
      h.margin = w.margin;
      h.detail = pair_detail(w);
      split_passes = h.pass;
    }
    rep.checks.push_back(h);
  }

  // A split bound with constant K forces the weight-quotient bound with 4K:
  // z + z^m <= 2 ell(z) pointwise (both branches), so the split envelope is
  // at most 4 ell(x) ell(y). The factor 4 is sharp, attained at x = y = 1.
  {
    HypothesisCheck h;
    h.name = "split_implies_weight_bound";
    h.applicable = c.coag_active && c.Kstar > 0.0 && split_passes;
    if (h.applicable) {
      const double four_K = 4.0 * c.Kstar;
      auto w = worst_over_pairs(xs, [&](double x, double y) {
        const double denom = x + y + std::pow(x + y, c.m);
        const double bound = four_K * eval_ell(x, c) * eval_ell(y, c);
        return (c.k(x, y) * denom - bound) / std::max(bound, 1e-300);
      });
      h.pass = w.margin <= tol;
      h.margin = w.margin;
      h.detail = "weight-quotient bound rechecked with four times the split constant";
    }
    rep.checks.push_back(h);
  }

  // rate-product bound: k <= Kbig (1+a(x))^alpha (1+a(y))^alpha.
  // When it holds, the weight-quotient bound follows with theta0=1/2 and
  // theta=alpha for any m > 1.
  {
    HypothesisCheck h;
    h.name = "kernel_rate_product_bound";
    h.applicable = c.coag_active && c.Kbig > 0.0;
    if (h.applicable) {
      auto w = worst_over_pairs(xs, [&](double x, double y) {
        const double bound = c.Kbig * std::pow(1.0 + c.a(x), c.alpha) *
                             std::pow(1.0 + c.a(y), c.alpha);
        return (c.k(x, y) - bound) / std::max(bound, 1e-300);
      });
      h.pass = w.margin <= tol;
      h.margin = w.margin;
      h.detail = pair_detail(w);
    }
    rep.checks.push_back(h);
  }

  // diagonal-sum bound on (1,inf)^2: k <= k0 xy/(x+y) [(1+a(x))^t+(1+a(y))^t]
  {
    HypothesisCheck h;
    h.name = "kernel_diagonal_sum_bound";
    h.applicable = c.coag_active && c.k0 > 0.0;
    if (h.applicable) {
      WorstPair w;
      for (double x : xs) {
        if (x <= 1.0) continue;
        for (double y : xs) {
          if (y <= 1.0) continue;
          const double bound = c.k0 * x * y / (x + y) *
                               (std::pow(1.0 + c.a(x), c.theta) +
                                std::pow(1.0 + c.a(y), c.theta));
          const double r = (c.k(x, y) - bound) / std::max(bound, 1e-300);
          if (r > w.margin) w = {r, x, y};
        }
      }
      h.pass = w.margin <= tol;
      h.margin = w.margin;
      h.detail = pair_detail(w);
    }
    rep.checks.push_back(h);
  }

  return rep;
}

void certify_kernel_constants(RateCoefficients& c, double safety) {
  if (!c.coag_active) return;
  const auto& xs = hypothesis_sample_grid();
  const bool need_kstar = c.kstar <= 0.0;
  const bool need_Kstar = c.Kstar <= 0.0;
  if (!need_kstar && !need_Kstar) return;

  double sup_quotient = 0.0, sup_split = 0.0;
  for (double x : xs) {
    const double lx = eval_ell(x, c);
    const double Ex = x + std::pow(x, c.m);
    for (double y : xs) {
      const double kxy = c.k(x, y);
      if (kxy == 0.0) continue;
      const double denom = x + y + std::pow(x + y, c.m);
      const double ly = eval_ell(y, c);
      const double Ey = y + std::pow(y, c.m);
      sup_quotient = std::max(sup_quotient, kxy * denom / (lx * ly));
      sup_split = std::max(sup_split, kxy * denom / (lx * Ey + ly * Ex));
    }
  }
  if (need_Kstar) c.Kstar = safety * sup_split;
  if (need_kstar) c.kstar = safety * sup_quotient;
}

// --- builtin families ---------------------------------------------------

void set_power_rate(RateCoefficients& c, double A, double gamma) {
  if (A < 0.0 || gamma < 0.0) {
    throw std::invalid_argument("power rate: requires A >= 0, gamma >= 0");
  }
  c.a = [A, gamma](double x) { return A * std::pow(x, gamma); };
  // nondecreasing, so the sup on [lo,hi] sits at the right endpoint
  c.a_sup_exact = [A, gamma](double /*lo*/, double hi) {
    return A * std::pow(hi, gamma);
  };
  c.frag_active = A > 0.0;
  c.a_name = "power";
}

void set_zero_rate(RateCoefficients& c) {
  c.a = [](double) { return 0.0; };
  c.a_sup_exact = [](double, double) { return 0.0; };
  c.frag_active = false;
  c.a_name = "zero";
}

void set_powerlaw_daughters(RateCoefficients& c, double nu) {
  if (!(nu > -1.0)) {
    throw std::invalid_argument("powerlaw daughters: requires nu > -1");
  }
  c.b = [nu](double x, double y) {
    if (!(x > 0.0) || !(y > x)) return 0.0;
    return (nu + 2.0) * std::pow(x, nu) / std::pow(y, nu + 1.0);
  };
  c.b_mass_cdf = [nu](double y, double x) {
    if (x <= 0.0) return 0.0;
    const double xc = std::min(x, y);
    return std::pow(xc, nu + 2.0) / std::pow(y, nu + 1.0);
  };
  c.delta_r_exact = [nu](double r) { return 1.0 - (nu + 2.0) / (nu + r + 1.0); };
  c.delta2 = 1.0 / (nu + 3.0);
  c.b_name = "power";
}

void set_zero_kernel(RateCoefficients& c) {
  c.k = [](double, double) { return 0.0; };
  c.coag_active = false;
  c.kstar = c.Kstar = c.k0 = c.Kbig = 0.0;
  c.k_name = "zero";
}

void set_constant_kernel(RateCoefficients& c, double kappa) {
  c.k = [kappa](double, double) { return kappa; };
  c.coag_active = kappa > 0.0;
  c.Kbig = kappa;  // rate-product bound holds verbatim with any alpha
  c.k_name = "constant";
}

void set_bounded_product_kernel(RateCoefficients& c, double kappa) {
  c.k = [kappa](double x, double y) {
    return kappa * (x / (1.0 + x)) * (y / (1.0 + y));
  };
  c.coag_active = kappa > 0.0;
  c.Kbig = kappa;
  c.k_name = "bounded_product";
}

void set_smoluchowski_kernel(RateCoefficients& c) {
  c.k = [](double x, double y) {
    return (std::cbrt(x) + std::cbrt(y)) * (1.0 / std::cbrt(x) + 1.0 / std::cbrt(y));
  };
  c.coag_active = true;
  c.k_name = "smoluchowski";
}

void set_rate_product_kernel(RateCoefficients& c, double K, double alpha) {
  if (!c.a) throw std::logic_error("rate-product kernel: set a first");
  auto a = c.a;
  c.k = [K, alpha, a](double x, double y) {
    return K * std::pow(1.0 + a(x), alpha) * std::pow(1.0 + a(y), alpha);
  };
  c.coag_active = K > 0.0;
  c.Kbig = K;
  c.alpha = alpha;
  c.k_name = "rate_product";
}

void set_diagonal_sum_kernel(RateCoefficients& c, double k0) {
  if (!c.a) throw std::logic_error("diagonal-sum kernel: set a first");
  auto a = c.a;
  const double th = c.theta;
  c.k = [k0, th, a](double x, double y) {
    return k0 * x * y / (x + y) *
           (std::pow(1.0 + a(x), th) + std::pow(1.0 + a(y), th));
  };
  c.coag_active = k0 > 0.0;
  c.k0 = k0;  // exact by construction
  c.k_name = "diagonal_sum";
}

namespace {

// piecewise-linear lookup on sorted abscissae, constant extrapolation
double interp1(const std::vector<double>& xs, const std::vector<double>& vs,
               double x) {
  if (x <= xs.front()) return vs.front();
  if (x >= xs.back()) return vs.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const size_t i = size_t(it - xs.begin()) - 1;
  const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return vs[i] + t * (vs[i + 1] - vs[i]);
}

}  // namespace

void set_tabulated_rate(RateCoefficients& c, std::vector<double> xs,
                        std::vector<double> vals) {
  if (xs.size() != vals.size() || xs.size() < 2) {
    throw std::invalid_argument("tabulated rate: need matching columns, >= 2 rows");
  }
  if (!std::is_sorted(xs.begin(), xs.end())) {
    throw std::invalid_argument("tabulated rate: abscissae must be sorted");
  }
  c.a = [xs = std::move(xs), vals = std::move(vals)](double x) {
    return interp1(xs, vals, x);
  };
  c.a_sup_exact = nullptr;
  c.frag_active = true;
  c.a_name = "table";
}

void set_tabulated_kernel(RateCoefficients& c, std::vector<double> xs,
                          std::vector<double> vals) {
  const size_t n = xs.size();
  if (vals.size() != n * n || n < 2) {
    throw std::invalid_argument("tabulated kernel: need n x n values");
  }
  // symmetrize so the stored table cannot break the symmetry hypothesis
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (vals[i * n + j] + vals[j * n + i]);
      vals[i * n + j] = vals[j * n + i] = s;
    }
  }
  c.k = [xs = std::move(xs), vals = std::move(vals), n](double x, double y) {
    // bilinear on the table, constant beyond it
    auto locate = [&](double v, size_t& i, double& t) {
      const auto& ax = xs;
      if (v <= ax.front()) { i = 0; t = 0.0; return; }
      if (v >= ax.back()) { i = n - 2; t = 1.0; return; }
      auto it = std::upper_bound(ax.begin(), ax.end(), v);
      i = size_t(it - ax.begin()) - 1;
      t = (v - ax[i]) / (ax[i + 1] - ax[i]);
    };
    size_t i, j;
    double s, t;
    locate(x, i, s);
    locate(y, j, t);
    const double v00 = vals[i * n + j], v10 = vals[(i + 1) * n + j];
    const double v01 = vals[i * n + j + 1], v11 = vals[(i + 1) * n + j + 1];
    return (1 - s) * (1 - t) * v00 + s * (1 - t) * v10 + (1 - s) * t * v01 +
           s * t * v11;
  };
  c.coag_active = true;
  c.k_name = "table";
}

}  // namespace cfsd

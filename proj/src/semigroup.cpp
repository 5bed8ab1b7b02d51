#include "cfsd/semigroup.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cfsd {

Eigen::MatrixXd dense_generator(const DiscreteOperators& ops) {
  const int n = ops.n();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  if (ops.diffusion_on) {
    for (int i = 0; i < n; ++i) {
      A(i, i) += ops.diff_diag[i];
      if (i > 0) A(i, i - 1) += ops.diff_lower[i];
      if (i < n - 1) A(i, i + 1) += ops.diff_upper[i];
    }
  }
  for (int i = 0; i < n; ++i) A(i, i) -= ops.frag_loss[i];
  if (!ops.frag_gain.empty()) {
    for (int j = 0; j < n; ++j) {
      const double* col = ops.frag_gain.data() + ops.frag_col_offset[j];
      for (int i = 0; i <= j; ++i) A(i, j) += col[i];
    }
  }
  return A;
}

LinearPropagator::LinearPropagator(const DiscreteOperators& ops, double gamma,
                                   double substep_rho)
    : ops_(&ops), A_(dense_generator(ops)), rho_(substep_rho) {
  if (gamma > 0.0) {
    const int n = ops.n();
    V_.resize(n);
    for (int i = 0; i < n; ++i) {
      V_[i] = eval_V(ops.grid.centers[i], gamma, ops.coeffs);
    }
  }
  leak_weight_ = diffusion_leak_weight(ops);
}

double LinearPropagator::substep_cap() const {
  double dx_min = ops_->grid.widths[0];
  for (double w : ops_->grid.widths) dx_min = std::min(dx_min, w);
  return rho_ * dx_min * dx_min;
}

std::vector<double> LinearPropagator::resolvent_solve(
    double lambda, const std::vector<double>& g, bool with_potential) const {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("resolvent_solve: requires lambda > 0");
  }
  const int n = ops_->n();
  Eigen::MatrixXd M = -A_;
  for (int i = 0; i < n; ++i) {
    M(i, i) += lambda;
    if (with_potential && V_.size() > 0) M(i, i) += V_[i];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) {
    std::ostringstream os;
    os << "resolvent_solve: system nearly singular (rcond=" << rc
       << "); raise lambda";
    throw std::runtime_error(os.str());
  }
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = g[i];
  Eigen::VectorXd u = lu.solve(rhs);
  return std::vector<double>(u.data(), u.data() + n);
}

const LinearPropagator::CnFactor& LinearPropagator::cn_factor(double dt) const {
  auto it = cache_.find(dt);
  if (it != cache_.end()) return *it->second;
  const int n = ops_->n();
  Eigen::MatrixXd G = A_;
  if (V_.size() > 0) {
    for (int i = 0; i < n; ++i) G(i, i) -= V_[i];
  }
  auto f = std::make_shared<CnFactor>();
  f->dt = dt;
  f->forward = Eigen::MatrixXd::Identity(n, n) + 0.5 * dt * G;
  f->lu.compute(Eigen::MatrixXd::Identity(n, n) - 0.5 * dt * G);
  if (cache_.size() > 8) cache_.clear();
  cache_[dt] = f;
  return *f;
}

Eigen::VectorXd LinearPropagator::cn_substep(const CnFactor& f,
                                             const Eigen::VectorXd& u,
                                             double* leak_acc) const {
  Eigen::VectorXd out = f.lu.solve(f.forward * u);
  if (leak_acc) {
    const int last = ops_->n() - 1;
    *leak_acc += f.dt * leak_weight_ * 0.5 * (u[last] + out[last]);
  }
  return out;
}

DensityState LinearPropagator::propagate(const DensityState& f, double t) const {
  if (t < 0.0) throw std::invalid_argument("propagate: requires t >= 0");
  DensityState out = f;
  if (t == 0.0) return out;
  const double cap = substep_cap();
  const double nsub_d = std::ceil(t / cap);
  if (nsub_d > 1e6) {
    throw std::runtime_error(
        "propagate: substep cap asks for more than 1e6 substeps on this grid; "
        "raise the substep multiplier");
  }
  const int nsub = std::max(1, int(nsub_d));
  const double dt = t / nsub;
  const auto& fac = cn_factor(dt);
  Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(f.phi.data(), f.phi.size());
  double leak = 0.0;
  for (int s = 0; s < nsub; ++s) u = cn_substep(fac, u, &leak);
  out.phi.assign(u.data(), u.data() + u.size());
  out.time = f.time + t;
  out.ledger.leakage += leak;
  return out;
}

LinearPropagator::PicardReport LinearPropagator::duhamel_picard(
    const DensityState& f, double T, double tol, int max_iter,
    int s_nodes) const {
  if (!(T > 0.0) || s_nodes < 2 || max_iter < 1) {
    throw std::invalid_argument("duhamel_picard: bad arguments");
  }
  const int K = s_nodes;
  const int n = ops_->n();
  const double Delta = T / K;
  const double cap = substep_cap();
  const int nsub = std::max(1, int(std::ceil(Delta / cap)));
  if (double(nsub) * K > 1e7) {
    throw std::runtime_error("duhamel_picard: substep cap too fine for this grid");
  }
  const auto& fac = cn_factor(Delta / nsub);
  auto ustep = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd v = u;
    for (int s = 0; s < nsub; ++s) v = cn_substep(fac, v, nullptr);
    return v;
  };

  PicardReport rep;
  rep.node_times.resize(K + 1);
  for (int k = 0; k <= K; ++k) rep.node_times[k] = f.time + Delta * k;

  // homogeneous part U(t_k) f, built incrementally
  std::vector<Eigen::VectorXd> Uf(K + 1);
  Uf[0] = Eigen::Map<const Eigen::VectorXd>(f.phi.data(), n);
  for (int k = 1; k <= K; ++k) Uf[k] = ustep(Uf[k - 1]);

  std::vector<Eigen::VectorXd> phi = Uf;  // iteration 0
  std::vector<Eigen::VectorXd> gk(K + 1), conv(K + 1), next(K + 1);

  const auto e0norm = [&](const Eigen::VectorXd& v) {
    DensityState tmp;
    tmp.phi.assign(v.data(), v.data() + n);
    return norm_E0(ops_->grid, tmp, ops_->coeffs.m);
  };

  int stall = 0;
  for (int it = 1; it <= max_iter; ++it) {
    for (int k = 0; k <= K; ++k) {
      std::vector<double> pk(phi[k].data(), phi[k].data() + n);
      const auto out = apply_coag(*ops_, pk, pk);
      gk[k] = Eigen::Map<const Eigen::VectorXd>(out.rate.data(), n);
    }
    conv[0] = Eigen::VectorXd::Zero(n);
    for (int k = 1; k <= K; ++k) {
      conv[k] = ustep(conv[k - 1] + (0.5 * Delta) * gk[k - 1]) +
                (0.5 * Delta) * gk[k];
    }
    double diff = 0.0;
    for (int k = 0; k <= K; ++k) {
      next[k] = Uf[k] + conv[k];
      diff = std::max(diff, e0norm(next[k] - phi[k]));
    }
    phi.swap(next);
    rep.diffs.push_back(diff);
    rep.iterations = it;
    if (rep.diffs.size() >= 2) {
      const double prev = rep.diffs[rep.diffs.size() - 2];
      const double ratio = prev > 0.0 ? diff / prev : 0.0;
      rep.ratios.push_back(ratio);
      stall = (ratio >= 1.0) ? stall + 1 : 0;
    }
    if (diff < tol) {
      rep.converged = true;
      break;
    }
    if (stall >= 3) {
      rep.horizon_too_long = true;
      break;
    }
  }

  rep.trajectory.resize(K + 1);
  for (int k = 0; k <= K; ++k) {
    rep.trajectory[k].phi.assign(phi[k].data(), phi[k].data() + n);
    rep.trajectory[k].time = rep.node_times[k];
    rep.trajectory[k].ledger = f.ledger;
  }
  return rep;
}

std::vector<std::pair<double, double>> LinearPropagator::smoothing_diagnostic(
    const DensityState& f, const std::vector<double>& t_list) const {
  std::vector<std::pair<double, double>> rows;
  const double fe0 = norm_E0(ops_->grid, f, ops_->coeffs.m);
  for (double t : t_list) {
    if (!(t > 0.0)) continue;  // the weight is only meaningful for t > 0
    if (fe0 == 0.0) {
      rows.emplace_back(t, 0.0);
      continue;
    }
    const DensityState ut = propagate(f, t);
    const double val =
        std::pow(t, ops_->coeffs.theta) * norm_Y(ops_->grid, ut, ops_->coeffs) / fe0;
    rows.emplace_back(t, val);
  }
  return rows;
}

}  // namespace cfsd

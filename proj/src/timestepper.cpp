#include "cfsd/timestepper.hpp"

#include <algorithm>
#include <cmath>

#include "cfsd/semigroup.hpp"

namespace cfsd {

Stepper::Stepper(const DiscreteOperators& ops) : ops_(&ops) {
  tridiagonal_ = ops.frag_gain.empty();
  if (!tridiagonal_) A_ = dense_generator(ops);
  leak_weight_ = diffusion_leak_weight(ops);
}

void Stepper::solve_implicit(double dt, std::vector<double>& rhs) {
  const int n = ops_->n();
  if (tridiagonal_) {
    auto it = tri_cache_.find(dt);
    if (it == tri_cache_.end()) {
      auto f = std::make_shared<TriFactor>();
      f->sub.resize(n);
      f->diag.resize(n);
      f->sup.resize(n);
      for (int i = 0; i < n; ++i) {
        f->sub[i] = (i > 0) ? -dt * ops_->diff_lower[i] : 0.0;
        f->sup[i] = (i < n - 1) ? -dt * ops_->diff_upper[i] : 0.0;
        f->diag[i] = 1.0 - dt * (ops_->diff_diag[i] - ops_->frag_loss[i]);
      }
      if (tri_cache_.size() > 16) tri_cache_.clear();
      it = tri_cache_.emplace(dt, f).first;
    }
    // Thomas elimination
    const auto& f = *it->second;
    std::vector<double> cp(n), dp(n);
    cp[0] = f.sup[0] / f.diag[0];
    dp[0] = rhs[0] / f.diag[0];
    for (int i = 1; i < n; ++i) {
      const double denom = f.diag[i] - f.sub[i] * cp[i - 1];
      cp[i] = f.sup[i] / denom;
      dp[i] = (rhs[i] - f.sub[i] * dp[i - 1]) / denom;
    }
    rhs[n - 1] = dp[n - 1];
    for (int i = n - 2; i >= 0; --i) rhs[i] = dp[i] - cp[i] * rhs[i + 1];
    return;
  }
  auto it = dense_cache_.find(dt);
  if (it == dense_cache_.end()) {
    auto f = std::make_shared<DenseFactor>();
    f->lu.compute(Eigen::MatrixXd::Identity(n, n) - dt * A_);
    if (dense_cache_.size() > 8) dense_cache_.clear();
    it = dense_cache_.emplace(dt, f).first;
  }
  Eigen::Map<Eigen::VectorXd> v(rhs.data(), n);
  v = it->second->lu.solve(v).eval();
}

double Stepper::step(DensityState& s, double dt, const StepControls& ctl) {
  const int n = ops_->n();
  const auto& g = ops_->grid;

  CoagApplyResult coag;
  double lam_max = 0.0;
  if (!ops_->channels.empty()) {
    const auto lam = coag_loss_rates(*ops_, s.phi);
    for (int i = 0; i < n; ++i) {
      if (s.phi[i] > 0.0) lam_max = std::max(lam_max, lam[i]);
    }
    coag = apply_coag(*ops_, s.phi, s.phi);
  } else {
    coag.rate.assign(n, 0.0);
  }

  while (dt * lam_max > ctl.loss_fraction) {
    dt *= 0.5;
    if (dt < ctl.dt_min) return 0.0;
  }
  if (dt < ctl.dt_min) return 0.0;

  std::vector<double> next(n);
  for (int i = 0; i < n; ++i) next[i] = s.phi[i] + dt * coag.rate[i];
  solve_implicit(dt, next);

  double clip_added = 0.0;
  min_before_clip_ = 0.0;
  for (int i = 0; i < n; ++i) {
    min_before_clip_ = std::min(min_before_clip_, next[i]);
    if (next[i] < 0.0) {
      clip_added += -next[i] * g.centers[i] * g.widths[i];
      next[i] = 0.0;
    }
  }

  s.ledger.overflow += dt * coag.overflow_mass;
  s.ledger.leakage += dt * leak_weight_ * next[n - 1];
  s.ledger.clip_added += clip_added;
  s.phi = std::move(next);
  s.time += dt;
  return dt;
}

namespace {

MomentSample sample_moments(const DiscreteOperators& ops, const DensityState& s,
                            double min_before_clip) {
  MomentSample ms;
  ms.t = s.time;
  ms.M0 = moment(ops.grid, s, 0.0);
  ms.M1 = moment(ops.grid, s, 1.0);
  ms.Mm = moment(ops.grid, s, ops.coeffs.m);
  ms.E0 = norm_E0(ops.grid, s, ops.coeffs.m);
  ms.Y = norm_Y(ops.grid, s, ops.coeffs);
  ms.min_phi = std::min(min_before_clip,
                        *std::min_element(s.phi.begin(), s.phi.end()));
  ms.leakage = s.ledger.leakage;
  ms.overflow = s.ledger.overflow;
  ms.clip_added = s.ledger.clip_added;
  ms.balance_rel = s.ledger.balance_residual(ms.M1);
  return ms;
}

Trajectory run_duhamel(const DiscreteOperators& ops, const DensityState& f,
                       const RunSettings& rs) {
  Trajectory tr;
  LinearPropagator prop(ops, 0.0, rs.cn_rho);
  double T = rs.t_final;
  DensityState current = f;
  // halve the horizon until the fixed-point map contracts, then march
  while (current.time < rs.t_final - 1e-14) {
    const double span = std::min(T, rs.t_final - current.time);
    auto rep = prop.duhamel_picard(current, span, rs.duhamel_tol,
                                   rs.duhamel_max_iter, rs.duhamel_nodes);
    if (rep.horizon_too_long) {
      T *= 0.5;
      if (T < 1e-6 * rs.t_final) {
        tr.aborted = true;
        tr.abort_reason = "picard iteration failed to contract";
        return tr;
      }
      continue;
    }
    if (!rep.converged) {
      tr.aborted = true;
      tr.abort_reason = "picard iteration exceeded max iterations";
      return tr;
    }
    for (size_t k = (tr.snapshots.empty() ? 0 : 1); k < rep.trajectory.size(); ++k) {
      tr.snapshots.push_back(rep.trajectory[k]);
      tr.moments.push_back(sample_moments(ops, rep.trajectory[k], 0.0));
    }
    tr.steps += rep.iterations;
    current = rep.trajectory.back();
  }
  return tr;
}

}  // namespace

Trajectory run(const DiscreteOperators& ops, const DensityState& f,
               const RunSettings& rs) {
  if (rs.mode == RunSettings::Mode::duhamel) return run_duhamel(ops, f, rs);

  Trajectory tr;
  Stepper stepper(ops);
  DensityState s = f;
  if (s.ledger.initial_mass == 0.0) {
    s.ledger.initial_mass = moment(ops.grid, s, 1.0);
  }
  tr.snapshots.push_back(s);
  tr.moments.push_back(sample_moments(ops, s, 0.0));

  double dt = std::min(rs.step.dt_init, rs.step.dt_max);
  double next_snap = std::min(rs.snapshot_cadence, rs.t_final);
  int accepted_since_grow = 0;

  while (s.time < rs.t_final - 1e-13) {
    const double dt_try = std::min(dt, next_snap - s.time);
    const double used = stepper.step(s, dt_try, rs.step);
    if (used == 0.0) {
      tr.aborted = true;
      tr.abort_reason = "step size underflow (blow-up suspected)";
      break;
    }
    ++tr.steps;
    bool nonfinite = false;
    for (double v : s.phi) nonfinite = nonfinite || !std::isfinite(v);
    if (nonfinite) {
      tr.aborted = true;
      tr.abort_reason = "non-finite density";
      break;
    }
    if (used < dt_try) {
      dt = used;  // the loss rule rejected the larger step
      accepted_since_grow = 0;
    } else if (++accepted_since_grow >= rs.step.grow_interval) {
      dt = std::min(dt * 2.0, rs.step.dt_max);
      accepted_since_grow = 0;
    }
    if (s.time >= next_snap - 1e-12 * std::max(1.0, next_snap)) {
      s.time = next_snap;  // suppress accumulation drift on the mark
      tr.snapshots.push_back(s);
      tr.moments.push_back(sample_moments(ops, s, stepper.min_before_clip()));
      next_snap = std::min(next_snap + rs.snapshot_cadence, rs.t_final);
    }
  }
  return tr;
}

CriteriaReport global_existence_monitor(const DiscreteOperators& ops,
                                        const Trajectory& tr,
                                        const GronwallBound* bound,
                                        bool split_bound_checked) {
  CriteriaReport rep;
  rep.inconclusive = tr.aborted;
  rep.split_bound_checked = split_bound_checked;
  for (const auto& ms : tr.moments) {
    rep.sup_Y = std::max(rep.sup_Y, ms.Y);
    rep.sup_E0 = std::max(rep.sup_E0, ms.E0);
  }
  if (bound) {
    rep.has_bound = true;
    rep.headroom_log = std::numeric_limits<double>::infinity();
    for (size_t q = 0; q < tr.snapshots.size(); ++q) {
      const auto& s = tr.snapshots[q];
      const double sim = moment(ops.grid, s, 1.0) +
                         moment(ops.grid, s, bound->r);
      const double lsim = sim > 0.0 ? std::log(sim)
                                    : -std::numeric_limits<double>::infinity();
      const double lb = bound->at(s.time).log;
      rep.headroom_log = std::min(rep.headroom_log, lb - lsim);
      if (lsim > lb) rep.exceeded = true;
      if (q + 1 == tr.snapshots.size()) {
        rep.log_bound_at_T = lb;
        rep.log_sim_sup = lsim;
      }
    }
    rep.log_sim_sup = -std::numeric_limits<double>::infinity();
    for (const auto& s : tr.snapshots) {
      const double sim = moment(ops.grid, s, 1.0) + moment(ops.grid, s, bound->r);
      if (sim > 0.0) rep.log_sim_sup = std::max(rep.log_sim_sup, std::log(sim));
    }
  }
  return rep;
}

}  // namespace cfsd

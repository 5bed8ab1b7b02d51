#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <vector>

#include "cfsd/operators.hpp"

namespace cfsd {

// Propagator of the linear generator (diffusion + fragmentation), optionally
// damped by a diagonal absorption potential. Immutable after construction
// apart from an internal factorization cache.
class LinearPropagator {
 public:
  // gamma > 0 attaches the absorption potential gamma * ell/(x + x^m).
  explicit LinearPropagator(const DiscreteOperators& ops, double gamma = 0.0,
                            double substep_rho = 2.0);

  const DiscreteOperators& ops() const { return *ops_; }
  const Eigen::MatrixXd& generator() const { return A_; }
  bool has_potential() const { return V_.size() > 0; }
  double substep_cap() const;

  // Solve (lambda - A + V) u = g. Positivity: g <= 0 forces u <= 0.
  std::vector<double> resolvent_solve(double lambda, const std::vector<double>& g,
                                      bool with_potential) const;

  // Crank-Nicolson approximation of U(t) f; right-boundary outflow is booked
  // into the returned state's ledger.
  DensityState propagate(const DensityState& f, double t) const;

  struct PicardReport {
    std::vector<double> node_times;
    std::vector<DensityState> trajectory;  // states at the time nodes
    std::vector<double> diffs;             // sup-in-time E0 distances
    std::vector<double> ratios;            // successive diff quotients
    int iterations = 0;
    bool converged = false;
    bool horizon_too_long = false;         // the iteration stopped contracting
  };

  // Fixed-point iteration on the mild-solution map
  //   phi_{n+1}(t) = U(t) f + int_0^t U(t-s) K(phi_n(s)) ds
  // with trapezoidal time convolution on a uniform node mesh.
  PicardReport duhamel_picard(const DensityState& f, double T, double tol,
                              int max_iter, int s_nodes = 64) const;

  // rows (t, t^theta |U(t)f|_Y / |f|_E0); purely diagnostic
  std::vector<std::pair<double, double>> smoothing_diagnostic(
      const DensityState& f, const std::vector<double>& t_list) const;

 private:
  struct CnFactor {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;  // of I - (dt/2)(A - V)
    Eigen::MatrixXd forward;                  // I + (dt/2)(A - V)
    double dt;
  };
  const CnFactor& cn_factor(double dt) const;
  Eigen::VectorXd cn_substep(const CnFactor& f, const Eigen::VectorXd& u,
                             double* leak_acc) const;

  const DiscreteOperators* ops_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd V_;
  double rho_;
  double leak_weight_;
  mutable std::map<double, std::shared_ptr<CnFactor>> cache_;
};

// Dense matrix of the discrete generator (diffusion + fragmentation).
Eigen::MatrixXd dense_generator(const DiscreteOperators& ops);

}  // namespace cfsd

#include "cfsd/oracles.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cfsd/operators.hpp"
#include "cfsd/quadrature.hpp"
#include "cfsd/timestepper.hpp"

namespace cfsd {

namespace {

double gaussian(double t, double z) {
  return std::exp(-z * z / (4.0 * t)) / std::sqrt(4.0 * M_PI * t);
}

}  // namespace

double heat_dirichlet(const std::function<double(double)>& f, double t, double x,
                      double rel_tol) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_dirichlet: requires t > 0");
  if (x == 0.0) return 0.0;  // the two reflections cancel identically
  return quad::integrate_to_inf(
      [&](double y) { return (gaussian(t, x - y) - gaussian(t, x + y)) * f(y); },
      0.0, rel_tol);
}

double heat_profile(double t0, double x) {
  return x * std::exp(-x * x / (4.0 * t0)) /
         std::sqrt(4.0 * M_PI * t0 * t0 * t0);
}

double heat_profile_evolved(double t0, double t, double x) {
  return heat_profile(t0 + t, x);
}

double pure_frag_linear(double t, double x) {
  const double s = 1.0 + t;
  return s * s * std::exp(-x * s);
}

double pure_coag_constant_M0(double t, double kappa, double M0_init) {
  if (!(kappa > 0.0) || !(M0_init > 0.0)) {
    throw std::invalid_argument("pure_coag_constant_M0: requires kappa, M0 > 0");
  }
  return M0_init / (1.0 + 0.5 * kappa * M0_init * t);
}

namespace {

void write_rows(const std::string& out_dir, const ConvergenceReport& rep) {
  if (out_dir.empty()) return;
  std::filesystem::create_directories(out_dir);
  std::ofstream os(out_dir + "/converge_" + rep.name + ".csv");
  os << "h,error,ratio\n";
  char buf[128];
  for (const auto& row : rep.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", row.h, row.error,
                  row.ratio);
    os << buf;
  }
}

void fill_ratios(ConvergenceReport& rep) {
  for (size_t i = 1; i < rep.rows.size(); ++i) {
    rep.rows[i].ratio = rep.rows[i - 1].error / rep.rows[i].error;
  }
}

double l1_error_vs(const SizeGrid& g, const DensityState& s,
                   const std::function<double(double)>& ref) {
  double acc = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    acc += std::abs(s.phi[i] - ref(g.centers[i])) * g.widths[i];
  }
  return acc;
}

RateCoefficients diffusion_only_coeffs() {
  RateCoefficients c;
  set_zero_rate(c);
  set_powerlaw_daughters(c, 0.0);
  set_zero_kernel(c);
  c.theta0 = 0.5;
  c.theta = 0.75;
  c.m = 2.0;
  return c;
}

// backward Euler heat run on a uniform grid against the odd-Gaussian profile
double heat_run_error(int n_cells, double dt, double T) {
  const double t0 = 1.0;
  auto c = diffusion_only_coeffs();
  const auto g = SizeGrid::uniform(1e-3, 24.0, n_cells);
  AssembleOptions ao;
  ao.fragmentation = false;
  ao.coagulation = false;
  const auto ops = assemble(c, g, ao);
  auto f = project_initial([&](double x) { return heat_profile(t0, x); }, g);
  RunSettings rs;
  rs.t_final = T;
  rs.snapshot_cadence = T;
  rs.step.dt_init = dt;
  rs.step.dt_max = dt;
  rs.step.dt_min = dt * 1e-6;
  const auto tr = run(ops, f, rs);
  return l1_error_vs(g, tr.snapshots.back(),
                     [&](double x) { return heat_profile_evolved(t0, T, x); });
}

ConvergenceReport heat_space_study(const std::string& out_dir, int extra) {
  ConvergenceReport rep;
  rep.name = "diffusion_space";
  const double T = 0.25;
  const double dt = 2e-5;  // small enough that the O(dt) part is invisible
  for (int n = 128; n <= (512 << extra); n *= 2) {
    RefinementRow row;
    row.h = (24.0 - 1e-3) / n;
    row.error = heat_run_error(n, dt, T);
    rep.rows.push_back(row);
  }
  fill_ratios(rep);
  for (size_t i = 1; i < rep.rows.size(); ++i) {
    if (std::abs(rep.rows[i].ratio - 4.0) > 0.5) rep.pass = false;
  }
  rep.detail = "L1 error vs exact absorbing-boundary profile, dx halving";
  write_rows(out_dir, rep);
  return rep;
}

ConvergenceReport heat_time_study(const std::string& out_dir, int extra) {
  ConvergenceReport rep;
  rep.name = "diffusion_time";
  const double T = 0.25;
  const int n = 2048;  // fine enough that the O(dx^2) part is invisible
  for (double dt = 0.025; dt >= 0.025 / (8 << extra) - 1e-15; dt *= 0.5) {
    RefinementRow row;
    row.h = dt;
    row.error = heat_run_error(n, dt, T);
    rep.rows.push_back(row);
  }
  fill_ratios(rep);
  for (size_t i = 1; i < rep.rows.size(); ++i) {
    if (std::abs(rep.rows[i].ratio - 2.0) > 0.3) rep.pass = false;
  }
  rep.detail = "L1 error vs exact absorbing-boundary profile, dt halving";
  write_rows(out_dir, rep);
  return rep;
}

ConvergenceReport frag_moment_study(const std::string& out_dir) {
  ConvergenceReport rep;
  rep.name = "fragmentation_number";
  RateCoefficients c;
  set_power_rate(c, 1.0, 1.0);
  set_powerlaw_daughters(c, 0.0);
  set_zero_kernel(c);
  c.theta0 = 0.5;
  c.theta = 0.75;
  c.m = 2.0;
  const auto g = SizeGrid::geometric(1e-6, 1e3, 512);
  AssembleOptions ao;
  ao.diffusion = false;
  ao.coagulation = false;
  const auto ops = assemble(c, g, ao);
  auto f = project_initial([](double x) { return std::exp(-x); }, g);
  RunSettings rs;
  rs.t_final = 2.0;
  rs.snapshot_cadence = 0.25;
  rs.step.dt_init = 0.01;
  rs.step.dt_max = 0.01;
  const auto tr = run(ops, f, rs);
  double worst = 0.0;
  for (const auto& ms : tr.moments) {
    worst = std::max(worst, std::abs(ms.M0 - (1.0 + ms.t)));
  }
  RefinementRow row;
  row.h = 0.01;
  row.error = worst;
  rep.rows.push_back(row);
  rep.pass = worst <= 1e-4 && !tr.aborted;
  rep.detail = "sup |M0(t) - (1+t)| on [0,2], linear breakup oracle";
  write_rows(out_dir, rep);
  return rep;
}

ConvergenceReport coag_moment_study(const std::string& out_dir) {
  ConvergenceReport rep;
  rep.name = "coagulation_number";
  RateCoefficients c;
  set_zero_rate(c);
  set_powerlaw_daughters(c, 0.0);
  c.theta0 = 0.5;
  c.theta = 0.75;
  c.m = 2.0;
  set_constant_kernel(c, 1.0);
  certify_kernel_constants(c);
  const auto g = SizeGrid::geometric(1e-4, 1e3, 512);
  AssembleOptions ao;
  ao.diffusion = false;
  ao.fragmentation = false;
  const auto ops = assemble(c, g, ao);
  auto f = project_initial([](double x) { return std::exp(-x); }, g);
  RunSettings rs;
  rs.t_final = 1.0;
  rs.snapshot_cadence = 0.25;
  rs.step.dt_init = 2e-4;
  rs.step.dt_max = 2e-4;
  const auto tr = run(ops, f, rs);
  const double M0_end = tr.moments.back().M0;
  RefinementRow row;
  row.h = 2e-4;
  row.error = std::abs(M0_end - pure_coag_constant_M0(1.0, 1.0, 1.0));
  rep.rows.push_back(row);
  rep.pass = row.error <= 1e-4 && !tr.aborted;
  rep.detail = "|M0(1) - 2/3| under the constant kernel";
  write_rows(out_dir, rep);
  return rep;
}

}  // namespace

std::vector<ConvergenceReport> run_convergence_battery(
    const std::string& out_dir, const ConvergenceOptions& opt) {
  std::vector<ConvergenceReport> reps;
  reps.push_back(heat_space_study(out_dir, opt.refine_extra));
  reps.push_back(heat_time_study(out_dir, opt.refine_extra));
  reps.push_back(frag_moment_study(out_dir));
  reps.push_back(coag_moment_study(out_dir));
  return reps;
}

}  // namespace cfsd

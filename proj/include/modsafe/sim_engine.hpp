#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "modsafe/cbf_safety.hpp"
#include "modsafe/clf_control.hpp"
#include "modsafe/estimation.hpp"

namespace modsafe {

/// Full experiment description. Defaults reproduce the stock obstacle
/// avoidance study for the planar double integrator with drag.
struct SimConfig {
  std::string system_name = "double_integrator_drag";
  Vec theta_true = (Vec(2) << 0.8, 1.4).finished();

  double dt = 1e-3;
  double horizon = 20.0;

  bool estimator_enabled = true;
  EstimatorLaw law = EstimatorLaw::Gd;
  int stack_capacity = 20;
  double gamma0 = 100.0;
  double beta = 1.0;
  double gamma_bar = 1000.0;
  double window_dt = 0.1;

  double clf_c3 = 1.0;
  double clf_eps_v = 20.0;

  bool cbf_enabled = true;
  double cbf_eps_h = 1.0;
  double alpha1_lambda = 1.0;
  double alpha2_lambda = 0.5;
  Vec obstacle_center = (Vec(2) << -1.0, 1.0).finished();
  double obstacle_radius = 0.5;
  double obstacle_margin = 0.0;

  Vec x0 = (Vec(4) << -2.0, 2.0, 0.0, 0.0).finished();
  Vec that0 = (Vec(2) << 0.0, 0.0).finished();
  Vec x0_lo = (Vec(4) << -2.2, 1.8, 0.0, 0.0).finished();
  Vec x0_hi = (Vec(4) << -1.8, 2.2, 0.0, 0.0).finished();
  Vec that0_lo = (Vec(2) << 0.0, 0.0).finished();
  Vec that0_hi = (Vec(2) << 3.0, 3.0).finished();

  std::uint64_t seed = 1;
  int runs = 25;
  int threads = 0;  ///< 0 picks the hardware concurrency
  std::vector<EstimatorLaw> mc_laws = {EstimatorLaw::Gd, EstimatorLaw::Rls,
                                       EstimatorLaw::RlsForget,
                                       EstimatorLaw::RlsVarForget};
  std::vector<Vec> sweep_that0 = {(Vec(2) << 0.8, 1.4).finished(),
                                  (Vec(2) << 2.0, 2.0).finished(),
                                  (Vec(2) << 3.0, 3.0).finished()};
  std::vector<EstimatorLaw> sweep_laws = {EstimatorLaw::Gd,
                                          EstimatorLaw::RlsForget};

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// Number of integrator steps, horizon / dt rounded.
  int steps() const;
};

struct TrajectoryRecord {
  double t = 0.0;
  Vec x;
  Vec u_ref;
  Vec u;
  Vec theta_hat;
  double ttil_norm = 0.0;
  double V = 0.0;
  double psi0 = 0.0;
  double psi1 = 0.0;
  int stack_size = 0;
  double sigma_min = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  double dt = 0.0;
};

struct RunStats {
  int run = 0;
  std::uint64_t seed = 0;
  double final_x_norm = 0.0;
  double min_psi0 = 0.0;
  double delta_hat = 0.0;       ///< sup_t |theta - theta_hat|
  double max_gamma_norm = 0.0;  ///< sup_t |Gamma| (spectral)
  int issf_violations = 0;      ///< steps where some inflated margin < -1e-4
  double worst_issf_margin = 0.0;
  bool aborted = false;
  int abort_step = -1;
  std::string abort_reason;
};

struct SimResult {
  Trajectory traj;
  RunStats stats;
  Vec x0;
  Vec that0;
  EstimatorLaw law = EstimatorLaw::Gd;
};

struct NonFiniteState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Classic fourth-order Runge-Kutta step for s' = deriv(t, s). Throws
/// NonFiniteState when a stage derivative stops being finite.
Vec rk4_step(const std::function<Vec(double, const Vec&)>& deriv, const Vec& s,
             double t, double dt);

/// Closed-loop run: min-norm stabilizing controller, safety filter, online
/// estimator, all advanced with sample-and-hold control at period dt. The
/// history stack is frozen within each integrator step; window updates and
/// stack insertions happen between steps. Controller infeasibility or a
/// non-finite state aborts the run and returns the partial trajectory.
SimResult simulate(const SimConfig& cfg, const Vec& x0, const Vec& that0);

std::uint64_t derive_run_seed(std::uint64_t seed, int run);

/// Draws (x0, theta_hat0) uniformly from the configured boxes. Components are
/// drawn in state order, then estimate order.
std::pair<Vec, Vec> sample_initial_conditions(std::mt19937_64& rng,
                                              const SimConfig& cfg);

struct MonteCarloSummary {
  EstimatorLaw law = EstimatorLaw::Gd;
  std::vector<double> times;
  std::vector<double> ttil_mean;
  std::vector<double> ttil_std;  ///< population standard deviation
  std::vector<double> ttil_min;
  std::vector<double> ttil_max;
  std::vector<RunStats> runs;
  /// Populated only when keep_trajectories is requested.
  std::vector<SimResult> results;
};

/// Batch of cfg.runs independent runs of one estimator law. Per-run RNG
/// streams derive from (seed, run index), so results do not depend on
/// execution order; runs may execute concurrently.
MonteCarloSummary monte_carlo(const SimConfig& cfg, EstimatorLaw law,
                              bool keep_trajectories = false);

struct SweepRecord {
  EstimatorLaw law = EstimatorLaw::Gd;
  Vec that0;
  double min_psi0 = 0.0;
  double max_ttil = 0.0;
  double final_x_norm = 0.0;
  int issf_violations = 0;
};

/// One run per (law, initial estimate) from cfg.sweep_laws x cfg.sweep_that0,
/// all starting at cfg.x0.
std::vector<SweepRecord> uncertainty_sweep(const SimConfig& cfg);

struct IssfReport {
  int violations = 0;
  double worst_margin = 0.0;
  double delta_hat = 0.0;
};

/// Post-hoc robust-safety check: with delta = sup_t |theta - theta_hat|
/// measured from the trajectory, every inflated margin psi_{i-1} + gamma_i
/// must stay above -tol.
IssfReport issf_monitor(const Trajectory& traj,
                        const std::vector<ClassKappaExt>& alphas, double eps_h,
                        double tol = 1e-4);

struct ClfDecreaseReport {
  int violations = 0;
  double worst_excess = 0.0;
};

/// Post-hoc decrease check for runs driven by the unfiltered stabilizing
/// controller: per step, (V_{k+1} - V_k) / dt must not exceed
/// -c3 min(V_k, V_{k+1}) + (eps_v / 4) max(ttil_k, ttil_{k+1})^2 + tol.
ClfDecreaseReport clf_decrease_monitor(const Trajectory& traj, double c3,
                                       double eps_v, double tol = 1e-3);

}  // namespace modsafe

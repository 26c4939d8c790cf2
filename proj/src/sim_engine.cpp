#include "modsafe/sim_engine.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace modsafe {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("SimConfig: ") + what);
}

void require_box(const Vec& lo, const Vec& hi, const char* what) {
  require(lo.size() == hi.size(), what);
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    require(lo(i) <= hi(i), what);
}

double spectral_norm_psd(const Mat& s) {
  if (s.rows() == 1) return std::abs(s(0, 0));
  if (s.rows() == 2) {
    const double tr = s(0, 0) + s(1, 1);
    const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
    return std::abs(0.5 * tr + disc);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct RunOutput {
  std::vector<double> ttil;
  RunStats stats;
  SimResult full;
  bool has_full = false;
};

}  // namespace

void SimConfig::validate() const {
  require(!system_name.empty(), "system.name must be set");
  require(dt > 0.0 && std::isfinite(dt), "sim.dt must be positive");
  require(horizon > 0.0 && std::isfinite(horizon),
          "sim.horizon must be positive");
  require(steps() >= 1, "sim.horizon must cover at least one step");
  require(theta_true.size() >= 1, "system.theta must be non-empty");
  require(runs >= 1, "sim.runs must be at least 1");
  require(threads >= 0, "sim.threads must be non-negative");
  require(stack_capacity >= 1, "estimator.N must be at least 1");
  require(gamma0 > 0.0, "estimator.gamma0 must be positive");
  require(beta >= 0.0, "estimator.beta must be non-negative");
  require(gamma_bar > 0.0, "estimator.gamma_bar must be positive");
  require(window_dt >= dt, "estimator.window_dt must be at least sim.dt");
  require(clf_c3 > 0.0, "clf.c3 must be positive");
  require(clf_eps_v > 0.0, "clf.eps_v must be positive");
  require(cbf_eps_h > 0.0, "cbf.eps_h must be positive");
  require(alpha1_lambda > 0.0, "cbf.alpha1_lambda must be positive");
  require(alpha2_lambda > 0.0, "cbf.alpha2_lambda must be positive");
  require(obstacle_center.size() == 2, "cbf.obstacle_center must be planar");
  require(obstacle_radius > 0.0, "cbf.obstacle_radius must be positive");
  require(obstacle_margin >= 0.0, "cbf.margin must be non-negative");
  require_box(x0_lo, x0_hi, "sim.x0_lo/x0_hi must be a box");
  require_box(that0_lo, that0_hi, "sim.that0_lo/that0_hi must be a box");
  require(!mc_laws.empty(), "montecarlo.laws must be non-empty");
  require(!sweep_laws.empty(), "sweep.laws must be non-empty");
  require(!sweep_that0.empty(), "sweep.that0 must be non-empty");
}

int SimConfig::steps() const {
  return static_cast<int>(std::llround(horizon / dt));
}

Vec rk4_step(const std::function<Vec(double, const Vec&)>& deriv, const Vec& s,
             double t, double dt) {
  const Vec k1 = deriv(t, s);
  if (!k1.allFinite()) throw NonFiniteState("rk4_step: stage 1 not finite");
  const Vec k2 = deriv(t + 0.5 * dt, s + (0.5 * dt) * k1);
  if (!k2.allFinite()) throw NonFiniteState("rk4_step: stage 2 not finite");
  const Vec k3 = deriv(t + 0.5 * dt, s + (0.5 * dt) * k2);
  if (!k3.allFinite()) throw NonFiniteState("rk4_step: stage 3 not finite");
  const Vec k4 = deriv(t + dt, s + dt * k3);
  if (!k4.allFinite()) throw NonFiniteState("rk4_step: stage 4 not finite");
  Vec next = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw NonFiniteState("rk4_step: state not finite");
  return next;
}

SimResult simulate(const SimConfig& cfg, const Vec& x0, const Vec& that0) {
  cfg.validate();
  const ParametricAffineSystem sys = make_system(cfg.system_name);
  const int n = sys.n;
  const int p = sys.p;
  if (sys.n != 4 || sys.m != 2)
    throw std::invalid_argument(
        "simulate: experiment wiring expects a planar double integrator "
        "(n = 4, m = 2)");
  if (x0.size() != n) throw std::invalid_argument("simulate: x0 has wrong size");
  if (that0.size() != p)
    throw std::invalid_argument("simulate: that0 has wrong size");
  if (cfg.theta_true.size() != p)
    throw std::invalid_argument("simulate: theta has wrong size");

  const EissClf clf = make_double_integrator_clf(cfg.clf_c3, cfg.clf_eps_v);
  const HocbfChain chain = make_obstacle_chain(
      ObstacleSpec{cfg.obstacle_center, cfg.obstacle_radius,
                   cfg.obstacle_margin},
      cfg.alpha1_lambda, cfg.alpha2_lambda, cfg.cbf_eps_h);

  IntegrationWindow window(cfg.window_dt, sys);
  HistoryStack stack(cfg.stack_capacity, n, p);

  SimResult out;
  out.x0 = x0;
  out.that0 = that0;
  out.law = cfg.law;
  const int K = cfg.steps();
  out.traj.dt = cfg.dt;
  out.traj.records.reserve(static_cast<std::size_t>(K) + 1);

  Vec x = x0;
  Vec that = that0;
  Mat gamma = cfg.gamma0 * Mat::Identity(p, p);

  const int aug = n + p + p * p;
  Vec s(aug);
  Vec u = Vec::Zero(sys.m);

  auto deriv = [&](double, const Vec& state) {
    Vec ds(aug);
    const Vec xs = state.head(n);
    ds.head(n) = true_dynamics(sys, xs, u, cfg.theta_true);
    if (cfg.estimator_enabled && stack.size() > 0) {
      const Vec th = state.segment(n, p);
      const Eigen::Map<const Mat> g(state.data() + n + p, p, p);
      ds.segment(n, p) = theta_hat_dot(stack, th, g);
      Eigen::Map<Mat>(ds.data() + n + p, p, p) =
          gamma_dot(stack, g, cfg.law, cfg.beta, cfg.gamma_bar);
    } else {
      ds.tail(p + p * p).setZero();
    }
    return ds;
  };

  double max_gamma = spectral_norm_psd(gamma);
  for (int k = 0; k <= K; ++k) {
    const double t = k * cfg.dt;
    Vec u_ref;
    try {
      u_ref = clf_controller(clf, sys, x, that);
      u = cfg.cbf_enabled ? safety_filter(chain, sys, x, that, u_ref) : u_ref;
    } catch (const QpInfeasible& e) {
      out.stats.aborted = true;
      out.stats.abort_step = k;
      out.stats.abort_reason = e.what();
      break;
    }

    TrajectoryRecord rec;
    rec.t = t;
    rec.x = x;
    rec.u_ref = u_ref;
    rec.u = u;
    rec.theta_hat = that;
    rec.ttil_norm = estimation_error_norm(cfg.theta_true, that);
    rec.V = clf.value(x);
    const std::vector<double> psis = psi_chain_eval(chain, x);
    rec.psi0 = psis[0];
    rec.psi1 = psis[1];
    rec.stack_size = stack.size();
    rec.sigma_min = stack.min_singular_value();
    out.traj.records.push_back(std::move(rec));

    if (cfg.estimator_enabled) {
      window.append(t, x, u);
      if (auto pair = window_regressor(window, sys, t))
        svd_max_insert(stack, *pair);
    }

    if (k == K) break;

    s.head(n) = x;
    s.segment(n, p) = that;
    Eigen::Map<Mat>(s.data() + n + p, p, p) = gamma;
    try {
      s = rk4_step(deriv, s, t, cfg.dt);
    } catch (const NonFiniteState& e) {
      out.stats.aborted = true;
      out.stats.abort_step = k;
      out.stats.abort_reason = e.what();
      break;
    }
    x = s.head(n);
    that = s.segment(n, p);
    gamma = Eigen::Map<const Mat>(s.data() + n + p, p, p);
    gamma = 0.5 * (gamma + gamma.transpose()).eval();
    max_gamma = std::max(max_gamma, spectral_norm_psd(gamma));
  }

  RunStats& st = out.stats;
  st.max_gamma_norm = max_gamma;
  if (out.traj.records.empty()) {
    st.final_x_norm = x.norm();
    st.min_psi0 = psi_chain_eval(chain, x)[0];
    st.delta_hat = estimation_error_norm(cfg.theta_true, that);
  } else {
    st.final_x_norm = out.traj.records.back().x.norm();
    st.min_psi0 = std::numeric_limits<double>::infinity();
    st.delta_hat = 0.0;
    for (const TrajectoryRecord& r : out.traj.records) {
      st.min_psi0 = std::min(st.min_psi0, r.psi0);
      st.delta_hat = std::max(st.delta_hat, r.ttil_norm);
    }
  }
  const IssfReport rep = issf_monitor(out.traj, chain.alphas, cfg.cbf_eps_h);
  st.issf_violations = rep.violations;
  st.worst_issf_margin = rep.worst_margin;
  return out;
}

std::uint64_t derive_run_seed(std::uint64_t seed, int run) {
  // splitmix64 over the run-indexed stream position
  std::uint64_t z =
      seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(run) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::pair<Vec, Vec> sample_initial_conditions(std::mt19937_64& rng,
                                              const SimConfig& cfg) {
  Vec x0(cfg.x0_lo.size());
  for (Eigen::Index i = 0; i < x0.size(); ++i)
    x0(i) = cfg.x0_lo(i) + (cfg.x0_hi(i) - cfg.x0_lo(i)) * uniform01(rng);
  Vec th0(cfg.that0_lo.size());
  for (Eigen::Index i = 0; i < th0.size(); ++i)
    th0(i) =
        cfg.that0_lo(i) + (cfg.that0_hi(i) - cfg.that0_lo(i)) * uniform01(rng);
  return {std::move(x0), std::move(th0)};
}

MonteCarloSummary monte_carlo(const SimConfig& cfg, EstimatorLaw law,
                              bool keep_trajectories) {
  cfg.validate();
  SimConfig run_cfg = cfg;
  run_cfg.law = law;
  const int runs = cfg.runs;

  std::vector<RunOutput> outs(static_cast<std::size_t>(runs));
  auto run_one = [&](int r) {
    const std::uint64_t run_seed = derive_run_seed(cfg.seed, r);
    std::mt19937_64 rng(run_seed);
    const auto [x0, th0] = sample_initial_conditions(rng, run_cfg);
    SimResult res = simulate(run_cfg, x0, th0);
    res.stats.run = r;
    res.stats.seed = run_seed;
    RunOutput& o = outs[static_cast<std::size_t>(r)];
    o.ttil.reserve(res.traj.records.size());
    for (const TrajectoryRecord& rec : res.traj.records)
      o.ttil.push_back(rec.ttil_norm);
    o.stats = res.stats;
    if (keep_trajectories) {
      o.full = std::move(res);
      o.has_full = true;
    }
  };

  unsigned want = cfg.threads > 0
                      ? static_cast<unsigned>(cfg.threads)
                      : std::max(1u, std::thread::hardware_concurrency());
  want = std::min<unsigned>(want, static_cast<unsigned>(runs));
  if (want <= 1) {
    for (int r = 0; r < runs; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto worker = [&] {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= runs) return;
        try {
          run_one(r);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(want);
    for (unsigned i = 0; i < want; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  MonteCarloSummary summary;
  summary.law = law;
  const int K = cfg.steps();
  summary.times.resize(static_cast<std::size_t>(K) + 1);
  summary.ttil_mean.resize(summary.times.size());
  summary.ttil_std.resize(summary.times.size());
  summary.ttil_min.resize(summary.times.size());
  summary.ttil_max.resize(summary.times.size());
  for (std::size_t k = 0; k < summary.times.size(); ++k) {
    summary.times[k] = static_cast<double>(k) * cfg.dt;
    double sum = 0.0, lo = 0.0, hi = 0.0;
    int count = 0;
    for (const RunOutput& o : outs) {
      if (k >= o.ttil.size()) continue;
      const double v = o.ttil[k];
      if (count == 0) {
        lo = hi = v;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      sum += v;
      ++count;
    }
    if (count == 0) {
      summary.ttil_mean[k] = summary.ttil_std[k] = 0.0;
      summary.ttil_min[k] = summary.ttil_max[k] = 0.0;
      continue;
    }
    const double mean = sum / count;
    double ss = 0.0;
    for (const RunOutput& o : outs) {
      if (k >= o.ttil.size()) continue;
      const double d = o.ttil[k] - mean;
      ss += d * d;
    }
    summary.ttil_mean[k] = mean;
    summary.ttil_std[k] = std::sqrt(ss / count);
    summary.ttil_min[k] = lo;
    summary.ttil_max[k] = hi;
  }

  summary.runs.reserve(outs.size());
  for (RunOutput& o : outs) {
    summary.runs.push_back(o.stats);
    if (o.has_full) summary.results.push_back(std::move(o.full));
  }
  return summary;
}

std::vector<SweepRecord> uncertainty_sweep(const SimConfig& cfg) {
  cfg.validate();
  std::vector<SweepRecord> recs;
  recs.reserve(cfg.sweep_laws.size() * cfg.sweep_that0.size());
  for (const EstimatorLaw law : cfg.sweep_laws) {
    for (const Vec& th0 : cfg.sweep_that0) {
      SimConfig c = cfg;
      c.law = law;
      const SimResult res = simulate(c, cfg.x0, th0);
      SweepRecord rec;
      rec.law = law;
      rec.that0 = th0;
      rec.min_psi0 = res.stats.min_psi0;
      rec.max_ttil = res.stats.delta_hat;
      rec.final_x_norm = res.stats.final_x_norm;
      rec.issf_violations = res.stats.issf_violations;
      recs.push_back(std::move(rec));
    }
  }
  return recs;
}

IssfReport issf_monitor(const Trajectory& traj,
                        const std::vector<ClassKappaExt>& alphas, double eps_h,
                        double tol) {
  if (alphas.size() != 2)
    throw std::invalid_argument(
        "issf_monitor: expects a relative-degree-2 chain");
  IssfReport rep;
  if (traj.records.empty()) return rep;
  for (const TrajectoryRecord& r : traj.records)
    rep.delta_hat = std::max(rep.delta_hat, r.ttil_norm);
  const std::vector<double> gammas =
      gamma_recursion(alphas, eps_h, rep.delta_hat);
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (const TrajectoryRecord& r : traj.records) {
    const double m1 = r.psi0 + gammas[0];
    const double m2 = r.psi1 + gammas[1];
    rep.worst_margin = std::min({rep.worst_margin, m1, m2});
    if (std::min(m1, m2) < -tol) ++rep.violations;
  }
  return rep;
}

ClfDecreaseReport clf_decrease_monitor(const Trajectory& traj, double c3,
                                       double eps_v, double tol) {
  ClfDecreaseReport rep;
  if (traj.records.size() < 2) return rep;
  rep.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < traj.records.size(); ++k) {
    const TrajectoryRecord& a = traj.records[k];
    const TrajectoryRecord& b = traj.records[k + 1];
    const double fd = (b.V - a.V) / traj.dt;
    const double ttil = std::max(a.ttil_norm, b.ttil_norm);
    const double bound = -c3 * std::min(a.V, b.V) + 0.25 * eps_v * ttil * ttil;
    rep.worst_excess = std::max(rep.worst_excess, fd - bound);
    if (fd > bound + tol) ++rep.violations;
  }
  return rep;
}

}  // namespace modsafe

// Acceptance suite: one line per criterion, exit code = number of failures.
// Tolerances are fixed here and nowhere else.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "modsafe/cbf_safety.hpp"
#include "modsafe/cli_app.hpp"
#include "modsafe/clf_control.hpp"
#include "modsafe/csv_io.hpp"
#include "modsafe/dynamics.hpp"
#include "modsafe/estimation.hpp"
#include "modsafe/qp_core.hpp"
#include "modsafe/sim_engine.hpp"
#include "testutil.hpp"

using namespace modsafe;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool ok,
            const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", idx, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double vec_mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

// ---- 1, 2, 3: shared Monte Carlo batches, 25 runs per estimator law ----

void criteria_batches() {
  SimConfig cfg;  // stock obstacle-avoidance experiment
  const std::vector<EstimatorLaw> laws = {
      EstimatorLaw::Gd, EstimatorLaw::Rls, EstimatorLaw::RlsForget,
      EstimatorLaw::RlsVarForget};
  std::map<EstimatorLaw, MonteCarloSummary> batch;
  for (const EstimatorLaw law : laws) batch.emplace(law, monte_carlo(cfg, law));

  // 1: stabilization. Every gd run ends within 0.05 of the origin.
  {
    double worst = 0.0;
    bool aborted = false;
    for (const RunStats& st : batch.at(EstimatorLaw::Gd).runs) {
      worst = std::max(worst, st.final_x_norm);
      aborted = aborted || st.aborted;
    }
    report(1, "stabilization to the origin", worst < 0.05 && !aborted,
           "worst final |x| = " + fmt(worst) + " (< 0.05), aborts = " +
               (aborted ? "yes" : "no"));
  }

  // 2: robust safety. No run of any law leaves the inflated safe set
  // (margin tolerance 1e-4).
  {
    int violations = 0;
    double worst_margin = 1e300;
    for (const EstimatorLaw law : laws) {
      for (const RunStats& st : batch.at(law).runs) {
        violations += st.issf_violations;
        worst_margin = std::min(worst_margin, st.worst_issf_margin);
      }
    }
    report(2, "inflated-set safety across all laws", violations == 0,
           "violations = " + std::to_string(violations) +
               ", worst margin = " + fmt(worst_margin));
  }

  // 3: estimator convergence and ordering. Final mean error under 5% of the
  // initial mean for every law; time-averaged error ranks plain rls slowest
  // and rls_forget no slower than gd.
  {
    const double initial = batch.at(EstimatorLaw::Gd).ttil_mean.front();
    bool converged = true;
    std::map<EstimatorLaw, double> avg, fin;
    std::ostringstream detail;
    for (const EstimatorLaw law : laws) {
      const MonteCarloSummary& s = batch.at(law);
      fin[law] = s.ttil_mean.back();
      avg[law] = vec_mean(s.ttil_mean);
      converged = converged && fin[law] <= 0.05 * initial;
      detail << estimator_law_name(law) << " final=" << fmt(fin[law])
             << " avg=" << fmt(avg[law]) << "; ";
    }
    const bool rls_slowest = avg[EstimatorLaw::Rls] > avg[EstimatorLaw::Gd] &&
                             avg[EstimatorLaw::Rls] >
                                 avg[EstimatorLaw::RlsForget] &&
                             avg[EstimatorLaw::Rls] >
                                 avg[EstimatorLaw::RlsVarForget];
    const bool forget_fast =
        avg[EstimatorLaw::RlsForget] <= avg[EstimatorLaw::Gd];
    report(3, "estimator convergence and ordering",
           converged && rls_slowest && forget_fast,
           "initial=" + fmt(initial) + "; " + detail.str() +
               "need final <= 5% of initial, rls slowest, rls_forget <= gd");
  }
}

// ---- 4: integrator fidelity against matrix-exponential flows ----

void criterion_integrator() {
  bool ok = true;
  std::ostringstream detail;

  {
    std::mt19937_64 rng(2024);
    const Mat M =
        -Mat::Identity(4, 4) + 0.5 * testutil::random_mat(rng, 4, 4);
    const Vec x0 = testutil::random_vec(rng, 4);
    const auto deriv = [&](double, const Vec& s) { return Vec(M * s); };
    Vec x = x0;
    const double dt = 1e-3;
    for (int k = 0; k < 1000; ++k) x = rk4_step(deriv, x, k * dt, dt);
    const Mat flow = (M * 1.0).exp();
    const double err = (x - flow * x0).norm();
    ok = ok && err <= 1e-9;
    detail << "linear flow err=" << fmt(err) << " (<= 1e-9)";
  }

  {
    HistoryStack stack(2, 1, 2);
    RegressorPair p1, p2;
    p1.Y = Vec::Zero(1);
    p1.F = (Mat(1, 2) << 1.0, 0.2).finished();
    p2.Y = Vec::Zero(1);
    p2.F = (Mat(1, 2) << 0.3, 1.1).finished();
    svd_max_insert(stack, p1);
    svd_max_insert(stack, p2);
    const Mat A = stack.info_matrix();
    const Mat gamma0 = 100.0 * Mat::Identity(2, 2);
    const double dt = 1e-3, beta = 1.0;

    const auto integrate = [&](EstimatorLaw law) {
      Vec s(4);
      Eigen::Map<Mat>(s.data(), 2, 2) = gamma0;
      const auto deriv = [&](double, const Vec& v) {
        const Eigen::Map<const Mat> g(v.data(), 2, 2);
        Vec d(4);
        Eigen::Map<Mat>(d.data(), 2, 2) = gamma_dot(stack, g, law, beta, 1e6);
        return d;
      };
      for (int k = 0; k < 1000; ++k) s = rk4_step(deriv, s, k * dt, dt);
      return Mat(Eigen::Map<const Mat>(s.data(), 2, 2));
    };

    const Mat rls = integrate(EstimatorLaw::Rls);
    const Mat rls_expect = (gamma0.inverse() + A).inverse();
    const double rls_err = (rls - rls_expect).norm();

    const Mat forget = integrate(EstimatorLaw::RlsForget);
    const double decay = std::exp(-beta);
    const Mat forget_expect =
        (decay * gamma0.inverse() + ((1.0 - decay) / beta) * A).inverse();
    const double forget_err = (forget - forget_expect).norm();

    ok = ok && rls_err <= 1e-6 && forget_err <= 1e-6;
    detail << ", rls gain err=" << fmt(rls_err) << ", rls_forget gain err="
           << fmt(forget_err) << " (<= 1e-6)";
  }

  report(4, "integrator matches closed-form flows", ok, detail.str());
}

// ---- 5: pointwise QP optimality against a projected-gradient oracle ----

void criterion_qp() {
  std::mt19937_64 rng(77);
  double worst_min = 0.0, worst_proj = 0.0, worst_feas = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = trial < 500 ? 2 : 1 + static_cast<int>(rng() % 4);
    Vec a = testutil::random_vec(rng, dim, -2.0, 2.0);
    if (a.norm() < 0.1) a(0) = 1.0;
    const double b = testutil::uniform(rng, -2.0, 2.0);

    const Vec u = min_norm_halfspace({a, b, Sense::LE});
    worst_min = std::max(
        worst_min, (u - testutil::pgd_qp(Vec::Zero(dim), a, b, false)).norm());
    worst_feas = std::max(worst_feas, a.dot(u) - b);

    const Vec u_ref = testutil::random_vec(rng, dim, -3.0, 3.0);
    const Vec v = project_halfspace(u_ref, {a, b, Sense::GE});
    worst_proj =
        std::max(worst_proj, (v - testutil::pgd_qp(u_ref, a, b, true)).norm());
    worst_feas = std::max(worst_feas, b - a.dot(v));
  }
  const bool ok =
      worst_min <= 1e-6 && worst_proj <= 1e-6 && worst_feas <= 1e-10;
  report(5, "closed-form QPs match the oracle", ok,
         "min-norm err=" + fmt(worst_min) + ", projection err=" +
             fmt(worst_proj) + " (<= 1e-6), feasibility slack=" +
             fmt(worst_feas) + " (<= 1e-10)");
}

// ---- 6: Lie derivatives agree with finite differences ----

void criterion_lie() {
  const ParametricAffineSystem sys = make_double_integrator_drag();
  const EissClf clf = make_double_integrator_clf(1.0, 20.0);
  ObstacleSpec obs;
  obs.center = (Vec(2) << -1.0, 1.0).finished();
  obs.radius = 0.5;
  const HocbfChain chain = make_obstacle_chain(obs, 1.0, 0.5, 1.0);
  Vec theta(2);
  theta << 0.8, 1.4;

  std::mt19937_64 rng(501);
  const double h = 1e-6;
  double worst_grad = 0.0, worst_dir = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec x = testutil::random_vec(rng, 4, -2.5, 2.5);
    const Vec that = testutil::random_vec(rng, 2, 0.0, 3.0);
    const Vec u = testutil::random_vec(rng, 2, -2.0, 2.0);

    const RowVec gV = clf.gradient(x);
    const RowVec gPsi = chain.psi_last_grad(x);
    for (int i = 0; i < 4; ++i) {
      Vec hi = x, lo = x;
      hi(i) += h;
      lo(i) -= h;
      const double fdV = (clf.value(hi) - clf.value(lo)) / (2.0 * h);
      worst_grad = std::max(
          worst_grad, std::abs(gV(i) - fdV) / std::max(1.0, std::abs(gV(i))));
      const double fdP = (chain.psi[1](hi) - chain.psi[1](lo)) / (2.0 * h);
      worst_grad = std::max(worst_grad, std::abs(gPsi(i) - fdP) /
                                            std::max(1.0, std::abs(gPsi(i))));
    }

    const Vec xdot = true_dynamics(sys, x, u, theta);
    const ClfLieData lv = clf_lie(clf, sys, x);
    const double analytic_v = lv.LfV + lv.LFV.dot(theta) + lv.LgV.dot(u);
    const double fd_v =
        (clf.value(x + h * xdot) - clf.value(x - h * xdot)) / (2.0 * h);
    worst_dir = std::max(worst_dir, std::abs(analytic_v - fd_v) /
                                        std::max(1.0, std::abs(analytic_v)));

    const PsiLieData lp = cbf_lie(chain, sys, x);
    const double analytic_p = lp.Lf + lp.LF.dot(theta) + lp.Lg.dot(u);
    const double fd_p =
        (chain.psi[1](x + h * xdot) - chain.psi[1](x - h * xdot)) / (2.0 * h);
    worst_dir = std::max(worst_dir, std::abs(analytic_p - fd_p) /
                                        std::max(1.0, std::abs(analytic_p)));
  }
  const bool ok = worst_grad <= 1e-6 && worst_dir <= 1e-5;
  report(6, "Lie derivatives match finite differences", ok,
         "gradient rel err=" + fmt(worst_grad) + " (<= 1e-6), directional rel err=" +
             fmt(worst_dir) + " (<= 1e-5)");
}

// ---- 7: inflation depths, frozen values and two-route consistency ----

void criterion_gamma() {
  bool ok = true;
  std::ostringstream detail;

  const std::vector<ClassKappaExt> stock = {ClassKappaExt::linear(1.0),
                                            ClassKappaExt::linear(0.5)};
  double worst_stock = 0.0;
  for (const double delta : {0.0, 1.0, 2.0}) {
    const std::vector<double> g = gamma_recursion(stock, 1.0, delta);
    worst_stock = std::max({worst_stock,
                            std::abs(g[0] - 0.5 * delta * delta),
                            std::abs(g[1] - 0.5 * delta * delta)});
  }
  ok = ok && worst_stock <= 1e-12;
  detail << "stock depths err=" << fmt(worst_stock);

  std::mt19937_64 rng(909);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double l1 = testutil::uniform(rng, 0.1, 4.0);
    const double l2 = testutil::uniform(rng, 0.1, 4.0);
    const double eps = testutil::uniform(rng, 0.1, 30.0);
    const double delta = testutil::uniform(rng, 0.0, 3.0);
    const std::vector<double> g = gamma_recursion(
        {ClassKappaExt::linear(l1), ClassKappaExt::linear(l2)}, eps, delta);
    const double g2 = eps * delta * delta / (4.0 * l2);
    const double g1 = g2 / l1;
    worst = std::max({worst, std::abs(g[1] - g2) / std::max(1.0, g2),
                      std::abs(g[0] - g1) / std::max(1.0, g1)});
  }
  ok = ok && worst <= 1e-12;
  detail << ", closed-form rel err=" << fmt(worst) << " (<= 1e-12)";
  report(7, "inflation recursion", ok, detail.str());
}

// ---- 8: CLF decrease on unfiltered runs ----

void criterion_clf_decrease() {
  SimConfig cfg;
  cfg.cbf_enabled = false;  // stabilizing controller alone
  const MonteCarloSummary batch = monte_carlo(cfg, EstimatorLaw::Gd, true);
  int violations = 0;
  double worst = -1e300;
  bool aborted = false;
  for (const SimResult& res : batch.results) {
    const ClfDecreaseReport rep =
        clf_decrease_monitor(res.traj, cfg.clf_c3, cfg.clf_eps_v);
    violations += rep.violations;
    worst = std::max(worst, rep.worst_excess);
    aborted = aborted || res.stats.aborted;
  }
  report(8, "certified decrease of the unfiltered controller",
         violations == 0 && !aborted,
         "violations = " + std::to_string(violations) + " (tol 1e-3), worst excess = " +
             fmt(worst));
}

// ---- 9: sweep over initial estimates ----

void criterion_sweep() {
  SimConfig cfg;
  const std::vector<SweepRecord> recs = uncertainty_sweep(cfg);
  int violations = 0;
  double gd_psi0 = 1e300, forget_psi0 = -1e300;
  for (const SweepRecord& r : recs) {
    violations += r.issf_violations;
    if ((r.that0 - (Vec(2) << 3.0, 3.0).finished()).norm() < 1e-12) {
      if (r.law == EstimatorLaw::Gd) gd_psi0 = r.min_psi0;
      if (r.law == EstimatorLaw::RlsForget) forget_psi0 = r.min_psi0;
    }
  }
  const bool ordered = gd_psi0 < forget_psi0;
  report(9, "sweep stays robustly safe and ranks the laws",
         violations == 0 && ordered,
         "violations = " + std::to_string(violations) +
             ", min psi0 at worst estimate: gd=" + fmt(gd_psi0) +
             " < rls_forget=" + fmt(forget_psi0) +
             (ordered ? "" : " (ordering failed)"));
}

// ---- 10: byte-identical reruns through the CLI ----

void criterion_reproducibility() {
  const fs::path base("acceptance_out");
  fs::remove_all(base);
  bool ok = true;
  std::ostringstream detail;

  const auto rerun = [&](const std::vector<std::string>& args,
                         const std::vector<std::string>& files,
                         const std::string& label) {
    for (const char* side : {"a", "b"}) {
      std::vector<std::string> cmd = args;
      cmd.push_back("--out");
      cmd.push_back((base / (label + "_" + side)).string());
      if (run_cli(cmd) != 0) {
        ok = false;
        detail << label << " exited nonzero; ";
        return;
      }
    }
    for (const std::string& f : files) {
      const std::string a =
          testutil::slurp((base / (label + "_a") / f).string());
      const std::string b =
          testutil::slurp((base / (label + "_b") / f).string());
      if (a.empty() || a != b) {
        ok = false;
        detail << label << "/" << f << " differs; ";
      }
    }
    detail << label << " checked; ";
  };

  rerun({"simulate", "--set", "sim.horizon=2"},
        {"trajectory.csv", "manifest.txt"}, "simulate");
  rerun({"montecarlo", "--set", "sim.horizon=2", "--runs", "3", "--laws", "gd"},
        {"summary_gd.csv", "runs_gd.csv", "manifest.txt"}, "montecarlo");

  report(10, "byte-identical reruns", ok, detail.str());
}

}  // namespace

int main() {
  criteria_batches();
  criterion_integrator();
  criterion_qp();
  criterion_lie();
  criterion_gamma();
  criterion_clf_decrease();
  criterion_sweep();
  criterion_reproducibility();
  if (g_failures == 0)
    std::printf("all criteria passed\n");
  else
    std::printf("%d criteria failed\n", g_failures);
  return g_failures;
}

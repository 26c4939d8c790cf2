#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "modsafe/cbf_safety.hpp"
#include "modsafe/csv_io.hpp"
#include "modsafe/estimation.hpp"
#include "modsafe/qp_core.hpp"
#include "modsafe/sim_engine.hpp"
#include "modsafe/version.hpp"

namespace py = pybind11;
using namespace modsafe;

namespace {

Mat trajectory_matrix(const Trajectory& traj) {
  const auto rows = static_cast<Eigen::Index>(traj.records.size());
  Mat out(rows, 17);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const TrajectoryRecord& r = traj.records[static_cast<std::size_t>(i)];
    out(i, 0) = r.t;
    out.block(i, 1, 1, 4) = r.x.transpose();
    out.block(i, 5, 1, 2) = r.u.transpose();
    out.block(i, 7, 1, 2) = r.u_ref.transpose();
    out.block(i, 9, 1, 2) = r.theta_hat.transpose();
    out(i, 11) = r.ttil_norm;
    out(i, 12) = r.V;
    out(i, 13) = r.psi0;
    out(i, 14) = r.psi1;
    out(i, 15) = static_cast<double>(r.stack_size);
    out(i, 16) = r.sigma_min;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adaptive safety-critical control simulator";
#ifdef MODSAFE_VERSION_INFO
  m.attr("__version__") = MODSAFE_VERSION_INFO;
#else
  m.attr("__version__") = kVersion;
#endif

  py::enum_<EstimatorLaw>(m, "EstimatorLaw")
      .value("gd", EstimatorLaw::Gd)
      .value("rls", EstimatorLaw::Rls)
      .value("rls_forget", EstimatorLaw::RlsForget)
      .value("rls_varforget", EstimatorLaw::RlsVarForget);
  m.def("parse_estimator_law", &parse_estimator_law, py::arg("name"));
  m.def("estimator_law_name", &estimator_law_name, py::arg("law"));

  py::enum_<Sense>(m, "Sense")
      .value("le", Sense::LE)
      .value("ge", Sense::GE);

  py::class_<HalfspaceConstraint>(m, "HalfspaceConstraint")
      .def(py::init([](const Vec& a, double b, Sense sense) {
             return HalfspaceConstraint{a, b, sense};
           }),
           py::arg("a"), py::arg("b"), py::arg("sense"))
      .def_readwrite("a", &HalfspaceConstraint::a)
      .def_readwrite("b", &HalfspaceConstraint::b)
      .def_readwrite("sense", &HalfspaceConstraint::sense);
  m.def("min_norm_halfspace", &min_norm_halfspace, py::arg("constraint"));
  m.def("project_halfspace", &project_halfspace, py::arg("u_ref"),
        py::arg("constraint"));
  py::register_exception<QpInfeasible>(m, "QpInfeasible");
  py::register_exception<NonFiniteState>(m, "NonFiniteState");

  m.def(
      "gamma_recursion",
      [](const std::vector<double>& lambdas, double eps_h, double delta) {
        std::vector<ClassKappaExt> alphas;
        alphas.reserve(lambdas.size());
        for (const double l : lambdas)
          alphas.push_back(ClassKappaExt::linear(l));
        return gamma_recursion(alphas, eps_h, delta);
      },
      py::arg("lambdas"), py::arg("eps_h"), py::arg("delta"),
      "Inflation depths for a chain of linear extended class-kappa maps");

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("system_name", &SimConfig::system_name)
      .def_readwrite("theta_true", &SimConfig::theta_true)
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("horizon", &SimConfig::horizon)
      .def_readwrite("estimator_enabled", &SimConfig::estimator_enabled)
      .def_readwrite("law", &SimConfig::law)
      .def_readwrite("stack_capacity", &SimConfig::stack_capacity)
      .def_readwrite("gamma0", &SimConfig::gamma0)
      .def_readwrite("beta", &SimConfig::beta)
      .def_readwrite("gamma_bar", &SimConfig::gamma_bar)
      .def_readwrite("window_dt", &SimConfig::window_dt)
      .def_readwrite("clf_c3", &SimConfig::clf_c3)
      .def_readwrite("clf_eps_v", &SimConfig::clf_eps_v)
      .def_readwrite("cbf_enabled", &SimConfig::cbf_enabled)
      .def_readwrite("cbf_eps_h", &SimConfig::cbf_eps_h)
      .def_readwrite("alpha1_lambda", &SimConfig::alpha1_lambda)
      .def_readwrite("alpha2_lambda", &SimConfig::alpha2_lambda)
      .def_readwrite("obstacle_center", &SimConfig::obstacle_center)
      .def_readwrite("obstacle_radius", &SimConfig::obstacle_radius)
      .def_readwrite("obstacle_margin", &SimConfig::obstacle_margin)
      .def_readwrite("x0", &SimConfig::x0)
      .def_readwrite("that0", &SimConfig::that0)
      .def_readwrite("x0_lo", &SimConfig::x0_lo)
      .def_readwrite("x0_hi", &SimConfig::x0_hi)
      .def_readwrite("that0_lo", &SimConfig::that0_lo)
      .def_readwrite("that0_hi", &SimConfig::that0_hi)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("runs", &SimConfig::runs)
      .def_readwrite("threads", &SimConfig::threads)
      .def_readwrite("mc_laws", &SimConfig::mc_laws)
      .def_readwrite("sweep_that0", &SimConfig::sweep_that0)
      .def_readwrite("sweep_laws", &SimConfig::sweep_laws)
      .def("validate", &SimConfig::validate)
      .def("steps", &SimConfig::steps);

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("t", &TrajectoryRecord::t)
      .def_readonly("x", &TrajectoryRecord::x)
      .def_readonly("u_ref", &TrajectoryRecord::u_ref)
      .def_readonly("u", &TrajectoryRecord::u)
      .def_readonly("theta_hat", &TrajectoryRecord::theta_hat)
      .def_readonly("ttil_norm", &TrajectoryRecord::ttil_norm)
      .def_readonly("V", &TrajectoryRecord::V)
      .def_readonly("psi0", &TrajectoryRecord::psi0)
      .def_readonly("psi1", &TrajectoryRecord::psi1)
      .def_readonly("stack_size", &TrajectoryRecord::stack_size)
      .def_readonly("sigma_min", &TrajectoryRecord::sigma_min);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("records", &Trajectory::records)
      .def_readonly("dt", &Trajectory::dt)
      .def("as_matrix", &trajectory_matrix,
           "Records as a matrix in trajectory.csv column order")
      .def("__len__",
           [](const Trajectory& t) { return t.records.size(); });

  py::class_<RunStats>(m, "RunStats")
      .def_readonly("run", &RunStats::run)
      .def_readonly("seed", &RunStats::seed)
      .def_readonly("final_x_norm", &RunStats::final_x_norm)
      .def_readonly("min_psi0", &RunStats::min_psi0)
      .def_readonly("delta_hat", &RunStats::delta_hat)
      .def_readonly("max_gamma_norm", &RunStats::max_gamma_norm)
      .def_readonly("issf_violations", &RunStats::issf_violations)
      .def_readonly("worst_issf_margin", &RunStats::worst_issf_margin)
      .def_readonly("aborted", &RunStats::aborted)
      .def_readonly("abort_step", &RunStats::abort_step)
      .def_readonly("abort_reason", &RunStats::abort_reason);

  py::class_<SimResult>(m, "SimResult")
      .def_readonly("traj", &SimResult::traj)
      .def_readonly("stats", &SimResult::stats)
      .def_readonly("x0", &SimResult::x0)
      .def_readonly("that0", &SimResult::that0)
      .def_readonly("law", &SimResult::law);

  py::class_<MonteCarloSummary>(m, "MonteCarloSummary")
      .def_readonly("law", &MonteCarloSummary::law)
      .def_readonly("times", &MonteCarloSummary::times)
      .def_readonly("ttil_mean", &MonteCarloSummary::ttil_mean)
      .def_readonly("ttil_std", &MonteCarloSummary::ttil_std)
      .def_readonly("ttil_min", &MonteCarloSummary::ttil_min)
      .def_readonly("ttil_max", &MonteCarloSummary::ttil_max)
      .def_readonly("runs", &MonteCarloSummary::runs)
      .def_readonly("results", &MonteCarloSummary::results);

  py::class_<SweepRecord>(m, "SweepRecord")
      .def_readonly("law", &SweepRecord::law)
      .def_readonly("that0", &SweepRecord::that0)
      .def_readonly("min_psi0", &SweepRecord::min_psi0)
      .def_readonly("max_ttil", &SweepRecord::max_ttil)
      .def_readonly("final_x_norm", &SweepRecord::final_x_norm)
      .def_readonly("issf_violations", &SweepRecord::issf_violations);

  m.def(
      "simulate",
      [](const SimConfig& cfg, std::optional<Vec> x0,
         std::optional<Vec> that0) {
        py::gil_scoped_release release;
        return simulate(cfg, x0.value_or(cfg.x0), that0.value_or(cfg.that0));
      },
      py::arg("cfg"), py::arg("x0") = py::none(),
      py::arg("that0") = py::none(),
      "Closed-loop run from one initial condition");

  m.def(
      "monte_carlo",
      [](const SimConfig& cfg, EstimatorLaw law, bool keep_trajectories) {
        py::gil_scoped_release release;
        return monte_carlo(cfg, law, keep_trajectories);
      },
      py::arg("cfg"), py::arg("law"), py::arg("keep_trajectories") = false,
      "Batch of randomized runs with aggregate error statistics");

  m.def(
      "uncertainty_sweep",
      [](const SimConfig& cfg) {
        py::gil_scoped_release release;
        return uncertainty_sweep(cfg);
      },
      py::arg("cfg"), "Grid of runs over initial parameter estimates");

  m.def("derive_run_seed", &derive_run_seed, py::arg("seed"), py::arg("run"));
  m.def("trajectory_csv", &trajectory_csv, py::arg("traj"),
        "Trajectory serialized in the CLI's CSV schema");
}

"""Adaptive safety-critical control simulator.

Thin wrapper around the C++ core: a stabilizing adaptive controller, a
robust safety filter, and pluggable online parameter estimators for
control-affine systems with matched parametric uncertainty.
"""

from ._core import (
    EstimatorLaw,
    HalfspaceConstraint,
    MonteCarloSummary,
    NonFiniteState,
    QpInfeasible,
    RunStats,
    Sense,
    SimConfig,
    SimResult,
    SweepRecord,
    Trajectory,
    TrajectoryRecord,
    __version__,
    derive_run_seed,
    estimator_law_name,
    gamma_recursion,
    min_norm_halfspace,
    monte_carlo,
    parse_estimator_law,
    project_halfspace,
    simulate,
    trajectory_csv,
    uncertainty_sweep,
)

__all__ = [
    "EstimatorLaw",
    "HalfspaceConstraint",
    "MonteCarloSummary",
    "NonFiniteState",
    "QpInfeasible",
    "RunStats",
    "Sense",
    "SimConfig",
    "SimResult",
    "SweepRecord",
    "Trajectory",
    "TrajectoryRecord",
    "__version__",
    "derive_run_seed",
    "estimator_law_name",
    "gamma_recursion",
    "min_norm_halfspace",
    "monte_carlo",
    "parse_estimator_law",
    "project_halfspace",
    "simulate",
    "trajectory_csv",
    "uncertainty_sweep",
]

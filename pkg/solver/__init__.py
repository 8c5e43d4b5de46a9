# Jacobi relaxation of discrete Euler-Lagrange equations
from .linalg import SINGULAR_RTOL, solve_batched
from .refinement import initial_guess, perturb, refine
from .relaxation import chunk_bounds, solve, sweep, sweep_states, sweep_with_residual
from .residuals import (
    del_residual,
    del_residuals,
    deloc_residual,
    knot_mask,
    max_residual,
    residual_norms,
)
from .solver_types import (
    Boundary,
    CubicSpline,
    GuessKind,
    InconsistentWaypoints,
    InnerNewtonConfig,
    InnerNoConvergence,
    KnotSet,
    NonFiniteState,
    PiecewiseLinear,
    ResidualNorm,
    ResidualReport,
    SingularJacobian,
    SolvableProblem,
    SolverError,
    StraightLine,
    SweepConfig,
    Trajectory,
    TrajectoryError,
    TrajectoryKind,
    UpdateRule,
)
from .updates import deloc_step_newton, pdel_solve_exact, pdel_step_newton

__all__ = [
    "SINGULAR_RTOL",
    "Boundary",
    "CubicSpline",
    "GuessKind",
    "InconsistentWaypoints",
    "InnerNewtonConfig",
    "InnerNoConvergence",
    "KnotSet",
    "NonFiniteState",
    "PiecewiseLinear",
    "ResidualNorm",
    "ResidualReport",
    "SingularJacobian",
    "SolvableProblem",
    "SolverError",
    "StraightLine",
    "SweepConfig",
    "Trajectory",
    "TrajectoryError",
    "TrajectoryKind",
    "UpdateRule",
    "chunk_bounds",
    "del_residual",
    "del_residuals",
    "deloc_residual",
    "deloc_step_newton",
    "initial_guess",
    "knot_mask",
    "max_residual",
    "pdel_solve_exact",
    "pdel_step_newton",
    "perturb",
    "refine",
    "residual_norms",
    "solve",
    "solve_batched",
    "sweep",
    "sweep_states",
    "sweep_with_residual",
]

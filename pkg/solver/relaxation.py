"""
Jacobi relaxation of the discrete Euler-Lagrange equations.

A sweep moves every interior state of a trajectory using only the previous
iterate, so interior indices are independent work items. They are cut into
contiguous chunks and handed to a thread pool; numpy does the arithmetic of
each chunk in bulk. Every per-index computation is elementwise, which makes
the output independent of how the indices are chunked.
"""

import logging
import time
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import nullcontext
from typing import List, Optional, Tuple

import numpy as np

from lagrangians.discretize import DiscreteLagrangian

from .residuals import knot_mask, residual_norms
from .solver_types import (
    KnotSet,
    NonFiniteState,
    ResidualReport,
    SolvableProblem,
    SweepConfig,
    Trajectory,
    TrajectoryError,
    UpdateRule,
)
from .updates import exact_update, newton_update

logger = logging.getLogger(__name__)


def chunk_bounds(N: int, width: int) -> List[Tuple[int, int]]:
    """Split the interior indices 1..N-1 into at most `width` contiguous [lo, hi) ranges"""
    interior = N - 1
    width = max(1, min(width, interior))
    edges = 1 + (interior * np.arange(width + 1)) // width
    return [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def _sweep_chunk(
    Ld: DiscreteLagrangian,
    states: np.ndarray,
    lo: int,
    hi: int,
    knot_rows: np.ndarray,
    cfg: SweepConfig,
) -> Tuple[np.ndarray, np.ndarray]:
    prev, mid, nxt = states[lo - 1 : hi - 1], states[lo:hi], states[lo + 1 : hi + 1]
    rows = knot_rows[lo - 1 : hi - 1]
    indices = np.arange(lo, hi)
    keep = 1.0 - cfg.damping
    if cfg.rule is UpdateRule.NEWTON:
        delta, residual = newton_update(Ld, prev, mid, nxt, rows, indices)
        new = mid + keep * delta
    else:
        solved, residual = exact_update(Ld, prev, mid, nxt, rows, indices, cfg.inner_newton)
        new = solved if cfg.damping == 0.0 else mid + keep * (solved - mid)
    new[rows, :2] = mid[rows, :2]
    return new, residual_norms(residual, rows, cfg.residual_norm)


def sweep_states(
    Ld: DiscreteLagrangian,
    states: np.ndarray,
    cfg: SweepConfig,
    knot_rows: np.ndarray,
    executor: Optional[Executor] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    One Jacobi sweep over a raw state array

    Returns:
        (new states, per-index residual norms of the input states)
    """
    N = states.shape[0] - 1
    bounds = chunk_bounds(N, cfg.parallel_width)
    if executor is None or len(bounds) == 1:
        results = [_sweep_chunk(Ld, states, lo, hi, knot_rows, cfg) for lo, hi in bounds]
    else:
        futures = [executor.submit(_sweep_chunk, Ld, states, lo, hi, knot_rows, cfg) for lo, hi in bounds]
        results = [future.result() for future in futures]
    out = states.copy()
    out[1:N] = np.concatenate([new for new, _ in results])
    return out, np.concatenate([norms for _, norms in results])


def _check_compatible(traj: Trajectory, Ld: DiscreteLagrangian, knots: KnotSet) -> None:
    if traj.N < 2:
        raise TrajectoryError(f"trajectory needs an interior sample, got N={traj.N}")
    if Ld.state_dim != traj.state_dim:
        raise TrajectoryError(f"{Ld.name} acts on states of dimension {Ld.state_dim}, {traj} has {traj.state_dim}")
    knots.validate_for(traj.N)


def _first_non_finite(states: np.ndarray) -> Optional[int]:
    bad = ~np.all(np.isfinite(states), axis=1)
    return int(np.argmax(bad)) if np.any(bad) else None


def sweep_with_residual(
    traj: Trajectory,
    Ld: DiscreteLagrangian,
    cfg: SweepConfig,
    knots: Optional[KnotSet] = None,
    executor: Optional[Executor] = None,
) -> Tuple[Trajectory, np.ndarray]:
    """Sweep and return the per-index residual norms of the input as well"""
    knots = knots or KnotSet.empty()
    _check_compatible(traj, Ld, knots)
    states, norms = sweep_states(Ld, traj.states, cfg, knot_mask(knots, traj.N), executor)
    index = _first_non_finite(states)
    if index is not None:
        raise NonFiniteState(1, index)
    return traj.with_states(states), norms


def sweep(
    traj: Trajectory,
    Ld: DiscreteLagrangian,
    cfg: SweepConfig,
    knots: Optional[KnotSet] = None,
    executor: Optional[Executor] = None,
) -> Trajectory:
    """
    One Jacobi sweep

    Every interior index not in `knots` moves by the configured rule reading
    only `traj`. At knots the position is copied and only the velocity is
    updated. Endpoints are copied. The increment is scaled by 1 - damping.

    Args:
        traj: Current iterate
        Ld: Discrete Lagrangian acting on the trajectory's states
        cfg: Rule, damping and parallel width
        knots: Interior interpolation constraints

    Returns:
        The next iterate
    """
    return sweep_with_residual(traj, Ld, cfg, knots, executor)[0]


def solve(problem: SolvableProblem, guess: Trajectory, cfg: SweepConfig) -> Tuple[Trajectory, ResidualReport]:
    """
    Iterate sweeps until max_k |residual_k| < tol_factor * h^2 or the iteration cap

    Returns:
        (final iterate, convergence report); report.residuals[i] is the
        stopping quantity of iterate i, the guess being iterate 0
    """
    Ld = problem.discrete_lagrangian()
    knots = problem.knots
    problem.validate_trajectory(guess)
    _check_compatible(guess, Ld, knots)
    tolerance = cfg.tol_factor * guess.h**2
    report = ResidualReport(tolerance=tolerance)
    knot_rows = knot_mask(knots, guess.N)
    logger.info(
        "Solving %s: N=%d h=%g rule=%s damping=%g width=%d tol=%.3e",
        problem.name,
        guess.N,
        guess.h,
        cfg.rule.value,
        cfg.damping,
        cfg.parallel_width,
        tolerance,
    )

    states = guess.states
    iteration = 0
    start = time.perf_counter()
    pool = ThreadPoolExecutor(max_workers=cfg.parallel_width) if cfg.parallel_width > 1 else nullcontext()
    with pool as executor:
        while True:
            new_states, norms = sweep_states(Ld, states, cfg, knot_rows, executor)
            current = float(np.max(norms))
            report.residuals.append(current)
            report.wall_seconds.append(time.perf_counter() - start)
            if current < tolerance:
                report.converged = True
                break
            if iteration >= cfg.max_iterations:
                break
            index = _first_non_finite(new_states)
            if index is not None:
                raise NonFiniteState(iteration + 1, index)
            states = new_states
            iteration += 1
            if iteration % cfg.report_every == 0:
                logger.info("Iteration %d: max residual %.3e (tol %.3e)", iteration, current, tolerance)

    report.iterations = iteration
    if report.converged:
        logger.info("%s converged after %d iterations in %.2fs", problem.name, iteration, report.wall_time)
    else:
        logger.warning(
            "%s stopped at the iteration cap %d with max residual %.3e", problem.name, iteration, report.final_residual
        )
    return guess.with_states(states), report

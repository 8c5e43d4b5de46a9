import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from geometry.geometry_types import NavRelaxError, Vec2
from lagrangians.discretize import DiscreteLagrangian
from lagrangians.lagrangian_types import AlphaNonPositive, DegenerateVelocity

from .linalg import solve_batched
from .residuals import residual_norms, triple_system
from .solver_types import InnerNewtonConfig, InnerNoConvergence, SingularJacobian

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


def newton_increments(
    residual: np.ndarray, matrix: np.ndarray, knot_rows: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Solve M delta = -r for a batch of stencils

    Rows flagged as knots keep their position and solve only the velocity
    block, D44 L_d|k-1 + D22 L_d|k. Knots of position-only states do not move.

    Returns:
        (increments with the shape of residual, singular mask)
    """
    delta = np.zeros_like(residual)
    singular = np.zeros(residual.shape[0], dtype=bool)
    free = ~knot_rows
    if np.any(free):
        delta[free], singular[free] = solve_batched(matrix[free], -residual[free])
    if np.any(knot_rows) and residual.shape[1] > 2:
        step, singular[knot_rows] = solve_batched(matrix[knot_rows][:, 2:, 2:], -residual[knot_rows][:, 2:])
        delta[knot_rows, 2:] = step
    return delta, singular


def newton_update(
    Ld: DiscreteLagrangian,
    prev: np.ndarray,
    mid: np.ndarray,
    nxt: np.ndarray,
    knot_rows: np.ndarray,
    indices: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    One Jacobi-Newton increment for a batch of stencils

    Returns:
        (increments, residuals of the input stencils)
    """
    residual, matrix = triple_system(Ld, prev, mid, nxt, indices=indices)
    delta, singular = newton_increments(residual, matrix, knot_rows)
    if np.any(singular):
        raise SingularJacobian(int(indices[np.argmax(singular)]))
    return delta, residual


def _trial_norms(
    Ld: DiscreteLagrangian, prev: np.ndarray, trial: np.ndarray, nxt: np.ndarray, knot_rows: np.ndarray
) -> np.ndarray:
    """Residual norms at trial points; points where L_d cannot be evaluated get +inf"""
    try:
        residual, _ = triple_system(Ld, prev, trial, nxt, order=1)
        return residual_norms(residual, knot_rows)
    except NavRelaxError:
        norms = np.full(trial.shape[0], np.inf)
        for row in range(trial.shape[0]):
            try:
                residual, _ = triple_system(Ld, prev[row : row + 1], trial[row : row + 1], nxt[row : row + 1], 1)
            except NavRelaxError:
                continue
            norms[row] = residual_norms(residual, knot_rows[row : row + 1])[0]
        return norms


def exact_update(
    Ld: DiscreteLagrangian,
    prev: np.ndarray,
    mid: np.ndarray,
    nxt: np.ndarray,
    knot_rows: np.ndarray,
    indices: np.ndarray,
    inner: InnerNewtonConfig,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Solve the parallelized equations for the middle state of every stencil

    Newton iteration with step halving; each stencil iterates independently
    until its residual drops below inner.tol or its increment reaches the
    rounding floor.

    Returns:
        (solved middle states, residuals of the input stencils)
    """
    current = np.array(mid, dtype=float)
    active = np.ones(current.shape[0], dtype=bool)
    input_residual = None
    for _ in range(inner.max_iter):
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        residual, matrix = triple_system(Ld, prev[rows], current[rows], nxt[rows], indices=indices[rows])
        if input_residual is None:
            input_residual = residual
        norms = residual_norms(residual, knot_rows[rows])
        done = norms <= inner.tol
        active[rows[done]] = False
        rows, residual, matrix, norms = rows[~done], residual[~done], matrix[~done], norms[~done]
        if rows.size == 0:
            break
        delta, singular = newton_increments(residual, matrix, knot_rows[rows])
        if np.any(singular):
            raise SingularJacobian(int(indices[rows[np.argmax(singular)]]))
        floor = 4.0 * _EPS * (1.0 + np.linalg.norm(current[rows], axis=1))
        stalled = np.linalg.norm(delta, axis=1) <= floor
        current[rows[stalled]] += delta[stalled]
        active[rows[stalled]] = False
        rows, delta, norms = rows[~stalled], delta[~stalled], norms[~stalled]
        step = np.ones(rows.size)
        pending = np.ones(rows.size, dtype=bool)
        for _ in range(inner.max_halvings + 1):
            waiting = np.flatnonzero(pending)
            if waiting.size == 0:
                break
            targets = rows[waiting]
            trial = current[targets] + step[waiting, None] * delta[waiting]
            trial_norms = _trial_norms(Ld, prev[targets], trial, nxt[targets], knot_rows[targets])
            accepted = (trial_norms < norms[waiting]) | (trial_norms <= inner.tol)
            current[targets[accepted]] = trial[accepted]
            pending[waiting[accepted]] = False
            step[waiting[~accepted]] *= 0.5
        if np.any(pending):
            index = int(indices[rows[np.argmax(pending)]])
            raise InnerNoConvergence(index, f"no decrease after {inner.max_halvings} step halvings")
    if np.any(active):
        index = int(indices[np.argmax(active)])
        raise InnerNoConvergence(index, f"residual above {inner.tol:g} after {inner.max_iter} iterations")
    if input_residual is None:
        input_residual, _ = triple_system(Ld, prev, mid, nxt, order=1, indices=indices)
    return current, input_residual


def _rows(*points: Vec2) -> np.ndarray:
    return np.atleast_2d(np.concatenate([p.as_array() for p in points]))


def _single(index: Optional[int]) -> np.ndarray:
    return np.array([-1 if index is None else index])


def pdel_step_newton(Ld: DiscreteLagrangian, q_prev: Vec2, q: Vec2, q_next: Vec2) -> Vec2:
    """
    One Newton step on the parallelized DEL equation at a single stencil

    Returns:
        q - M^-1 (D2 L_d(q_prev, q) + D1 L_d(q, q_next)),
        M = D22 L_d(q_prev, q) + D11 L_d(q, q_next)
    """
    residual, matrix = triple_system(Ld, _rows(q_prev), _rows(q), _rows(q_next))
    delta, singular = newton_increments(residual, matrix, np.zeros(1, dtype=bool))
    if singular[0]:
        raise SingularJacobian(None)
    return Vec2.from_array(_rows(q)[0] + delta[0])


def pdel_solve_exact(
    Ld: DiscreteLagrangian,
    q_prev: Vec2,
    q_guess: Vec2,
    q_next: Vec2,
    inner: Optional[InnerNewtonConfig] = None,
) -> Vec2:
    """Solve D2 L_d(q_prev, q) + D1 L_d(q, q_next) = 0 for q, starting from q_guess"""
    inner = inner or InnerNewtonConfig()
    try:
        solved, _ = exact_update(
            Ld, _rows(q_prev), _rows(q_guess), _rows(q_next), np.zeros(1, dtype=bool), _single(None), inner
        )
    except (SingularJacobian, InnerNoConvergence) as exc:
        raise type(exc)(None, str(exc)) from exc
    except (AlphaNonPositive, DegenerateVelocity) as exc:
        raise type(exc)(None, exc.speed) from exc
    return Vec2.from_array(solved[0])


def deloc_step_newton(
    Ld: DiscreteLagrangian,
    s_prev: Sequence[Vec2],
    s: Sequence[Vec2],
    s_next: Sequence[Vec2],
    knot: bool = False,
) -> Tuple[Vec2, Vec2]:
    """
    One Newton step on the parallelized DELoc equations at a single stencil

    With knot=True the position is held and only the velocity equation
    (D4 L_d|k-1 + D2 L_d|k = 0) is stepped.
    """
    state = _rows(*s)
    residual, matrix = triple_system(Ld, _rows(*s_prev), state, _rows(*s_next))
    delta, singular = newton_increments(residual, matrix, np.array([knot]))
    if singular[0]:
        raise SingularJacobian(None)
    new = state[0] + delta[0]
    if knot:
        new[:2] = state[0, :2]
    return Vec2.from_array(new[:2]), Vec2.from_array(new[2:])

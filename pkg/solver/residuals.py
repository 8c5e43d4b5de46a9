"""
Residuals of the discrete Euler-Lagrange equations.

For a state sequence s_0..s_N (s = q, or s = (q, v) for second-order
problems) the residual at an interior index k is the gradient of the two
neighbouring L_d terms with respect to s_k:

    D_right L_d(s_k-1, s_k) + D_left L_d(s_k, s_k+1)

which is D2 + D1 for L_d(q0, q1) and the stacked pair (D3 + D1, D4 + D2)
for L_d(q0, v0, q1, v1).
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from geometry.geometry_types import Vec2
from lagrangians.discretize import DiscreteLagrangian
from lagrangians.lagrangian_types import AlphaNonPositive, DegenerateVelocity, DiscretePartials

from .solver_types import KnotSet, ResidualNorm, Trajectory


def segment_partials(Ld: DiscreteLagrangian, states: np.ndarray, order: int = 2) -> DiscretePartials:
    """Partials of L_d on every segment (s_k, s_k+1) of a state array"""
    return Ld.partials_states(states[:-1], states[1:], order=order)


def stencil_residuals(partials: DiscretePartials) -> np.ndarray:
    """Residuals at the interior indices covered by consecutive segments"""
    return partials.d_right()[:-1] + partials.d_left()[1:]


def stencil_jacobians(partials: DiscretePartials) -> np.ndarray:
    """d(residual)/d(s_k): D_right,right L_d|_k-1 + D_left,left L_d|_k"""
    return partials.dd_right()[:-1] + partials.dd_left()[1:]


def triple_states(prev: np.ndarray, mid: np.ndarray, nxt: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Segment endpoints for a batch of triples: rows [0, B) are (prev, mid), rows [B, 2B) are (mid, next)"""
    return np.concatenate([prev, mid]), np.concatenate([mid, nxt])


def _first_failing_stencil(
    Ld: DiscreteLagrangian, s0: np.ndarray, s1: np.ndarray, batch: int, order: int
) -> Optional[Tuple[int, Union[AlphaNonPositive, DegenerateVelocity]]]:
    for row in range(batch):
        for segment in (row, batch + row):
            try:
                Ld.partials_states(s0[segment : segment + 1], s1[segment : segment + 1], order=order)
            except (AlphaNonPositive, DegenerateVelocity) as exc:
                return row, exc
    return None


def triple_system(
    Ld: DiscreteLagrangian,
    prev: np.ndarray,
    mid: np.ndarray,
    nxt: np.ndarray,
    order: int = 2,
    indices: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Residual and Newton matrix of a batch of triples, each row moving only its middle state

    With `indices` (the trajectory index of every row) an L_d evaluation
    error is re-raised at the first failing trajectory index.
    """
    batch = prev.shape[0]
    s0, s1 = triple_states(prev, mid, nxt)
    try:
        partials = Ld.partials_states(s0, s1, order=order)
    except (AlphaNonPositive, DegenerateVelocity) as exc:
        found = None if indices is None else _first_failing_stencil(Ld, s0, s1, batch, order)
        if found is None:
            raise
        row, located = found
        raise type(located)(int(indices[row]), located.speed) from exc
    residual = partials.d_right()[:batch] + partials.d_left()[batch:]
    if order == 1:
        return residual, None
    matrix = partials.dd_right()[:batch] + partials.dd_left()[batch:]
    return residual, matrix


def del_residual(Ld: DiscreteLagrangian, q_prev: Vec2, q: Vec2, q_next: Vec2) -> Vec2:
    """D2 L_d(q_prev, q) + D1 L_d(q, q_next)"""
    prev, mid, nxt = (np.atleast_2d(p.as_array()) for p in (q_prev, q, q_next))
    residual, _ = triple_system(Ld, prev, mid, nxt, order=1)
    return Vec2.from_array(residual[0])


def _state(s: Sequence[Vec2]) -> np.ndarray:
    q, v = s
    return np.atleast_2d(np.concatenate([q.as_array(), v.as_array()]))


def deloc_residual(
    Ld: DiscreteLagrangian, s_prev: Sequence[Vec2], s: Sequence[Vec2], s_next: Sequence[Vec2]
) -> Tuple[Vec2, Vec2]:
    """(D3 L_d|k-1 + D1 L_d|k, D4 L_d|k-1 + D2 L_d|k) for states given as (q, v) pairs"""
    residual, _ = triple_system(Ld, _state(s_prev), _state(s), _state(s_next), order=1)
    return Vec2.from_array(residual[0, :2]), Vec2.from_array(residual[0, 2:4])


def del_residuals(Ld: DiscreteLagrangian, traj: Trajectory) -> np.ndarray:
    """Residuals at every interior index, shape (N-1, state_dim)"""
    return stencil_residuals(segment_partials(Ld, traj.states, order=1))


def knot_mask(knots: KnotSet, N: int) -> np.ndarray:
    """Boolean mask over interior indices 1..N-1 marking knots"""
    mask = np.zeros(max(N - 1, 0), dtype=bool)
    if len(knots):
        mask[knots.indices - 1] = True
    return mask


def residual_norms(res: np.ndarray, knots_mask: np.ndarray, norm: ResidualNorm = ResidualNorm.EUCLIDEAN) -> np.ndarray:
    """
    Per-index residual norms

    At knots the position rows are constraint forces rather than equations,
    so only the velocity rows count there.
    """
    res = np.where(knots_mask[:, None] & (np.arange(res.shape[1]) < 2)[None, :], 0.0, res)
    if ResidualNorm(norm) is ResidualNorm.INF:
        return np.max(np.abs(res), axis=1)
    return np.sqrt(np.sum(res * res, axis=1))


def max_residual(
    Ld: DiscreteLagrangian,
    traj: Trajectory,
    knots: Optional[KnotSet] = None,
    norm: ResidualNorm = ResidualNorm.EUCLIDEAN,
) -> float:
    """Stopping quantity: the largest per-index residual norm"""
    knots = knots or KnotSet.empty()
    norms = residual_norms(del_residuals(Ld, traj), knot_mask(knots, traj.N), norm)
    return float(np.max(norms)) if norms.size else 0.0

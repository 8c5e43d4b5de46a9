import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import interpolate

from geometry.geometry_types import Vec2

from .solver_types import (
    Boundary,
    CubicSpline,
    GuessKind,
    InconsistentWaypoints,
    KnotSet,
    PiecewiseLinear,
    StraightLine,
    Trajectory,
    TrajectoryError,
    TrajectoryKind,
)

logger = logging.getLogger(__name__)


def _double(traj: Trajectory) -> Trajectory:
    q = traj.positions
    N, h = traj.N, traj.h
    positions = np.empty((2 * N + 1, 2))
    positions[::2] = q
    if traj.kind is TrajectoryKind.Q:
        positions[1::2] = 0.5 * (q[:-1] + q[1:])
        return Trajectory(TrajectoryKind.Q, positions, None, h / 2, traj.t0)
    v = traj.velocities
    q0, q1, v0, v1 = q[:-1], q[1:], v[:-1], v[1:]
    velocities = np.empty_like(positions)
    velocities[::2] = v
    # cubic Hermite interpolant and its derivative at the segment midpoint
    positions[1::2] = 0.5 * (q0 + q1) + h * (v0 - v1) / 8.0
    velocities[1::2] = 1.5 * (q1 - q0) / h - 0.25 * (v0 + v1)
    return Trajectory(TrajectoryKind.TQ, positions, velocities, h / 2, traj.t0)


def refine(traj: Trajectory, factor: int = 2) -> Trajectory:
    """
    Halve the time step, keeping every existing sample

    New midpoint samples are linear interpolants for position-only
    trajectories and cubic Hermite values (position and derivative) for
    trajectories carrying velocities. Knot indices map with KnotSet.refined.

    Args:
        traj: Trajectory with N segments
        factor: Power of two; each doubling maps N to 2N and h to h/2

    Returns:
        Refined trajectory with factor * N segments
    """
    if factor < 2 or factor & (factor - 1):
        raise TrajectoryError(f"refinement factor must be a power of two, got {factor}")
    while factor > 1:
        traj = _double(traj)
        factor //= 2
    logger.debug("Refined to %s", traj)
    return traj


def _nodes(boundary: Boundary, N: int, interior: Sequence[Tuple[int, Vec2]]) -> Tuple[np.ndarray, np.ndarray]:
    indices = [0] + [i for i, _ in interior] + [N]
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise InconsistentWaypoints(f"waypoint indices must be strictly increasing inside 0..{N}, got {indices[1:-1]}")
    points = [boundary.start] + [p for _, p in interior] + [boundary.end]
    return np.array(indices), np.array([p.as_array() for p in points])


def _boundary_velocities(boundary: Boundary, start: Optional[Vec2], end: Optional[Vec2]) -> Tuple[Vec2, Vec2]:
    zero = Vec2(0.0, 0.0)
    v0 = next((v for v in (start, boundary.start_velocity) if v is not None), zero)
    v1 = next((v for v in (end, boundary.end_velocity) if v is not None), zero)
    return v0, v1


def initial_guess(kind: GuessKind, N: int, h: float, boundary: Boundary, t0: float = 0.0) -> Trajectory:
    """
    Build a starting trajectory that meets the boundary data exactly

    StraightLine and PiecewiseLinear sample a polyline; CubicSpline samples
    the clamped cubic spline through its knots at t_k = t0 + k h. When the
    boundary carries velocities the result is a TQ trajectory: polyline
    velocities are finite-difference slopes, spline velocities are the
    spline derivative. Node positions and end velocities are written exactly.

    Raises:
        InconsistentWaypoints: waypoint indices outside 1..N-1 or not increasing
    """
    if N < 1:
        raise InconsistentWaypoints(f"need at least one segment, got N={N}")
    k = np.arange(N + 1)
    if isinstance(kind, CubicSpline):
        nodes, points = _nodes(boundary, N, kind.knots)
        v0, v1 = _boundary_velocities(boundary, kind.start_velocity, kind.end_velocity)
        spline = interpolate.CubicSpline(
            t0 + h * nodes, points, axis=0, bc_type=((1, v0.as_array()), (1, v1.as_array()))
        )
        times = t0 + h * k
        positions = spline(times)
        velocities = spline(times, 1)
    elif isinstance(kind, (StraightLine, PiecewiseLinear)):
        waypoints = kind.waypoints if isinstance(kind, PiecewiseLinear) else ()
        nodes, points = _nodes(boundary, N, waypoints)
        positions = np.column_stack([np.interp(k, nodes, points[:, c]) for c in range(2)])
        velocities = np.gradient(positions, h, axis=0)
    else:
        raise TypeError(f"unknown guess kind {kind!r}")
    positions[nodes] = points
    if boundary.kind is TrajectoryKind.Q:
        return Trajectory(TrajectoryKind.Q, positions, None, h, t0)
    velocities[0] = boundary.start_velocity.as_array()
    velocities[-1] = boundary.end_velocity.as_array()
    return Trajectory(TrajectoryKind.TQ, positions, velocities, h, t0)


def perturb(
    traj: Trajectory, amplitude: float, seed: Optional[int] = None, knots: Optional[KnotSet] = None, modes: int = 8
) -> Trajectory:
    """
    Add a smooth random displacement vanishing at the endpoints and knots

    The displacement is a random combination of sine modes, scaled so no
    sample moves by more than `amplitude` in either coordinate. Velocities,
    when present, receive the matching finite-difference slope change except
    at the ends.
    """
    rng = np.random.default_rng(seed)
    N = traj.N
    s = np.arange(N + 1) / N
    basis = np.sin(np.pi * np.outer(s, np.arange(1, modes + 1)))
    shift = basis @ rng.uniform(-1.0, 1.0, size=(modes, 2))
    peak = np.max(np.abs(shift))
    if peak > 0.0:
        shift *= amplitude / peak
    if knots is not None and len(knots):
        shift[knots.indices] = 0.0
    shift[[0, N]] = 0.0
    states = np.array(traj.states)
    states[:, :2] += shift
    if traj.kind is TrajectoryKind.TQ:
        slope = np.gradient(shift, traj.h, axis=0)
        slope[[0, N]] = 0.0
        states[:, 2:] += slope
    return traj.with_states(states)

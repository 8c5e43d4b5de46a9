from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Protocol, Sequence, Tuple, Union

import numpy as np

from geometry.geometry_types import NavRelaxError, Vec2


class SolverError(NavRelaxError):
    """Base class for relaxation errors"""


def _at(index: Optional[int]) -> str:
    return "" if index is None else f" at index {index}"


def _colon(detail: str) -> str:
    return f": {detail}" if detail else ""


class SingularJacobian(SolverError, ArithmeticError):
    """The local Newton matrix at an interior index is numerically singular"""

    def __init__(self, index: Optional[int], detail: str = ""):
        self.index = index
        super().__init__(f"singular Newton matrix{_at(index)}{_colon(detail)}")


class InnerNoConvergence(SolverError):
    """The inner Newton solve of the parallelized equations did not converge"""

    def __init__(self, index: Optional[int], detail: str = ""):
        self.index = index
        super().__init__(f"inner Newton solve failed{_at(index)}{_colon(detail)}")


class NonFiniteState(SolverError, ArithmeticError):
    """An iterate contains NaN or infinite values"""

    def __init__(self, iteration: int, index: Optional[int] = None):
        self.iteration = iteration
        self.index = index
        where = "" if index is None else f" at index {index}"
        super().__init__(f"non-finite state after iteration {iteration}{where}")


class InconsistentWaypoints(SolverError, ValueError):
    """Waypoint or knot indices out of range or not strictly increasing"""


class TrajectoryError(SolverError, ValueError):
    """Malformed trajectory data"""


class TrajectoryKind(str, Enum):
    Q = "Q"
    TQ = "TQ"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Class representing a discrete curve sampled at t_k = t0 + k h, k = 0..N

    Q trajectories carry positions only; TQ trajectories carry a velocity
    per sample as well. Arrays are copied and made read-only.
    """

    kind: TrajectoryKind
    positions: np.ndarray
    velocities: Optional[np.ndarray]
    h: float
    t0: float = 0.0

    def __post_init__(self):
        kind = TrajectoryKind(self.kind)
        positions = _frozen_points(self.positions, "positions")
        velocities = None
        if kind is TrajectoryKind.TQ:
            if self.velocities is None:
                raise TrajectoryError("TQ trajectory needs velocities")
            velocities = _frozen_points(self.velocities, "velocities")
            if velocities.shape != positions.shape:
                raise TrajectoryError(
                    f"velocities shape {velocities.shape} differs from positions {positions.shape}"
                )
        elif self.velocities is not None:
            raise TrajectoryError("Q trajectory cannot carry velocities")
        if positions.shape[0] < 2:
            raise TrajectoryError("trajectory needs at least two samples")
        h, t0 = float(self.h), float(self.t0)
        if not (np.isfinite(h) and h > 0.0):
            raise TrajectoryError(f"time step must be positive and finite, got {self.h}")
        if not np.isfinite(t0):
            raise TrajectoryError(f"t0 must be finite, got {self.t0}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "velocities", velocities)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "t0", t0)

    @classmethod
    def from_states(cls, kind: TrajectoryKind, states: np.ndarray, h: float, t0: float = 0.0) -> "Trajectory":
        states = np.asarray(states, dtype=float)
        if TrajectoryKind(kind) is TrajectoryKind.TQ:
            return cls(TrajectoryKind.TQ, states[:, :2], states[:, 2:4], h, t0)
        return cls(TrajectoryKind.Q, states, None, h, t0)

    def with_states(self, states: np.ndarray) -> "Trajectory":
        return Trajectory.from_states(self.kind, states, self.h, self.t0)

    @property
    def N(self) -> int:
        return self.positions.shape[0] - 1

    @property
    def state_dim(self) -> int:
        return 2 if self.kind is TrajectoryKind.Q else 4

    @property
    def horizon(self) -> float:
        return self.N * self.h

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.N + 1)

    @property
    def states(self) -> np.ndarray:
        if self.kind is TrajectoryKind.Q:
            return self.positions
        return np.hstack([self.positions, self.velocities])

    def position(self, k: int) -> Vec2:
        return Vec2.from_array(self.positions[k])

    def velocity(self, k: int) -> Vec2:
        if self.velocities is None:
            raise TrajectoryError("Q trajectory has no velocities")
        return Vec2.from_array(self.velocities[k])

    def speeds(self) -> np.ndarray:
        """Norms of the forward differences (q_k+1 - q_k)/h"""
        return np.hypot(*((self.positions[1:] - self.positions[:-1]) / self.h).T)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.states)))

    def __str__(self) -> str:
        return f"Trajectory({self.kind.value}, N={self.N}, h={self.h:g}, t0={self.t0:g})"


def _frozen_points(values: np.ndarray, what: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != 2 or array.shape[1] != 2:
        raise TrajectoryError(f"{what} must have shape (N+1, 2), got {array.shape}")
    if not np.all(np.isfinite(array)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(array), axis=1))[0])
        raise TrajectoryError(f"{what} contain a non-finite value at sample {bad}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class KnotSet:
    """Class representing interior interpolation constraints q_{N_a} = q_a"""

    knots: Tuple[Tuple[int, Vec2], ...] = ()

    def __post_init__(self):
        knots = tuple((int(i), p if isinstance(p, Vec2) else Vec2.from_array(p)) for i, p in self.knots)
        indices = [i for i, _ in knots]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise InconsistentWaypoints(f"knot indices must be strictly increasing, got {indices}")
        object.__setattr__(self, "knots", knots)

    @classmethod
    def empty(cls) -> "KnotSet":
        return cls(())

    def validate_for(self, N: int) -> None:
        for index, _ in self.knots:
            if not 0 < index < N:
                raise InconsistentWaypoints(f"knot index {index} is not interior to 0..{N}")

    @property
    def indices(self) -> np.ndarray:
        return np.array([i for i, _ in self.knots], dtype=int)

    def refined(self, factor: int = 2) -> "KnotSet":
        return KnotSet(tuple((i * factor, p) for i, p in self.knots))

    def __len__(self) -> int:
        return len(self.knots)

    def __iter__(self) -> Iterator[Tuple[int, Vec2]]:
        return iter(self.knots)


class UpdateRule(str, Enum):
    EXACT = "exact"
    NEWTON = "newton"


class ResidualNorm(str, Enum):
    EUCLIDEAN = "euclidean"
    INF = "inf"


@dataclass(frozen=True)
class InnerNewtonConfig:
    """Settings of the inner solve used by the exact parallelized rule"""

    tol: float = 1e-12
    max_iter: int = 50
    max_halvings: int = 30


@dataclass(frozen=True)
class SweepConfig:
    """Class representing the settings of the Jacobi relaxation"""

    rule: UpdateRule = UpdateRule.NEWTON
    damping: float = 0.0
    tol_factor: float = 1e-4
    max_iterations: int = 500000
    inner_newton: InnerNewtonConfig = field(default_factory=InnerNewtonConfig)
    parallel_width: int = 1
    residual_norm: ResidualNorm = ResidualNorm.EUCLIDEAN
    report_every: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "rule", UpdateRule(self.rule))
        object.__setattr__(self, "residual_norm", ResidualNorm(self.residual_norm))
        if not 0.0 <= self.damping < 1.0:
            raise ValueError(f"damping must lie in [0, 1), got {self.damping}")
        if not self.tol_factor > 0.0:
            raise ValueError(f"tol_factor must be positive, got {self.tol_factor}")
        if self.max_iterations < 0:
            raise ValueError(f"max_iterations must be non-negative, got {self.max_iterations}")
        if self.parallel_width < 1:
            raise ValueError(f"parallel_width must be at least 1, got {self.parallel_width}")
        if self.report_every < 1:
            raise ValueError(f"report_every must be at least 1, got {self.report_every}")


@dataclass
class ResidualReport:
    """Convergence record of a relaxation run"""

    residuals: List[float] = field(default_factory=list)
    wall_seconds: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    tolerance: float = 0.0

    @property
    def wall_time(self) -> float:
        return self.wall_seconds[-1] if self.wall_seconds else 0.0

    @property
    def final_residual(self) -> float:
        return self.residuals[-1] if self.residuals else float("nan")

    def __str__(self) -> str:
        status = "converged" if self.converged else "not converged"
        return (
            f"{status} after {self.iterations} iterations "
            f"(max residual {self.final_residual:.3e}, tol {self.tolerance:.3e}, {self.wall_time:.2f}s)"
        )


class SolvableProblem(Protocol):
    """What the relaxation needs from a problem definition"""

    name: str
    knots: KnotSet

    @property
    def h(self) -> float: ...

    def discrete_lagrangian(self): ...

    def validate_trajectory(self, traj: Trajectory) -> None: ...


def _vec(p) -> Vec2:
    return p if isinstance(p, Vec2) else Vec2.from_array(p)


def _optional_vec(p) -> Optional[Vec2]:
    return None if p is None else _vec(p)


def _indexed_points(points: Sequence) -> Tuple[Tuple[int, Vec2], ...]:
    return tuple((int(i), _vec(p)) for i, p in points)


@dataclass(frozen=True)
class Boundary:
    """Prescribed endpoint data; velocities are given for second-order problems only"""

    start: Vec2
    end: Vec2
    start_velocity: Optional[Vec2] = None
    end_velocity: Optional[Vec2] = None

    def __post_init__(self):
        object.__setattr__(self, "start", _vec(self.start))
        object.__setattr__(self, "end", _vec(self.end))
        object.__setattr__(self, "start_velocity", _optional_vec(self.start_velocity))
        object.__setattr__(self, "end_velocity", _optional_vec(self.end_velocity))
        if (self.start_velocity is None) != (self.end_velocity is None):
            raise TrajectoryError("give both end velocities or neither")

    @property
    def kind(self) -> TrajectoryKind:
        return TrajectoryKind.Q if self.start_velocity is None else TrajectoryKind.TQ


@dataclass(frozen=True)
class StraightLine:
    """Equally spaced samples on the segment joining the endpoints"""


@dataclass(frozen=True)
class PiecewiseLinear:
    """Polyline through (index, position) waypoints, sampled at every index"""

    waypoints: Tuple[Tuple[int, Vec2], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "waypoints", _indexed_points(self.waypoints))


@dataclass(frozen=True)
class CubicSpline:
    """
    C2 cubic through (index, position) knots with clamped end derivatives

    End velocities default to the boundary velocities, or zero for
    position-only boundaries.
    """

    knots: Tuple[Tuple[int, Vec2], ...] = ()
    start_velocity: Optional[Vec2] = None
    end_velocity: Optional[Vec2] = None

    def __post_init__(self):
        object.__setattr__(self, "knots", _indexed_points(self.knots))
        object.__setattr__(self, "start_velocity", _optional_vec(self.start_velocity))
        object.__setattr__(self, "end_velocity", _optional_vec(self.end_velocity))


GuessKind = Union[StraightLine, PiecewiseLinear, CubicSpline]

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np

from geometry.geometry_types import NavRelaxError, Vec2, WindField
from geometry.wind_fields import calm_field, fuel_wind, zermelo_wind
from lagrangians.continuous import (
    FreeParticleLagrangian,
    fuel_lagrangian,
    secondorder_tv_lagrangian,
    zermelo_lagrangian,
)
from lagrangians.discretize import DiscreteLagrangian, discretize_lobatto2, discretize_trapezoidal
from lagrangians.lagrangian_types import RandersData
from solver.refinement import initial_guess
from solver.solver_types import (
    Boundary,
    CubicSpline,
    GuessKind,
    InconsistentWaypoints,
    KnotSet,
    PiecewiseLinear,
    StraightLine,
    Trajectory,
    TrajectoryKind,
)
from windexpr.expr_eval import wind_from_expressions

logger = logging.getLogger(__name__)

BUILTIN_WINDS = {"zermelo": zermelo_wind, "fuel": fuel_wind, "calm": calm_field}


class ProblemError(NavRelaxError, ValueError):
    """Invalid problem definition or override"""


class ProblemKind(str, Enum):
    FIRST_ORDER = "first_order"
    SECOND_ORDER = "second_order"


class LagrangianId(str, Enum):
    ZERMELO = "zermelo"
    FUEL = "fuel"
    SECOND_ORDER_TV = "second_order_tv"
    FREE_PARTICLE = "free_particle"

    @property
    def kind(self) -> ProblemKind:
        return ProblemKind.SECOND_ORDER if self is LagrangianId.SECOND_ORDER_TV else ProblemKind.FIRST_ORDER


@dataclass(frozen=True)
class WindSpec:
    """A built-in wind by name, or a pair of component expressions in x and y"""

    builtin: Optional[str] = "calm"
    w1: Optional[str] = None
    w2: Optional[str] = None

    def __post_init__(self):
        if (self.w1 is None) != (self.w2 is None):
            raise ProblemError("give both wind expressions w1 and w2")
        if self.w1 is None and self.builtin not in BUILTIN_WINDS:
            raise ProblemError(f"unknown wind {self.builtin!r}; available: {', '.join(sorted(BUILTIN_WINDS))}")

    @property
    def is_expression(self) -> bool:
        return self.w1 is not None

    def build(self) -> WindField:
        if self.is_expression:
            return wind_from_expressions(self.w1, self.w2)
        return BUILTIN_WINDS[self.builtin]()

    def describe(self) -> str:
        return f"({self.w1}, {self.w2})" if self.is_expression else self.builtin


@dataclass(frozen=True)
class ProblemSpec:
    """
    Class representing a boundary-value navigation problem

    Samples live at t_k = t0 + k h with h = T / N. Second-order problems
    carry end velocities and may carry knots; knot indices always refer to
    the current N.
    """

    name: str
    lagrangian: LagrangianId
    wind: WindSpec
    T: float
    N: int
    boundary: Boundary
    knots: KnotSet = field(default_factory=KnotSet.empty)
    c: float = 0.0
    t0: float = 0.0
    guess: Optional[GuessKind] = None

    def __post_init__(self):
        object.__setattr__(self, "lagrangian", LagrangianId(self.lagrangian))
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise ProblemError(f"horizon T must be positive, got {self.T}")
        if int(self.N) != self.N or self.N < 2:
            raise ProblemError(f"N must be an integer >= 2, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        second_order = self.kind is ProblemKind.SECOND_ORDER
        if second_order and self.boundary.kind is not TrajectoryKind.TQ:
            raise ProblemError(f"{self.name}: second-order problems need end velocities")
        if not second_order and self.boundary.kind is not TrajectoryKind.Q:
            raise ProblemError(f"{self.name}: first-order problems take positions only")
        if len(self.knots) and not second_order:
            raise ProblemError(f"{self.name}: knots are supported for second-order problems only")
        try:
            self.knots.validate_for(self.N)
        except InconsistentWaypoints as exc:
            raise ProblemError(f"{self.name}: {exc}") from exc
        if self.lagrangian is LagrangianId.SECOND_ORDER_TV and not self.c > 0.0:
            raise ProblemError(f"{self.name}: weight c must be positive, got {self.c}")

    @property
    def kind(self) -> ProblemKind:
        return self.lagrangian.kind

    @property
    def h(self) -> float:
        return self.T / self.N

    @property
    def trajectory_kind(self) -> TrajectoryKind:
        return self.boundary.kind

    @cached_property
    def wind_field(self) -> WindField:
        return self.wind.build()

    def continuous_lagrangian(self):
        if self.lagrangian is LagrangianId.ZERMELO:
            return zermelo_lagrangian(RandersData(self.wind_field))
        if self.lagrangian is LagrangianId.FUEL:
            return fuel_lagrangian(self.wind_field)
        if self.lagrangian is LagrangianId.SECOND_ORDER_TV:
            return secondorder_tv_lagrangian(self.wind_field, self.c)
        return FreeParticleLagrangian()

    def discrete_lagrangian(self) -> DiscreteLagrangian:
        if self.kind is ProblemKind.SECOND_ORDER:
            return discretize_lobatto2(self.continuous_lagrangian(), self.h)
        return discretize_trapezoidal(self.continuous_lagrangian(), self.h)

    def knot_times(self) -> List[Tuple[float, Vec2]]:
        return [(self.t0 + i * self.h, p) for i, p in self.knots]

    def boundary_violations(self, traj: Trajectory) -> List[str]:
        """Human-readable mismatches between a trajectory and this problem's data"""
        problems = []
        if traj.kind is not self.trajectory_kind:
            problems.append(f"trajectory kind {traj.kind.value}, expected {self.trajectory_kind.value}")
            return problems
        if traj.N != self.N or not math.isclose(traj.h, self.h, rel_tol=1e-12):
            problems.append(f"grid N={traj.N} h={traj.h:g}, expected N={self.N} h={self.h:g}")
        b = self.boundary
        checks = [("start", traj.positions[0], b.start), ("end", traj.positions[-1], b.end)]
        if b.start_velocity is not None:
            checks += [
                ("start velocity", traj.velocities[0], b.start_velocity),
                ("end velocity", traj.velocities[-1], b.end_velocity),
            ]
        if traj.N == self.N:
            checks += [(f"knot {i}", traj.positions[i], p) for i, p in self.knots]
        for label, actual, expected in checks:
            if not np.array_equal(actual, expected.as_array()):
                problems.append(f"{label} is {Vec2.from_array(actual)}, expected {expected}")
        return problems

    def validate_trajectory(self, traj: Trajectory) -> None:
        """Raise ProblemError unless traj meets the boundary data and knots of this problem"""
        problems = self.boundary_violations(traj)
        if problems:
            raise ProblemError(f"{self.name}: " + "; ".join(problems))
        if self.lagrangian is LagrangianId.ZERMELO:
            RandersData(self.wind_field).alpha(traj.positions[:, 0], traj.positions[:, 1])

    def with_overrides(self, N: Optional[int] = None, T: Optional[float] = None, **changes) -> "ProblemSpec":
        """
        Copy with a new grid; knots keep their times and must land on the new grid

        Polyline waypoints are indices, so they scale with N. Spline knots
        mark times, so they move with the problem knots.

        Raises:
            ProblemError: a knot time or guess waypoint is not on the new grid
        """
        N = self.N if N is None else N
        T = self.T if T is None else T
        if not (T > 0.0 and N >= 2):
            raise ProblemError(f"invalid grid N={N} T={T}")
        h = T / N
        knots = []
        for time, point in self.knot_times():
            index = (time - self.t0) / h
            if abs(index - round(index)) > 1e-9 * max(1.0, abs(index)):
                raise ProblemError(f"knot time {time:g} is not on the grid with N={N}, T={T:g}")
            knots.append((int(round(index)), point))
        changes.setdefault("guess", _rescaled_guess(self.guess, self.N, N, self.h / h))
        spec = replace(self, N=N, T=T, knots=KnotSet(tuple(knots)), **changes)
        logger.debug("%s overridden to N=%d T=%g", spec.name, spec.N, spec.T)
        return spec

    def refined(self, factor: int = 2) -> "ProblemSpec":
        """Same horizon with factor * N samples; knot indices scale by factor"""
        return replace(
            self,
            N=self.N * factor,
            knots=self.knots.refined(factor),
            guess=_rescaled_guess(self.guess, self.N, self.N * factor, factor),
        )

    def default_guess(self) -> Trajectory:
        """Configured guess, else a straight line (first order) or a clamped spline through the knots"""
        kind = self.guess
        if kind is None:
            kind = CubicSpline(self.knots.knots) if self.kind is ProblemKind.SECOND_ORDER else StraightLine()
        return initial_guess(kind, self.N, self.h, self.boundary, self.t0)

    def __str__(self) -> str:
        return (
            f"{self.name}: {self.lagrangian.value} in wind {self.wind.describe()}, "
            f"T={self.T:g} N={self.N} h={self.h:g}, {len(self.knots)} knots"
        )


def _rescaled_guess(
    guess: Optional[GuessKind], old_N: int, new_N: int, step_ratio: float
) -> Optional[GuessKind]:
    """Move guess indices onto a new grid; step_ratio is old h / new h"""
    if guess is None or isinstance(guess, StraightLine):
        return guess
    polyline = isinstance(guess, PiecewiseLinear)
    scale = new_N / old_N if polyline else step_ratio
    if scale == 1.0:
        return guess
    scaled = []
    for index, point in guess.waypoints if polyline else guess.knots:
        moved = index * scale
        if abs(moved - round(moved)) > 1e-9 * max(1.0, abs(moved)):
            raise ProblemError(f"guess waypoint index {index} does not map onto N={new_N}")
        scaled.append((int(round(moved)), point))
    if polyline:
        return replace(guess, waypoints=tuple(scaled))
    return replace(guess, knots=tuple(scaled))

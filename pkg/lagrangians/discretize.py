import logging
from typing import Any, List, Sequence, Tuple, Union

import numpy as np

from geometry.geometry_types import Vec2
from geometry.jets import Jet, value_of

from .continuous import FirstOrderLagrangian, SecondOrderLagrangian
from .lagrangian_types import DiscretePartials

logger = logging.getLogger(__name__)

PointLike = Union[Vec2, Sequence[float], np.ndarray]


def _as_points(p: PointLike) -> np.ndarray:
    if isinstance(p, Vec2):
        return p.as_array()
    return np.asarray(p, dtype=float)


class DiscreteLagrangian:
    """
    Base class for L_d over pairs of states

    A state is q (state_dim 2) or (q, v) (state_dim 4). Subclasses implement
    _value on component lists; all partials follow by propagating Jets
    through the continuous Lagrangian, i.e. by the chain rule.
    """

    state_dim = 2

    def __init__(self, lagrangian: Any, h: float):
        if not h > 0.0:
            raise ValueError(f"time step h must be positive, got {h}")
        self.lagrangian = lagrangian
        self.h = float(h)

    @property
    def name(self) -> str:
        return f"{type(self).__name__}({self.lagrangian.name}, h={self.h:g})"

    def _value(self, s0: List[Any], s1: List[Any]) -> Any:
        raise NotImplementedError

    def evaluate_states(self, s0: np.ndarray, s1: np.ndarray) -> np.ndarray:
        """Plain values over a batch; s0 and s1 have shape (..., state_dim)"""
        n = self.state_dim
        value = self._value([s0[..., i] for i in range(n)], [s1[..., i] for i in range(n)])
        return np.broadcast_to(value_of(value), s0.shape[:-1])

    def partials_states(self, s0: np.ndarray, s1: np.ndarray, order: int = 2) -> DiscretePartials:
        """Value, gradient and Hessian over a batch of state pairs"""
        n = self.state_dim
        seeds = Jet.variables([s0[..., i] for i in range(n)] + [s1[..., i] for i in range(n)], order)
        value = self._value(seeds[:n], seeds[n:])
        if not isinstance(value, Jet):
            shape = np.shape(value)
            value = Jet(value, np.zeros(shape + (2 * n,)), np.zeros(shape + (2 * n, 2 * n)))
        return DiscretePartials(value.value, value.grad, value.hess, n)

    def _pack(self, args: Sequence[PointLike]) -> Tuple[np.ndarray, np.ndarray]:
        if len(args) != self.state_dim:
            raise TypeError(f"{type(self).__name__} takes {self.state_dim} points, got {len(args)}")
        points = [_as_points(a) for a in args]
        half = len(points) // 2
        return np.concatenate(points[:half], axis=-1), np.concatenate(points[half:], axis=-1)

    def eval(self, *args: PointLike) -> Any:
        s0, s1 = self._pack(args)
        value = self.evaluate_states(s0, s1)
        return float(value) if value.ndim == 0 else value

    def partials(self, *args: PointLike) -> DiscretePartials:
        s0, s1 = self._pack(args)
        return self.partials_states(s0, s1)

    def partial(self, i: int, *args: PointLike) -> np.ndarray:
        """D_i L_d at the given arguments (1-based argument index)"""
        return self.partials(*args).d(i)

    def second_partial(self, i: int, j: int, *args: PointLike) -> np.ndarray:
        """D_ij L_d = D_j D_i L_d at the given arguments"""
        return self.partials(*args).dd(i, j)


class TrapezoidalLagrangian(DiscreteLagrangian):
    """L_d(q0, q1) = h/2 [L(q0, (q1-q0)/h) + L(q1, (q1-q0)/h)]"""

    state_dim = 2

    def __init__(self, lagrangian: FirstOrderLagrangian, h: float):
        if getattr(lagrangian, "order", 1) != 1:
            raise TypeError("trapezoidal discretization needs a first-order Lagrangian")
        super().__init__(lagrangian, h)

    def _value(self, s0: List[Any], s1: List[Any]) -> Any:
        h = self.h
        v = ((s1[0] - s0[0]) / h, (s1[1] - s0[1]) / h)
        L = self.lagrangian
        return (0.5 * h) * (L((s0[0], s0[1]), v) + L((s1[0], s1[1]), v))


class Lobatto2Lagrangian(DiscreteLagrangian):
    """
    Two-stage Lobatto discretization of a second-order Lagrangian

    L_d(q0, v0, q1, v1) = h/2 [L(q0, v0, A+) + L(q1, v1, A-)], with the end
    accelerations of the cubic Hermite interpolant of (q0, v0, q1, v1):
        A+ =  (2/h^2) (3 (q1 - q0) - h (v1 + 2 v0))
        A- = -(2/h^2) (3 (q1 - q0) - h (2 v1 + v0))
    """

    state_dim = 4

    def __init__(self, lagrangian: SecondOrderLagrangian, h: float):
        if getattr(lagrangian, "order", 2) != 2:
            raise TypeError("Lobatto discretization needs a second-order Lagrangian")
        super().__init__(lagrangian, h)

    def stage_accelerations(self, s0: List[Any], s1: List[Any]) -> Tuple[Tuple[Any, Any], Tuple[Any, Any]]:
        h = self.h
        k = 2.0 / (h * h)
        start, end = [], []
        for c in range(2):
            dq = 3.0 * (s1[c] - s0[c])
            start.append(k * (dq - h * (s1[2 + c] + 2.0 * s0[2 + c])))
            end.append(-k * (dq - h * (2.0 * s1[2 + c] + s0[2 + c])))
        return (start[0], start[1]), (end[0], end[1])

    def _value(self, s0: List[Any], s1: List[Any]) -> Any:
        a_start, a_end = self.stage_accelerations(s0, s1)
        L = self.lagrangian
        first = L((s0[0], s0[1]), (s0[2], s0[3]), a_start)
        second = L((s1[0], s1[1]), (s1[2], s1[3]), a_end)
        return (0.5 * self.h) * (first + second)


def discretize_trapezoidal(L: FirstOrderLagrangian, h: float) -> TrapezoidalLagrangian:
    return TrapezoidalLagrangian(L, h)


def discretize_lobatto2(L: SecondOrderLagrangian, h: float) -> Lobatto2Lagrangian:
    return Lobatto2Lagrangian(L, h)

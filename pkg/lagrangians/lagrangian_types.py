from dataclasses import dataclass
from typing import Any, Optional, Tuple

import numpy as np

from geometry.geometry_types import NavRelaxError, Vec2, WindField, WindSpeedError
from geometry.jets import value_of

# smallest discrete speed at which F^2 is treated as twice differentiable
EPS_VELOCITY = 1e-8


class AlphaNonPositive(WindSpeedError):
    """alpha = 1 - |W|^2 is not positive, so the Randers metric is undefined"""

    def __init__(self, index: Optional[int], speed: float):
        self.index = index
        self.speed = speed
        where = "" if index is None else f" at sample {index}"
        super().__init__(f"wind speed |W| = {speed:.6g} >= 1{where}")


class DegenerateVelocity(NavRelaxError, ArithmeticError):
    """Discrete velocity too small for F^2 to be differentiated"""

    def __init__(self, index: Optional[int], speed: float):
        self.index = index
        self.speed = speed
        where = "" if index is None else f" at sample {index}"
        super().__init__(f"discrete speed {speed:.3g} below {EPS_VELOCITY:g}{where}")


def first_index(mask: np.ndarray) -> Optional[int]:
    """Flat index of the first True entry of a batch mask, or None for scalars"""
    mask = np.asarray(mask)
    if mask.ndim == 0:
        return None
    return int(np.flatnonzero(mask)[0])


@dataclass(frozen=True)
class RandersData:
    """Class representing the Randers metric induced by a wind field on Euclidean R^2"""

    wind: WindField

    def alpha(self, x: Any, y: Any) -> Any:
        """1 - |W|^2, raising AlphaNonPositive where it is not positive"""
        w1, w2 = self.wind.lift(x, y)
        alpha = 1.0 - (w1 * w1 + w2 * w2)
        bad = value_of(alpha) <= 0.0
        if np.any(bad):
            index = first_index(bad)
            speeds = np.sqrt(1.0 - np.atleast_1d(value_of(alpha)))
            raise AlphaNonPositive(index, float(speeds[index or 0]))
        return alpha

    def alpha_at(self, q: Vec2) -> float:
        return float(self.alpha(q.x, q.y))


@dataclass(frozen=True)
class DiscretePartials:
    """
    Value, gradient and Hessian of a discrete Lagrangian over a batch of segments

    Arguments are numbered as in L_d(q0, q1) or L_d(q0, v0, q1, v1); every
    argument is a point of R^2, so argument i occupies gradient entries
    2(i-1) and 2(i-1)+1.
    """

    value: np.ndarray
    grad: np.ndarray
    hess: Optional[np.ndarray]
    state_dim: int

    def d(self, i: int) -> np.ndarray:
        return self.grad[..., 2 * (i - 1) : 2 * i]

    def dd(self, i: int, j: int) -> np.ndarray:
        return self.hess[..., 2 * (i - 1) : 2 * i, 2 * (j - 1) : 2 * j]

    def d_left(self) -> np.ndarray:
        """Gradient with respect to the first state (q0 or (q0, v0))"""
        return self.grad[..., : self.state_dim]

    def d_right(self) -> np.ndarray:
        """Gradient with respect to the second state (q1 or (q1, v1))"""
        return self.grad[..., self.state_dim :]

    def dd_left(self) -> np.ndarray:
        n = self.state_dim
        return self.hess[..., :n, :n]

    def dd_right(self) -> np.ndarray:
        n = self.state_dim
        return self.hess[..., n:, n:]


Pair = Tuple[Any, Any]

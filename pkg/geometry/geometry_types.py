import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Sequence, Tuple

import numpy as np

from .jets import Jet, value_of


class NavRelaxError(Exception):
    """Base class for every error raised by the navrelax packages"""


class NonFiniteValueError(NavRelaxError, ValueError):
    """A vector component is NaN or infinite"""


class WindSpeedError(NavRelaxError, ArithmeticError):
    """The wind reaches or exceeds unit speed where |W| < 1 is required"""


@dataclass(frozen=True)
class Vec2:
    """Class representing a point or velocity in the Euclidean plane"""

    x: float
    y: float

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise NonFiniteValueError(f"Vec2 components must be finite, got ({x}, {y})")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "Vec2":
        return cls(values[0], values[1])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, scale: float) -> "Vec2":
        return Vec2(self.x * scale, self.y * scale)

    __rmul__ = __mul__

    def __iter__(self) -> Iterator[float]:
        yield self.x
        yield self.y

    def __str__(self) -> str:
        return f"({self.x:g}, {self.y:g})"


# (x, y) -> (W1, W2), generic over floats, arrays and Jets
ComponentFn = Callable[[Any, Any], Tuple[Any, Any]]
# (x, y) -> ((dW1/dx, dW1/dy), (dW2/dx, dW2/dy))
JacobianFn = Callable[[Any, Any], Tuple[Tuple[Any, Any], Tuple[Any, Any]]]


@dataclass(frozen=True)
class WindField:
    """Class representing a smooth wind (or current) vector field on the plane

    Both callables must accept floats, numpy arrays or Jets, so the same
    definition serves plain evaluation and forward differentiation.
    """

    name: str
    components: ComponentFn = field(repr=False)
    jacobian_components: JacobianFn = field(repr=False)

    def lift(self, x: Any, y: Any) -> Tuple[Any, Any]:
        return self.components(x, y)

    def lift_jacobian(self, x: Any, y: Any) -> Tuple[Tuple[Any, Any], Tuple[Any, Any]]:
        return self.jacobian_components(x, y)

    def eval(self, p: Vec2) -> Vec2:
        w1, w2 = self.components(p.x, p.y)
        return Vec2(w1, w2)

    def jacobian(self, p: Vec2) -> np.ndarray:
        """Return the 2x2 matrix J[i, j] = dW_i/dx_j at p"""
        (a, b), (c, d) = self.jacobian_components(p.x, p.y)
        return np.array([[a, b], [c, d]], dtype=float)

    def second_partials(self, p: Vec2) -> np.ndarray:
        """Return H[i, j, k] = d^2 W_i / dx_j dx_k at p, by forward differentiation"""
        x, y = Jet.variables([p.x, p.y], order=2)
        w1, w2 = self.components(x, y)
        return np.stack([_hessian_of(w1), _hessian_of(w2)])

    def speed(self, x: Any, y: Any) -> np.ndarray:
        w1, w2 = self.components(x, y)
        return np.hypot(value_of(w1), value_of(w2))

    @staticmethod
    def combine(terms: Sequence[Tuple[float, "WindField"]], name: str) -> "WindField":
        """Build the linear combination sum(coef * field) of existing fields"""
        terms = tuple(terms)

        def components(x, y):
            w1, w2 = 0.0, 0.0
            for coef, term in terms:
                t1, t2 = term.components(x, y)
                w1 = w1 + coef * t1
                w2 = w2 + coef * t2
            return w1, w2

        def jacobian_components(x, y):
            j = [[0.0, 0.0], [0.0, 0.0]]
            for coef, term in terms:
                tj = term.jacobian_components(x, y)
                for i in range(2):
                    for k in range(2):
                        j[i][k] = j[i][k] + coef * tj[i][k]
            return (j[0][0], j[0][1]), (j[1][0], j[1][1])

        return WindField(name, components, jacobian_components)

    def __str__(self) -> str:
        return f"WindField({self.name})"


def _hessian_of(w: Any) -> np.ndarray:
    # constant components carry no Jet
    if isinstance(w, Jet):
        return np.asarray(w.hess, dtype=float)
    return np.zeros((2, 2))

"""
Forward-mode differentiation over batches.

A Jet carries a value together with its gradient and (optionally) its
Hessian with respect to n seeded variables. Values have an arbitrary batch
shape B; gradients have shape B + (n,) and Hessians B + (n, n). Every
operation is elementwise over the batch, so one evaluation differentiates a
function at all sample points of a trajectory at once.
"""

from typing import Any, List, Optional, Sequence

import numpy as np


class Jet:
    """Class representing a truncated Taylor expansion (order 1 or 2)"""

    __slots__ = ("value", "grad", "hess")
    # keep ndarray op Jet from broadcasting into object arrays
    __array_ufunc__ = None

    def __init__(self, value: Any, grad: np.ndarray, hess: Optional[np.ndarray] = None):
        self.value = np.asarray(value, dtype=float)
        self.grad = grad
        self.hess = hess

    @classmethod
    def variables(cls, values: Sequence[Any], order: int = 2) -> List["Jet"]:
        """Seed one Jet per input, broadcasting all inputs to a common batch shape"""
        if order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {order}")
        arrays = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in values])
        n = len(arrays)
        batch = arrays[0].shape
        eye = np.eye(n)
        seeded = []
        for i, a in enumerate(arrays):
            grad = np.broadcast_to(eye[i], batch + (n,)).copy()
            hess = np.zeros(batch + (n, n)) if order == 2 else None
            seeded.append(cls(a.copy(), grad, hess))
        return seeded

    @property
    def nvars(self) -> int:
        return self.grad.shape[-1]

    @property
    def order(self) -> int:
        return 1 if self.hess is None else 2

    # arithmetic

    def __neg__(self) -> "Jet":
        return Jet(-self.value, -self.grad, None if self.hess is None else -self.hess)

    def __pos__(self) -> "Jet":
        return self

    def __add__(self, other: Any) -> "Jet":
        if isinstance(other, Jet):
            return Jet(
                self.value + other.value,
                self.grad + other.grad,
                _combine(self.hess, other.hess, lambda a, b: a + b),
            )
        return Jet(self.value + other, self.grad, self.hess)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "Jet":
        if isinstance(other, Jet):
            return Jet(
                self.value - other.value,
                self.grad - other.grad,
                _combine(self.hess, other.hess, lambda a, b: a - b),
            )
        return Jet(self.value - other, self.grad, self.hess)

    def __rsub__(self, other: Any) -> "Jet":
        return (-self) + other

    def __mul__(self, other: Any) -> "Jet":
        if isinstance(other, Jet):
            a, b = self, other
            grad = a.grad * b.value[..., None] + b.grad * a.value[..., None]
            hess = None
            if a.hess is not None and b.hess is not None:
                cross = _outer(a.grad, b.grad)
                hess = (
                    a.hess * b.value[..., None, None]
                    + b.hess * a.value[..., None, None]
                    + cross
                    + np.swapaxes(cross, -1, -2)
                )
            return Jet(a.value * b.value, grad, hess)
        c = np.asarray(other, dtype=float)
        return Jet(
            self.value * c,
            self.grad * c[..., None],
            None if self.hess is None else self.hess * c[..., None, None],
        )

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "Jet":
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other: Any) -> "Jet":
        return self.reciprocal() * other

    def __pow__(self, power: Any) -> "Jet":
        if isinstance(power, Jet):
            return exp(power * log(self))
        p = float(power)
        if p == 0.0:
            return Jet(np.ones_like(self.value), np.zeros_like(self.grad), _zeros_like(self.hess))
        if p == 1.0:
            return self
        if p == 2.0:
            return self * self
        v = self.value
        return _chain(self, v**p, p * v ** (p - 1.0), p * (p - 1.0) * v ** (p - 2.0))

    def __rpow__(self, base: Any) -> "Jet":
        return exp(self * np.log(np.asarray(base, dtype=float)))

    def reciprocal(self) -> "Jet":
        r = 1.0 / self.value
        return _chain(self, r, -r * r, 2.0 * r * r * r)

    def __repr__(self) -> str:
        return f"Jet(value={self.value!r}, order={self.order}, nvars={self.nvars})"


def _outer(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    return u[..., :, None] * w[..., None, :]


def _zeros_like(h: Optional[np.ndarray]) -> Optional[np.ndarray]:
    return None if h is None else np.zeros_like(h)


def _combine(h1, h2, op):
    if h1 is None or h2 is None:
        return None
    return op(h1, h2)


def _chain(a: Jet, f0: Any, f1: Any, f2: Any) -> Jet:
    """Compose a univariate function with value f0 and derivatives f1, f2 at a.value"""
    f1 = np.asarray(f1, dtype=float)
    grad = f1[..., None] * a.grad
    hess = None
    if a.hess is not None:
        f2 = np.asarray(f2, dtype=float)
        hess = f1[..., None, None] * a.hess + f2[..., None, None] * _outer(a.grad, a.grad)
    return Jet(f0, grad, hess)


def value_of(x: Any) -> np.ndarray:
    """Strip derivative information, returning the plain value"""
    if isinstance(x, Jet):
        return x.value
    return np.asarray(x, dtype=float)


def sin(x: Any) -> Any:
    if isinstance(x, Jet):
        s, c = np.sin(x.value), np.cos(x.value)
        return _chain(x, s, c, -s)
    return np.sin(x)


def cos(x: Any) -> Any:
    if isinstance(x, Jet):
        s, c = np.sin(x.value), np.cos(x.value)
        return _chain(x, c, -s, -c)
    return np.cos(x)


def tan(x: Any) -> Any:
    if isinstance(x, Jet):
        t = np.tan(x.value)
        sec2 = 1.0 + t * t
        return _chain(x, t, sec2, 2.0 * t * sec2)
    return np.tan(x)


def exp(x: Any) -> Any:
    if isinstance(x, Jet):
        e = np.exp(x.value)
        return _chain(x, e, e, e)
    return np.exp(x)


def log(x: Any) -> Any:
    if isinstance(x, Jet):
        r = 1.0 / x.value
        return _chain(x, np.log(x.value), r, -r * r)
    return np.log(x)


def sqrt(x: Any) -> Any:
    if isinstance(x, Jet):
        s = np.sqrt(x.value)
        d1 = 0.5 / s
        return _chain(x, s, d1, -0.5 * d1 / x.value)
    return np.sqrt(x)


def absolute(x: Any) -> Any:
    # not differentiable at 0; callers validate
    if isinstance(x, Jet):
        sign = np.sign(x.value)
        return _chain(x, np.abs(x.value), sign, np.zeros_like(sign))
    return np.abs(x)

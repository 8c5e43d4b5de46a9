"""
Continuous Lagrangians of the navigation problems.

Each Lagrangian is a callable generic over floats, arrays and Jets:
first-order ones take (q, v), second-order ones (q, v, a), each argument a
pair of components. Derivatives come from evaluating them on Jets.
"""

import logging
from typing import Any

import numpy as np

from geometry import jets
from geometry.geometry_types import Vec2, WindField
from geometry.jets import Jet, value_of

from .lagrangian_types import EPS_VELOCITY, DegenerateVelocity, Pair, RandersData, first_index

logger = logging.getLogger(__name__)


def randers_metric(rd: RandersData, q: Pair, v: Pair) -> Any:
    """Randers metric F at (q, v), generic over Jets"""
    x, y = q
    vx, vy = v
    w1, w2 = rd.wind.lift(x, y)
    alpha = rd.alpha(x, y)
    wv = (w1 * vx + w2 * vy) / alpha
    vv = vx * vx + vy * vy
    a = vv / alpha + wv * wv
    return jets.sqrt(a) - wv


def randers_F(rd: RandersData, q: Vec2, v: Vec2) -> float:
    """
    Evaluate the Randers metric F(q, v) = sqrt(a(v, v)) + <b(q), v>

    Args:
        rd: Randers data of the wind field
        q: Position
        v: Velocity

    Returns:
        Travel time per unit parameter along v at q
    """
    return float(randers_metric(rd, (q.x, q.y), (v.x, v.y)))


class FirstOrderLagrangian:
    """Base class for L(q, v)"""

    order = 1
    name = "first-order"

    def __call__(self, q: Pair, v: Pair) -> Any:
        raise NotImplementedError

    def partials(self, q: Vec2, v: Vec2, order: int = 2) -> Jet:
        """Value, gradient and Hessian in (qx, qy, vx, vy)"""
        x, y, vx, vy = Jet.variables([q.x, q.y, v.x, v.y], order=order)
        return _as_jet(self((x, y), (vx, vy)), 4, order)


class SecondOrderLagrangian:
    """Base class for L(q, v, a)"""

    order = 2
    name = "second-order"

    def __call__(self, q: Pair, v: Pair, a: Pair) -> Any:
        raise NotImplementedError

    def partials(self, q: Vec2, v: Vec2, a: Vec2, order: int = 2) -> Jet:
        """Value, gradient and Hessian in (qx, qy, vx, vy, ax, ay)"""
        args = Jet.variables([q.x, q.y, v.x, v.y, a.x, a.y], order=order)
        return _as_jet(self(tuple(args[0:2]), tuple(args[2:4]), tuple(args[4:6])), 6, order)


def _as_jet(value: Any, n: int, order: int) -> Jet:
    if isinstance(value, Jet):
        return value
    shape = np.shape(value)
    hess = np.zeros(shape + (n, n)) if order == 2 else None
    return Jet(value, np.zeros(shape + (n,)), hess)


class ZermeloLagrangian(FirstOrderLagrangian):
    """F^2 for the Randers metric of a wind field"""

    name = "zermelo"

    def __init__(self, randers: RandersData):
        self.randers = randers

    def __call__(self, q: Pair, v: Pair) -> Any:
        if isinstance(v[0], Jet) or isinstance(v[1], Jet):
            speed = np.hypot(value_of(v[0]), value_of(v[1]))
            slow = speed < EPS_VELOCITY
            if np.any(slow):
                index = first_index(slow)
                raise DegenerateVelocity(index, float(np.atleast_1d(speed)[index or 0]))
        f = randers_metric(self.randers, q, v)
        return f * f


class FuelLagrangian(FirstOrderLagrangian):
    """Half the squared control, 1/2 |v - W(q)|^2"""

    name = "fuel"

    def __init__(self, wind: WindField):
        self.wind = wind

    def __call__(self, q: Pair, v: Pair) -> Any:
        w1, w2 = self.wind.lift(*q)
        u1 = v[0] - w1
        u2 = v[1] - w2
        return 0.5 * (u1 * u1 + u2 * u2)


class FreeParticleLagrangian(FirstOrderLagrangian):
    """Kinetic energy 1/2 |v|^2"""

    name = "free_particle"

    def __call__(self, q: Pair, v: Pair) -> Any:
        return 0.5 * (v[0] * v[0] + v[1] * v[1])


class SecondOrderTVLagrangian(SecondOrderLagrangian):
    """Fuel plus weighted total variation of the control, 1/2 [|v - W|^2 + c |a - DW v|^2]"""

    name = "second_order_tv"

    def __init__(self, wind: WindField, weight: float):
        if not weight > 0.0:
            raise ValueError(f"weight c must be positive, got {weight}")
        self.wind = wind
        self.weight = float(weight)

    def __call__(self, q: Pair, v: Pair, a: Pair) -> Any:
        w1, w2 = self.wind.lift(*q)
        (j11, j12), (j21, j22) = self.wind.lift_jacobian(*q)
        u1 = v[0] - w1
        u2 = v[1] - w2
        r1 = a[0] - (j11 * v[0] + j12 * v[1])
        r2 = a[1] - (j21 * v[0] + j22 * v[1])
        return 0.5 * (u1 * u1 + u2 * u2 + self.weight * (r1 * r1 + r2 * r2))


class AccelerationLagrangian(SecondOrderLagrangian):
    """Bending energy 1/2 |a|^2, whose critical curves are cubic splines"""

    name = "acceleration"

    def __call__(self, q: Pair, v: Pair, a: Pair) -> Any:
        return 0.5 * (a[0] * a[0] + a[1] * a[1])


def zermelo_lagrangian(rd: RandersData) -> ZermeloLagrangian:
    return ZermeloLagrangian(rd)


def fuel_lagrangian(w: WindField) -> FuelLagrangian:
    return FuelLagrangian(w)


def secondorder_tv_lagrangian(w: WindField, c: float) -> SecondOrderTVLagrangian:
    return SecondOrderTVLagrangian(w, c)

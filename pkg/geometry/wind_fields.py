import logging
from functools import lru_cache
from typing import Any, Tuple

import numpy as np

from . import jets
from .geometry_types import Vec2, WindField

logger = logging.getLogger(__name__)

# chosen so that max |W| over the navigation area is just below 1
ZERMELO_SCALE = 1.7
# (sign, center) of each vortex in the Zermelo field
ZERMELO_BUMPS = ((-1.0, (2.0, 2.0)), (-1.0, (4.0, 4.0)), (-1.0, (2.0, 5.0)), (1.0, (5.0, 1.0)))


def _bump_scale(dx: Any, dy: Any) -> Any:
    return 1.0 / (3.0 * (dx * dx + dy * dy) + 1.0)


def _bump_components(a: float, b: float, x: Any, y: Any) -> Tuple[Any, Any]:
    dx, dy = x - a, y - b
    s = _bump_scale(dx, dy)
    return -dy * s, dx * s


def _bump_jacobian(a: float, b: float, x: Any, y: Any):
    dx, dy = x - a, y - b
    s = _bump_scale(dx, dy)
    s2 = 6.0 * s * s
    return (
        (dx * dy * s2, dy * dy * s2 - s),
        (s - dx * dx * s2, -(dx * dy * s2)),
    )


def rotational_bump(a: float, b: float, p: Vec2) -> Vec2:
    """
    Evaluate the rotational bump centered at (a, b)

    Args:
        a, b: Center of the vortex
        p: Evaluation point

    Returns:
        (-(y-b), x-a) / (3((x-a)^2 + (y-b)^2) + 1)
    """
    return Vec2(*_bump_components(a, b, p.x, p.y))


def bump_field(a: float, b: float) -> WindField:
    return WindField(
        f"R[{a:g},{b:g}]",
        lambda x, y: _bump_components(a, b, x, y),
        lambda x, y: _bump_jacobian(a, b, x, y),
    )


@lru_cache(maxsize=None)
def zermelo_wind() -> WindField:
    """The four-vortex field used for the minimum-time navigation example"""
    terms = [(ZERMELO_SCALE * sign, bump_field(a, b)) for sign, (a, b) in ZERMELO_BUMPS]
    return WindField.combine(terms, "zermelo")


def zermelo_vortex_field(p: Vec2) -> Vec2:
    return zermelo_wind().eval(p)


def _fuel_components(x: Any, y: Any) -> Tuple[Any, Any]:
    return jets.cos(2.0 * x - y - 6.0), (2.0 / 3.0) * jets.sin(y) + x - 3.0


def _fuel_jacobian(x: Any, y: Any):
    s = jets.sin(2.0 * x - y - 6.0)
    one = 1.0 + 0.0 * x
    return (-2.0 * s, s), (one, (2.0 / 3.0) * jets.cos(y))


@lru_cache(maxsize=None)
def fuel_wind() -> WindField:
    """The current used by the fuel-optimal and interpolation examples"""
    return WindField("fuel", _fuel_components, _fuel_jacobian)


def fuel_current_field(p: Vec2) -> Vec2:
    return fuel_wind().eval(p)


def _zero(x: Any) -> Any:
    return 0.0 * x


@lru_cache(maxsize=None)
def calm_field() -> WindField:
    """W = 0 everywhere"""
    return WindField(
        "calm",
        lambda x, y: (_zero(x), _zero(y)),
        lambda x, y: ((_zero(x), _zero(x)), (_zero(x), _zero(x))),
    )


def uniform_field(w: Vec2) -> WindField:
    """Constant wind w"""
    return WindField(
        f"uniform{w}",
        lambda x, y: (_zero(x) + w.x, _zero(y) + w.y),
        lambda x, y: ((_zero(x), _zero(x)), (_zero(x), _zero(x))),
    )


def max_wind_speed(
    field: WindField,
    x_range: Tuple[float, float] = (-1.0, 7.0),
    y_range: Tuple[float, float] = (-1.0, 5.0),
    shape: Tuple[int, int] = (600, 400),
) -> float:
    """Scan |W| over a regular grid and return its maximum"""
    xs = np.linspace(x_range[0], x_range[1], shape[0])
    ys = np.linspace(y_range[0], y_range[1], shape[1])
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    peak = float(np.max(field.speed(gx, gy)))
    logger.debug("max |W| of %s on grid %s: %.6f", field.name, shape, peak)
    return peak

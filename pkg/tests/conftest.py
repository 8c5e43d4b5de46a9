import os
from typing import Callable

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from geometry.geometry_types import Vec2
from lagrangians.continuous import AccelerationLagrangian, FreeParticleLagrangian
from lagrangians.discretize import discretize_lobatto2, discretize_trapezoidal
from problems.registry import build_free_particle_problem
from solver.solver_types import Trajectory, TrajectoryKind

settings.register_profile("default", max_examples=100, deadline=None)
settings.register_profile("quick", max_examples=20, deadline=None)
settings.register_profile(
    "thorough", max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


def fd_step(x: np.ndarray) -> np.ndarray:
    return 1e-5 * np.maximum(1.0, np.abs(x))


def fd_gradient(f: Callable[[np.ndarray], float], x: np.ndarray) -> np.ndarray:
    """Central differences of a scalar function"""
    x = np.asarray(x, dtype=float)
    steps = fd_step(x)
    grad = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = steps[i]
        grad[i] = (f(x + e) - f(x - e)) / (2.0 * steps[i])
    return grad


def fd_jacobian(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    """Central differences of a vector function; J[i, j] = df_i/dx_j"""
    x = np.asarray(x, dtype=float)
    steps = fd_step(x)
    columns = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = steps[j]
        columns.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * steps[j]))
    return np.stack(columns, axis=-1)


def relative_error(actual, expected) -> float:
    actual, expected = np.asarray(actual, dtype=float), np.asarray(expected, dtype=float)
    return float(np.max(np.abs(actual - expected)) / max(1.0, float(np.max(np.abs(expected)))))


def assert_close_to_fd(actual, expected, rtol: float = 1e-6) -> None:
    error = relative_error(actual, expected)
    assert error < rtol, f"relative error {error:.3e}\nanalytic:\n{actual}\nfinite differences:\n{expected}"


def coords(lo: float, hi: float):
    return st.floats(lo, hi, allow_nan=False, allow_infinity=False)


# points inside the navigation area
points = st.builds(Vec2, coords(-1.0, 7.0), coords(-1.0, 6.0))
velocities = st.builds(Vec2, coords(-3.0, 3.0), coords(-3.0, 3.0))


def line_trajectory(start, end, N: int, h: float) -> Trajectory:
    s = np.linspace(0.0, 1.0, N + 1)[:, None]
    positions = (1.0 - s) * np.asarray(start, dtype=float) + s * np.asarray(end, dtype=float)
    return Trajectory(TrajectoryKind.Q, positions, None, h)


@pytest.fixture
def free_particle():
    return FreeParticleLagrangian()


@pytest.fixture
def free_particle_ld():
    return discretize_trapezoidal(FreeParticleLagrangian(), 0.1)


@pytest.fixture
def spline_ld():
    return discretize_lobatto2(AccelerationLagrangian(), 0.5)


@pytest.fixture
def free_particle_problem():
    return build_free_particle_problem(N=8, start=Vec2(0.0, 0.0), end=Vec2(1.0, 2.0), T=1.0)

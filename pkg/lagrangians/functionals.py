import math
from typing import TYPE_CHECKING

import numpy as np

from .continuous import randers_metric
from .discretize import DiscreteLagrangian
from .lagrangian_types import RandersData

if TYPE_CHECKING:
    from solver.solver_types import Trajectory


def travel_time(rd: RandersData, traj: "Trajectory") -> float:
    """
    Navigation time along a position trajectory

    Each segment contributes h/2 [F(q_k, d_k) + F(q_k+1, d_k)] with the
    forward difference d_k = (q_k+1 - q_k)/h. The sum is exact for straight
    segments in a uniform wind.

    Args:
        rd: Randers data of the wind field
        traj: Position trajectory

    Returns:
        Total time, independent of how the curve is parametrised
    """
    q = traj.positions
    h = traj.h
    d = (q[1:] - q[:-1]) / h
    start = randers_metric(rd, (q[:-1, 0], q[:-1, 1]), (d[:, 0], d[:, 1]))
    end = randers_metric(rd, (q[1:, 0], q[1:, 1]), (d[:, 0], d[:, 1]))
    return math.fsum(np.ravel(0.5 * h * (start + end)))


def action(Ld: DiscreteLagrangian, traj: "Trajectory") -> float:
    """Discrete action: sum of L_d over consecutive pairs of states"""
    states = traj.states
    if Ld.state_dim != states.shape[1]:
        raise ValueError(
            f"{Ld.name} acts on states of dimension {Ld.state_dim}, trajectory has {states.shape[1]}"
        )
    return math.fsum(np.ravel(Ld.evaluate_states(states[:-1], states[1:])))

import logging

from lagrangians.discretize import discretize_lobatto2, discretize_trapezoidal
from lagrangians.functionals import action, travel_time
from lagrangians.lagrangian_types import RandersData
from solver.solver_types import Trajectory

from .problem_types import LagrangianId, ProblemError, ProblemKind, ProblemSpec

logger = logging.getLogger(__name__)


def evaluate_cost(spec: ProblemSpec, traj: Trajectory) -> float:
    """
    Cost of a trajectory for its problem

    Zermelo problems report the navigation time; every other problem reports
    the discrete action at the trajectory's own step, which is the discretized
    fuel (plus weighted control variation) because the Lagrangian equals the
    cost integrand.

    Raises:
        ProblemError: the trajectory kind does not match the problem
    """
    if traj.kind is not spec.trajectory_kind:
        raise ProblemError(f"{spec.name} expects {spec.trajectory_kind.value} trajectories, got {traj.kind.value}")
    if spec.lagrangian is LagrangianId.ZERMELO:
        cost = travel_time(RandersData(spec.wind_field), traj)
    elif spec.kind is ProblemKind.SECOND_ORDER:
        cost = action(discretize_lobatto2(spec.continuous_lagrangian(), traj.h), traj)
    else:
        cost = action(discretize_trapezoidal(spec.continuous_lagrangian(), traj.h), traj)
    logger.debug("%s cost of %s: %.10g", spec.name, traj, cost)
    return cost

"""Long-running reproductions of the published navigation results; run with `pytest -m slow`"""

import numpy as np
import pytest

from lagrangians import travel_time
from lagrangians.lagrangian_types import RandersData
from problems import build_fig2_problem, build_fig3_problem, build_fig4_coarse_problem, evaluate_cost, fig2_guesses
from solver import SweepConfig, max_residual, perturb, refine, solve, sweep

pytestmark = pytest.mark.slow

THREADS = 4


@pytest.fixture(scope="module")
def fig3_solution():
    problem = build_fig3_problem()
    traj, report = solve(problem, problem.default_guess(), SweepConfig(parallel_width=THREADS))
    return problem, traj, report


def test_fig3_fuel_expenditure(fig3_solution):
    problem, traj, report = fig3_solution
    assert report.converged
    assert evaluate_cost(problem, traj) == pytest.approx(5.597, abs=0.01)


def test_fig3_one_more_sweep_leaves_the_cost(fig3_solution):
    problem, traj, report = fig3_solution
    Ld = problem.discrete_lagrangian()
    assert max_residual(Ld, traj) < 1e-4 * problem.h**2
    after = sweep(traj, Ld, SweepConfig())
    assert abs(evaluate_cost(problem, after) - evaluate_cost(problem, traj)) < 1e-8


def test_fig3_loiters_only_with_a_long_horizon(fig3_solution):
    _, traj, _ = fig3_solution
    assert np.min(traj.speeds()) < 0.05
    short = build_fig3_problem().with_overrides(T=5.0)
    fast, report = solve(short, short.default_guess(), SweepConfig(parallel_width=THREADS))
    assert report.converged
    assert np.min(fast.speeds()) > 0.2


def test_fig4_costs_before_and_after_refinement():
    cfg = SweepConfig(damping=0.05, parallel_width=THREADS)
    coarse_problem = build_fig4_coarse_problem()
    coarse, report = solve(coarse_problem, coarse_problem.default_guess(), cfg)
    assert report.converged
    assert evaluate_cost(coarse_problem, coarse) == pytest.approx(134.2, rel=0.01)

    fine_problem = coarse_problem.refined()
    fine, report = solve(fine_problem, refine(coarse), cfg)
    assert report.converged
    assert evaluate_cost(fine_problem, fine) == pytest.approx(133.4, rel=0.01)


def test_fig2_guesses_reach_distinct_local_minima():
    times = []
    for guess in fig2_guesses():
        problem = build_fig2_problem(guess)
        traj, report = solve(problem, problem.default_guess(), SweepConfig(parallel_width=THREADS))
        assert report.converged
        rd = RandersData(problem.wind_field)
        best = travel_time(rd, traj)
        for seed in range(50):
            assert travel_time(rd, perturb(traj, 1e-3, seed=seed)) > best - 1e-8
        times.append(best)
    assert np.ptp(times) > 1e-3

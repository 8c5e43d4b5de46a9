from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
import pytest
from conftest import assert_close_to_fd, coords, fd_jacobian, line_trajectory
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import solve_banded

from geometry.geometry_types import Vec2
from geometry.wind_fields import calm_field, fuel_wind
from lagrangians.continuous import FirstOrderLagrangian, FreeParticleLagrangian, fuel_lagrangian, zermelo_lagrangian
from lagrangians.discretize import discretize_trapezoidal
from lagrangians.lagrangian_types import DegenerateVelocity, RandersData
from problems.registry import build_fig3_problem, build_free_particle_problem
from solver import (
    Boundary,
    CubicSpline,
    InconsistentWaypoints,
    KnotSet,
    NonFiniteState,
    PiecewiseLinear,
    ResidualNorm,
    SingularJacobian,
    StraightLine,
    SweepConfig,
    Trajectory,
    TrajectoryError,
    TrajectoryKind,
    UpdateRule,
    chunk_bounds,
    del_residuals,
    del_residual,
    deloc_residual,
    deloc_step_newton,
    initial_guess,
    knot_mask,
    max_residual,
    pdel_solve_exact,
    pdel_step_newton,
    perturb,
    refine,
    residual_norms,
    solve,
    sweep,
    sweep_with_residual,
)
from solver.linalg import solve_batched
from solver.residuals import triple_system

NEWTON = SweepConfig(rule=UpdateRule.NEWTON)
EXACT = SweepConfig(rule=UpdateRule.EXACT)


def _x_line(xs, h=1.0):
    return Trajectory(TrajectoryKind.Q, np.column_stack([xs, np.zeros(len(xs))]), None, h)


def _uniform_motion(N, h=0.5, v=(1.0, 2.0)):
    k = np.arange(N + 1)[:, None]
    positions = np.array([1.0, -1.0]) + k * h * np.array(v)
    return Trajectory(TrajectoryKind.TQ, positions, np.tile(v, (N + 1, 1)), h)


class _Potential(FirstOrderLagrangian):
    """Free particle in an overwhelming linear potential"""

    def __call__(self, q, v):
        return 0.5 * (v[0] * v[0] + v[1] * v[1]) - 1e308 * q[0]


class _Linear(FirstOrderLagrangian):
    def __call__(self, q, v):
        return v[0] + v[1]


def test_one_newton_sweep_of_the_free_particle():
    Ld = discretize_trapezoidal(FreeParticleLagrangian(), 1.0)
    out = sweep(_x_line([0.0, 1.0, 4.0, 6.0]), Ld, NEWTON)
    np.testing.assert_allclose(out.positions[:, 0], [0.0, 2.0, 3.5, 6.0], atol=1e-12)
    np.testing.assert_array_equal(out.positions[:, 1], 0.0)


def test_damping_scales_the_increment():
    Ld = discretize_trapezoidal(FreeParticleLagrangian(), 1.0)
    out = sweep(_x_line([0.0, 1.0, 4.0, 6.0]), Ld, replace(NEWTON, damping=0.5))
    np.testing.assert_allclose(out.positions[:, 0], [0.0, 1.5, 3.75, 6.0], atol=1e-12)


def test_exact_rule_solves_each_stencil():
    Ld = discretize_trapezoidal(FreeParticleLagrangian(), 1.0)
    out = sweep(_x_line([0.0, 1.0, 4.0, 6.0]), Ld, EXACT)
    np.testing.assert_allclose(out.positions[:, 0], [0.0, 2.0, 3.5, 6.0], atol=1e-12)


@pytest.mark.parametrize("cfg", [NEWTON, EXACT], ids=["newton", "exact"])
def test_exact_solutions_are_bitwise_fixed_points(cfg):
    Ld = discretize_trapezoidal(FreeParticleLagrangian(), 0.5)
    positions = np.arange(9)[:, None] * np.array([1.0, 2.0])
    traj = Trajectory(TrajectoryKind.Q, positions, None, 0.5)
    out, norms = sweep_with_residual(traj, Ld, cfg)
    np.testing.assert_array_equal(out.states, traj.states)
    np.testing.assert_array_equal(norms, 0.0)


def test_uniform_motion_is_a_fixed_point_of_the_spline_energy(spline_ld):
    traj = _uniform_motion(6)
    np.testing.assert_array_equal(sweep(traj, spline_ld, NEWTON).states, traj.states)


@given(st.integers(1, 7), coords(-3.0, 3.0), coords(-3.0, 3.0))
def test_an_update_only_reads_the_neighbouring_samples(j, dx, dy):
    Ld = discretize_trapezoidal(FreeParticleLagrangian(), 0.25)
    rng = np.random.default_rng(0)
    positions = rng.uniform(0.0, 4.0, (9, 2))
    moved = positions.copy()
    moved[j] += [dx, dy]
    a = sweep(Trajectory(TrajectoryKind.Q, positions, None, 0.25), Ld, NEWTON).positions
    b = sweep(Trajectory(TrajectoryKind.Q, moved, None, 0.25), Ld, NEWTON).positions
    untouched = [k for k in range(9) if abs(k - j) > 1]
    np.testing.assert_array_equal(a[untouched], b[untouched])


@pytest.mark.parametrize("width", [2, 3, 8])
def test_sweep_does_not_depend_on_chunking(width, spline_ld):
    rng = np.random.default_rng(7)
    states = rng.uniform(-1.0, 1.0, (31, 4))
    traj = Trajectory.from_states(TrajectoryKind.TQ, states, 0.5)
    serial = sweep(traj, spline_ld, NEWTON)
    with ThreadPoolExecutor(max_workers=width) as pool:
        parallel = sweep(traj, spline_ld, replace(NEWTON, parallel_width=width), executor=pool)
    np.testing.assert_array_equal(serial.states, parallel.states)


def test_solve_is_bitwise_identical_across_parallel_widths():
    problem = build_fig3_problem()
    guess = problem.default_guess()
    results = []
    for width in (1, 2, 8):
        traj, report = solve(problem, guess, SweepConfig(max_iterations=20, parallel_width=width))
        results.append((traj.states, report.residuals))
    for states, residuals in results[1:]:
        np.testing.assert_array_equal(states, results[0][0])
        assert residuals == results[0][1]


@pytest.mark.parametrize("cfg", [NEWTON, EXACT], ids=["newton", "exact"])
def test_free_particle_solve_is_bitwise_identical_across_parallel_widths(cfg):
    problem = build_free_particle_problem(N=24, end=Vec2(1.0, 2.0))
    guess = perturb(problem.default_guess(), 0.1, seed=9)
    runs = [solve(problem, guess, replace(cfg, parallel_width=width, max_iterations=300)) for width in (1, 2, 8)]
    for traj, report in runs[1:]:
        np.testing.assert_array_equal(traj.states, runs[0][0].states)
        assert report.residuals == runs[0][1].residuals


@pytest.mark.parametrize("cfg", [NEWTON, EXACT], ids=["newton", "exact"])
def test_degenerate_velocity_names_the_same_index_for_every_width(cfg):
    Ld = discretize_trapezoidal(zermelo_lagrangian(RandersData(calm_field())), 0.2)
    traj = line_trajectory((0.0, 0.0), (6.0, 2.0), 40, 0.2)
    positions = traj.positions.copy()
    positions[31] = positions[30]
    stalled = traj.with_states(positions)
    indices = []
    for width in (1, 4):
        with ThreadPoolExecutor(max_workers=width) as pool:
            with pytest.raises(DegenerateVelocity) as err:
                sweep(stalled, Ld, replace(cfg, parallel_width=width), executor=pool)
        indices.append(err.value.index)
    assert indices == [30, 30]


def _tridiagonal_oracle(start, end, N):
    # q_k-1 - 2 q_k + q_k+1 = 0 with fixed ends
    bands = np.zeros((3, N - 1))
    bands[0, 1:] = -1.0
    bands[1, :] = 2.0
    bands[2, :-1] = -1.0
    rhs = np.zeros((N - 1, 2))
    rhs[0] += start
    rhs[-1] += end
    return solve_banded((1, 1), bands, rhs)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_free_particle_matches_the_direct_linear_solve(seed):
    rng = np.random.default_rng(seed)
    start, end = rng.uniform(-5.0, 5.0, 2), rng.uniform(-5.0, 5.0, 2)
    problem = build_free_particle_problem(N=8, start=Vec2(*start), end=Vec2(*end), T=1.0)
    guess = perturb(problem.default_guess(), 0.5, seed=seed)
    traj, report = solve(problem, guess, SweepConfig(tol_factor=1e-10, max_iterations=20000))
    assert report.converged
    np.testing.assert_allclose(traj.positions[1:-1], _tridiagonal_oracle(start, end, 8), atol=1e-10)


def test_solve_reports_the_residual_of_every_iterate(free_particle_problem):
    guess = perturb(free_particle_problem.default_guess(), 0.2, seed=3)
    traj, report = solve(free_particle_problem, guess, SweepConfig(tol_factor=1e-6))
    Ld = free_particle_problem.discrete_lagrangian()
    assert report.converged
    assert report.residuals[0] == pytest.approx(max_residual(Ld, guess))
    assert len(report.residuals) == report.iterations + 1 == len(report.wall_seconds)
    assert report.tolerance == pytest.approx(1e-6 * free_particle_problem.h**2)
    assert report.final_residual < report.tolerance
    assert max_residual(Ld, traj) == pytest.approx(report.final_residual, rel=1e-12)


def test_solve_stops_at_the_iteration_cap(free_particle_problem):
    guess = perturb(free_particle_problem.default_guess(), 0.2, seed=3)
    traj, report = solve(free_particle_problem, guess, SweepConfig(max_iterations=3))
    assert not report.converged
    assert report.iterations == 3
    assert len(report.residuals) == 4


def test_zero_iterations_return_the_guess(free_particle_problem):
    guess = perturb(free_particle_problem.default_guess(), 0.2, seed=3)
    traj, report = solve(free_particle_problem, guess, SweepConfig(max_iterations=0))
    np.testing.assert_array_equal(traj.states, guess.states)
    assert report.iterations == 0


def test_solve_rejects_a_guess_off_the_boundary(free_particle_problem):
    guess = free_particle_problem.default_guess()
    moved = guess.positions.copy()
    moved[0] += 0.1
    with pytest.raises(ValueError):
        solve(free_particle_problem, guess.with_states(moved), NEWTON)


def test_non_finite_iterates_are_reported():
    Ld = discretize_trapezoidal(_Potential(), 10.0)
    with pytest.raises(NonFiniteState) as err:
        sweep(line_trajectory((0.0, 0.0), (1.0, 1.0), 4, 10.0), Ld, NEWTON)
    assert err.value.iteration == 1
    assert err.value.index == 1


def test_singular_newton_matrix_names_the_index():
    Ld = discretize_trapezoidal(_Linear(), 1.0)
    with pytest.raises(SingularJacobian) as err:
        sweep(line_trajectory((0.0, 0.0), (1.0, 1.0), 4, 1.0), Ld, NEWTON)
    assert err.value.index == 1


def test_sweep_rejects_mismatched_states(spline_ld):
    with pytest.raises(TrajectoryError):
        sweep(line_trajectory((0.0, 0.0), (1.0, 1.0), 4, 0.5), spline_ld, NEWTON)


def test_knots_keep_their_positions_bitwise(spline_ld):
    rng = np.random.default_rng(11)
    traj = Trajectory.from_states(TrajectoryKind.TQ, rng.uniform(-1.0, 1.0, (9, 4)), 0.5)
    knots = KnotSet(((3, Vec2(*traj.positions[3])), (6, Vec2(*traj.positions[6]))))
    out = sweep(traj, spline_ld, NEWTON, knots)
    np.testing.assert_array_equal(out.positions[[3, 6]], traj.positions[[3, 6]])
    assert not np.array_equal(out.velocities[[3, 6]], traj.velocities[[3, 6]])
    assert not np.array_equal(out.positions[4], traj.positions[4])


def test_knots_of_position_only_states_do_not_move(free_particle_ld):
    traj = _x_line([0.0, 1.0, 4.0, 6.0], h=0.1)
    out = sweep(traj, free_particle_ld, NEWTON, KnotSet(((1, Vec2(1.0, 0.0)),)))
    np.testing.assert_array_equal(out.positions[1], traj.positions[1])


def test_knot_step_solves_only_the_velocity_equation(spline_ld):
    s_prev = (Vec2(0.0, 0.0), Vec2(1.0, 0.0))
    s = (Vec2(0.7, 0.4), Vec2(0.0, 1.0))
    s_next = (Vec2(1.0, 1.0), Vec2(0.0, 1.0))
    q, v = deloc_step_newton(spline_ld, s_prev, s, s_next, knot=True)
    assert q == s[0]
    _, velocity_residual = deloc_residual(spline_ld, s_prev, (q, v), s_next)
    # the spline energy is quadratic in the states, so its residual is linear
    assert velocity_residual.norm() < 1e-10


def test_deloc_newton_step_uses_the_jacobian_of_the_residual(spline_ld):
    s_prev = (Vec2(0.0, 0.0), Vec2(1.0, 0.0))
    s = (Vec2(0.7, 0.4), Vec2(0.0, 1.0))
    s_next = (Vec2(1.0, 1.0), Vec2(0.0, 1.0))
    prev, mid, nxt = (np.array([[*q, *v]]) for q, v in (s_prev, s, s_next))
    _, matrix = triple_system(spline_ld, prev, mid, nxt)

    def residual(state):
        return triple_system(spline_ld, prev, state[None, :], nxt, order=1)[0][0]

    assert_close_to_fd(matrix[0], fd_jacobian(residual, mid[0]))
    q, v = deloc_step_newton(spline_ld, s_prev, s, s_next)
    assert q != s[0]
    position_part, velocity_part = deloc_residual(spline_ld, s_prev, (q, v), s_next)
    assert position_part.norm() < 1e-10
    assert velocity_part.norm() < 1e-10


def test_deloc_residual_matches_the_trajectory_residuals(spline_ld):
    rng = np.random.default_rng(5)
    traj = Trajectory.from_states(TrajectoryKind.TQ, rng.uniform(-1.0, 1.0, (4, 4)), 0.5)
    states = [(traj.position(k), traj.velocity(k)) for k in range(4)]
    position_part, velocity_part = deloc_residual(spline_ld, *states[:3])
    expected = [*position_part, *velocity_part]
    np.testing.assert_allclose(del_residuals(spline_ld, traj)[0], expected, rtol=1e-14, atol=1e-12)


def test_residual_norms_skip_position_rows_at_knots():
    res = np.array([[3.0, 4.0, 0.0, 0.0], [3.0, 4.0, 0.0, 2.0]])
    mask = knot_mask(KnotSet(((2, Vec2(0.0, 0.0)),)), 3)
    np.testing.assert_array_equal(residual_norms(res, mask), [5.0, 2.0])
    np.testing.assert_array_equal(residual_norms(res, mask, ResidualNorm.INF), [4.0, 2.0])


def test_pdel_newton_and_exact_solution_agree_on_a_linear_problem(free_particle_ld):
    q_prev, q, q_next = Vec2(0.0, 0.0), Vec2(3.0, -1.0), Vec2(1.0, 2.0)
    newton = pdel_step_newton(free_particle_ld, q_prev, q, q_next)
    exact = pdel_solve_exact(free_particle_ld, q_prev, q, q_next)
    assert newton.x == pytest.approx(0.5, abs=1e-12)
    assert newton.y == pytest.approx(1.0, abs=1e-12)
    assert (exact - newton).norm() < 1e-12


def test_exact_solve_zeroes_the_stencil_residual():
    Ld = discretize_trapezoidal(fuel_lagrangian(fuel_wind()), 0.15)
    q_prev, q_next = Vec2(1.0, 1.0), Vec2(1.2, 1.1)
    solved = pdel_solve_exact(Ld, q_prev, Vec2(1.1, 1.05), q_next)
    assert del_residual(Ld, q_prev, solved, q_next).norm() < 1e-10
    iterate = Vec2(1.1, 1.05)
    for _ in range(20):
        iterate = pdel_step_newton(Ld, q_prev, iterate, q_next)
    assert (iterate - solved).norm() < 1e-10


def test_one_newton_step_halves_the_fuel_stencil_residual():
    Ld = discretize_trapezoidal(fuel_lagrangian(fuel_wind()), 0.15)
    q_prev, q, q_next = Vec2(1.0, 1.0), Vec2(1.2, 0.95), Vec2(1.2, 1.1)
    before = del_residual(Ld, q_prev, q, q_next).norm()
    after = del_residual(Ld, q_prev, pdel_step_newton(Ld, q_prev, q, q_next), q_next).norm()
    assert after <= 0.5 * before


def test_chunks_cover_the_interior_in_order():
    assert chunk_bounds(10, 1) == [(1, 10)]
    assert chunk_bounds(10, 3) == [(1, 4), (4, 7), (7, 10)]
    assert chunk_bounds(3, 8) == [(1, 2), (2, 3)]


@given(st.integers(2, 500), st.integers(1, 64))
def test_chunks_partition_the_interior(N, width):
    bounds = chunk_bounds(N, width)
    assert bounds[0][0] == 1
    assert bounds[-1][1] == N
    assert all(hi == lo for (_, hi), (lo, _) in zip(bounds, bounds[1:]))
    assert len(bounds) <= width


def test_batched_solver_flags_singular_systems():
    matrices = np.array([[[2.0, 1.0], [1.0, 3.0]], [[1.0, 2.0], [2.0, 4.0]], [[0.0, 1.0], [1.0, 0.0]]])
    x, singular = solve_batched(matrices, np.array([[3.0, 4.0], [1.0, 1.0], [2.0, 5.0]]))
    np.testing.assert_array_equal(singular, [False, True, False])
    np.testing.assert_allclose(x[0], [1.0, 1.0])
    np.testing.assert_allclose(x[2], [5.0, 2.0])


def test_batched_solver_flags_ill_conditioned_and_non_finite_systems():
    matrices = np.array([[[1.0, 0.0], [0.0, 1e-13]], [[np.nan, 0.0], [0.0, 1.0]], [[4.0, 1.0], [1.0, 3.0]]])
    x, singular = solve_batched(matrices, np.ones((3, 2)))
    np.testing.assert_array_equal(singular, [True, True, False])
    np.testing.assert_array_equal(x[:2], 0.0)
    np.testing.assert_allclose(matrices[2] @ x[2], [1.0, 1.0])


def test_batched_solutions_do_not_depend_on_the_batch():
    rng = np.random.default_rng(3)
    matrices = rng.normal(size=(16, 4, 4)) + 4.0 * np.eye(4)
    rhs = rng.normal(size=(16, 4))
    together, singular = solve_batched(matrices, rhs)
    assert not singular.any()
    for row in range(16):
        alone, _ = solve_batched(matrices[row : row + 1], rhs[row : row + 1])
        np.testing.assert_array_equal(alone[0], together[row])


def test_refine_keeps_samples_and_averages_positions():
    traj = line_trajectory((0.0, 0.0), (4.0, 2.0), 4, 0.5)
    moved = traj.positions.copy()
    moved[2] = [1.0, 3.0]
    fine = refine(traj.with_states(moved))
    assert fine.N == 8
    assert fine.h == 0.25
    np.testing.assert_array_equal(fine.positions[::2], moved)
    np.testing.assert_array_equal(fine.positions[3], 0.5 * (moved[1] + moved[2]))


def test_refine_reproduces_cubic_motion():
    h = 0.5
    t = h * np.arange(5)
    positions = np.column_stack([t**3, 1.0 - t**2])
    velocities = np.column_stack([3 * t**2, -2 * t])
    fine = refine(Trajectory(TrajectoryKind.TQ, positions, velocities, h), factor=4)
    s = fine.times
    assert fine.N == 16
    np.testing.assert_allclose(fine.positions, np.column_stack([s**3, 1.0 - s**2]), atol=1e-12)
    np.testing.assert_allclose(fine.velocities, np.column_stack([3 * s**2, -2 * s]), atol=1e-12)


def test_refining_a_converged_solution_keeps_it_converged():
    problem = build_free_particle_problem(N=8, end=Vec2(1.0, 2.0))
    guess = perturb(problem.default_guess(), 0.2, seed=5)
    coarse, report = solve(problem, guess, SweepConfig(tol_factor=1e-8, max_iterations=20000))
    assert report.converged
    fine_problem = problem.refined()
    fine = refine(coarse)
    # midpoints solve their own stencils, old samples keep their residual
    assert max_residual(fine_problem.discrete_lagrangian(), fine) <= report.final_residual + 1e-12
    _, fine_report = solve(fine_problem, fine, SweepConfig())
    assert fine_report.converged
    assert fine_report.iterations < 10


def test_refine_needs_a_power_of_two():
    with pytest.raises(TrajectoryError):
        refine(line_trajectory((0.0, 0.0), (1.0, 1.0), 4, 0.5), factor=3)


def test_refined_knots_follow_their_samples():
    assert KnotSet(((80, Vec2(1.0, 3.0)), (160, Vec2(5.0, 2.0)))).refined().indices.tolist() == [160, 320]


def test_straight_line_guess():
    traj = initial_guess(StraightLine(), 4, 0.5, Boundary(Vec2(0.0, 0.0), Vec2(4.0, 2.0)))
    assert traj.kind is TrajectoryKind.Q
    np.testing.assert_allclose(traj.positions, np.arange(5)[:, None] * [1.0, 0.5])


def test_polyline_guess_passes_through_its_waypoints():
    guess = PiecewiseLinear(((2, Vec2(0.0, 4.0)),))
    traj = initial_guess(guess, 4, 1.0, Boundary(Vec2(0.0, 0.0), Vec2(4.0, 0.0)))
    np.testing.assert_allclose(traj.positions, [[0, 0], [0, 2], [0, 4], [2, 2], [4, 0]])


def test_spline_guess_meets_knots_and_end_velocities():
    boundary = Boundary(Vec2(0.0, 0.0), Vec2(3.0, 5.0), Vec2(0.0, 0.0), Vec2(0.0, 0.0))
    guess = CubicSpline(((40, Vec2(1.0, 3.0)), (80, Vec2(5.0, 2.0))))
    traj = initial_guess(guess, 120, 0.5, boundary)
    assert traj.kind is TrajectoryKind.TQ
    assert traj.position(40) == Vec2(1.0, 3.0)
    assert traj.position(80) == Vec2(5.0, 2.0)
    assert traj.position(120) == Vec2(3.0, 5.0)
    assert traj.velocity(0) == Vec2(0.0, 0.0)
    assert traj.velocity(120) == Vec2(0.0, 0.0)


@pytest.mark.parametrize("waypoints", [((0, (1.0, 1.0)),), ((4, (1.0, 1.0)),), ((2, (1.0, 1.0)), (2, (0.0, 1.0)))])
def test_guess_rejects_waypoints_off_the_interior(waypoints):
    with pytest.raises(InconsistentWaypoints):
        initial_guess(PiecewiseLinear(waypoints), 4, 1.0, Boundary(Vec2(0.0, 0.0), Vec2(1.0, 0.0)))


def test_perturbation_is_seeded_and_spares_ends_and_knots():
    traj = line_trajectory((0.0, 0.0), (1.0, 1.0), 10, 0.1)
    knots = KnotSet(((5, Vec2(0.5, 0.5)),))
    a = perturb(traj, 0.01, seed=4, knots=knots)
    b = perturb(traj, 0.01, seed=4, knots=knots)
    np.testing.assert_array_equal(a.states, b.states)
    np.testing.assert_array_equal(a.positions[[0, 5, 10]], traj.positions[[0, 5, 10]])
    assert 0.0 < np.max(np.abs(a.positions - traj.positions)) <= 0.01 + 1e-15


def test_trajectory_validation():
    with pytest.raises(TrajectoryError):
        Trajectory(TrajectoryKind.Q, [[0.0, 0.0], [np.nan, 1.0]], None, 0.1)
    with pytest.raises(TrajectoryError):
        Trajectory(TrajectoryKind.Q, [[0.0, 0.0], [1.0, 1.0]], [[0.0, 0.0], [1.0, 1.0]], 0.1)
    with pytest.raises(TrajectoryError):
        Trajectory(TrajectoryKind.Q, [[0.0, 0.0]], None, 0.1)
    with pytest.raises(TrajectoryError):
        Trajectory(TrajectoryKind.Q, [[0.0, 0.0], [1.0, 1.0]], None, 0.0)
    with pytest.raises(InconsistentWaypoints):
        KnotSet(((3, (0.0, 0.0)), (2, (1.0, 1.0))))


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(damping=1.0)
    with pytest.raises(ValueError):
        SweepConfig(parallel_width=0)
    assert SweepConfig(rule="exact").rule is UpdateRule.EXACT


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_newton_sweeps_decrease_the_free_particle_residual(seed):
    problem = build_free_particle_problem(N=12)
    Ld = problem.discrete_lagrangian()
    traj = perturb(problem.default_guess(), 0.3, seed=seed)
    before = max_residual(Ld, traj)
    for _ in range(40):
        traj = sweep(traj, Ld, NEWTON)
    assert max_residual(Ld, traj) < before

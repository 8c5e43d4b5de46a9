import argparse
import functools
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import yaml
from dotenv import load_dotenv

from geometry.geometry_types import NavRelaxError
from problems.evaluate import evaluate_cost
from problems.problem_types import ProblemSpec
from problems.registry import FIG4_COARSE_N, build_fig2_problem, build_fig4_problem, fig2_guesses, registry
from solver.refinement import perturb, refine
from solver.relaxation import solve
from solver.residuals import del_residuals, knot_mask, max_residual, residual_norms
from solver.solver_types import ResidualNorm, ResidualReport, SweepConfig, Trajectory, UpdateRule

from .config_loader import load_config_file, resolve_problem, resolve_sweep_config
from .run_types import RunConfig, RunSummary
from .trajectory_io import (
    read_trajectory_csv,
    write_index_residuals,
    write_residual_history,
    write_summary,
    write_trajectory_csv,
)

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

EXIT_CONVERGED = 0
EXIT_ERROR = 1
EXIT_ITERATION_CAP = 2

FIG4_DAMPING = 0.05
FIGURES = ("fig2", "fig3", "fig4")


def configure_logging() -> None:
    """Root logger from NAVRELAX_LOG_LEVEL (default INFO) and optional NAVRELAX_LOG_FILE"""
    level = logging.getLevelName(os.getenv("NAVRELAX_LOG_LEVEL", "INFO").upper())
    if not isinstance(level, int):
        level = logging.INFO
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    log_file = os.getenv("NAVRELAX_LOG_FILE")
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=handlers,
        force=True,
    )


class RelaxationRun:
    def __init__(self, cfg: RunConfig):
        """Resolve the problem and solver settings of a command-line run"""
        self.cfg = cfg
        self.document = load_config_file(cfg.config_path) if cfg.config_path is not None else {}
        self.problem = resolve_problem(cfg, self.document)
        self.sweep_config = resolve_sweep_config(cfg, self.document)
        self.out = Path(cfg.out)
        logger.debug("Run of %s with %s", self.problem, self.sweep_config)

    def initial_trajectory(self, problem: Optional[ProblemSpec] = None) -> Trajectory:
        """The problem's guess, perturbed when the run asks for it"""
        problem = problem or self.problem
        guess = problem.default_guess()
        amplitude = self.cfg.perturbation
        if amplitude > 0.0:
            guess = perturb(guess, amplitude, self.cfg.seed, problem.knots)
            logger.info("Perturbed the guess by up to %g (seed %s)", amplitude, self.cfg.seed)
        return guess

    def solve(
        self, problem: ProblemSpec, guess: Trajectory, sweep_config: Optional[SweepConfig] = None
    ) -> Tuple[Trajectory, ResidualReport, float]:
        traj, report = solve(problem, guess, sweep_config or self.sweep_config)
        return traj, report, evaluate_cost(problem, traj)

    def write_outputs(
        self,
        problem: ProblemSpec,
        traj: Trajectory,
        report: ResidualReport,
        cost: float,
        out: Optional[Path] = None,
        sweep_config: Optional[SweepConfig] = None,
        stages: Sequence[dict] = (),
    ) -> RunSummary:
        """Write trajectory.csv, residuals.csv and summary.json into the output directory"""
        out = Path(out or self.out)
        sweep_config = sweep_config or self.sweep_config
        summary = RunSummary(
            problem=problem.name,
            kind=traj.kind.value,
            N=traj.N,
            h=traj.h,
            rule=sweep_config.rule.value,
            damping=sweep_config.damping,
            converged=report.converged,
            iterations=report.iterations,
            max_residual=report.final_residual,
            tolerance=report.tolerance,
            cost=cost,
            wall_seconds=report.wall_time,
            outputs={
                "trajectory": str(write_trajectory_csv(traj, out / "trajectory.csv")),
                "residuals": str(write_residual_history(report, out / "residuals.csv")),
                "summary": str(out / "summary.json"),
            },
            stages=list(stages),
        )
        write_summary(summary, out / "summary.json")
        return summary

    def problem_for(self, traj: Trajectory) -> ProblemSpec:
        """This run's problem on the grid of a trajectory read from disk"""
        if traj.N == self.problem.N:
            return self.problem
        return self.problem.with_overrides(N=traj.N, T=traj.horizon)


def _stage(label: str, traj: Trajectory, report: ResidualReport, cost: float) -> dict:
    return {
        "stage": label,
        "N": traj.N,
        "iterations": report.iterations,
        "converged": report.converged,
        "max_residual": report.final_residual,
        "cost": cost,
        "wall_seconds": report.wall_time,
    }


def _exit_code(converged: bool) -> int:
    return EXIT_CONVERGED if converged else EXIT_ITERATION_CAP


def reports_errors(command: Callable[..., int]) -> Callable[..., int]:
    """Turn expected failures into exit code 1 with a one-line message on stderr"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs) -> int:
        try:
            return command(*args, **kwargs)
        except (NavRelaxError, yaml.YAMLError, OSError) as e:
            logger.debug("%s failed", command.__name__, exc_info=True)
            print(f"Error: {e}", file=sys.stderr)
            return EXIT_ERROR

    return wrapper


@reports_errors
def cmd_solve(cfg: RunConfig) -> int:
    """Solve from the configured guess and write trajectory, residual history and summary"""
    run = RelaxationRun(cfg)
    traj, report, cost = run.solve(run.problem, run.initial_trajectory())
    summary = run.write_outputs(run.problem, traj, report, cost)
    print(summary)
    return _exit_code(report.converged)


@reports_errors
def cmd_refine(cfg: RunConfig, input_path: Path) -> int:
    """Double the grid of a stored trajectory and continue iterating on the refined problem"""
    run = RelaxationRun(cfg)
    coarse = read_trajectory_csv(input_path)
    problem = run.problem_for(coarse).refined()
    fine = refine(coarse)
    logger.info("Refined %s to %s; knots at %s", coarse, fine, problem.knots.indices.tolist())
    traj, report, cost = run.solve(problem, fine)
    summary = run.write_outputs(problem, traj, report, cost)
    print(summary)
    return _exit_code(report.converged)


@reports_errors
def cmd_eval(cfg: RunConfig, input_path: Path, residuals: bool = False) -> int:
    """Print the cost and stopping quantity of a stored trajectory"""
    run = RelaxationRun(cfg)
    traj = read_trajectory_csv(input_path)
    problem = run.problem_for(traj)
    for violation in problem.boundary_violations(traj):
        logger.warning("%s: %s", input_path, violation)
    cost = evaluate_cost(problem, traj)
    Ld = problem.discrete_lagrangian()
    norm = run.sweep_config.residual_norm
    worst = max_residual(Ld, traj, problem.knots, norm)
    tolerance = run.sweep_config.tol_factor * traj.h**2
    print(f"{problem.name}: cost {cost!r}")
    print(f"max residual {worst:.6e} (tol {tolerance:.6e}, {'met' if worst < tolerance else 'not met'})")
    if residuals:
        norms = residual_norms(del_residuals(Ld, traj), knot_mask(problem.knots, traj.N), norm)
        path = write_index_residuals(norms, run.out / "residuals_by_index.csv")
        print(f"Per-index residuals written to {path}")
    return EXIT_CONVERGED


def _reproduce_fig2(run: RelaxationRun) -> int:
    """Relax every polyline guess; the summary describes the fastest local optimum"""
    results = []
    for number, guess in enumerate(fig2_guesses(), start=1):
        problem = build_fig2_problem(guess)
        traj, report, cost = run.solve(problem, run.initial_trajectory(problem))
        run.write_outputs(problem, traj, report, cost, out=run.out / f"guess-{number}")
        results.append((problem, traj, report, cost, _stage(f"guess-{number}", traj, report, cost)))
        print(f"fig2 guess {number} ({len(guess.waypoints) + 1} segments): travel time {cost:.4f}")
    problem, traj, report, cost, _ = min(results, key=lambda result: result[3])
    summary = run.write_outputs(problem, traj, report, cost, stages=[stage for *_, stage in results])
    print(summary)
    return _exit_code(all(result[2].converged for result in results))


def _reproduce_fig3(run: RelaxationRun) -> int:
    traj, report, cost = run.solve(run.problem, run.initial_trajectory())
    summary = run.write_outputs(run.problem, traj, report, cost)
    print(summary)
    return _exit_code(report.converged)


def _reproduce_fig4(run: RelaxationRun) -> int:
    """Solve on the coarse grid, refine, and continue with damping"""
    sweep_config = run.sweep_config
    if run.cfg.damping is None and "damping" not in (run.document.get("solver") or {}):
        sweep_config = replace(sweep_config, damping=FIG4_DAMPING)
    coarse_problem = build_fig4_problem(FIG4_COARSE_N)
    guess = run.initial_trajectory(coarse_problem)
    coarse, coarse_report, coarse_cost = run.solve(coarse_problem, guess, sweep_config)
    run.write_outputs(
        coarse_problem, coarse, coarse_report, coarse_cost, out=run.out / "coarse", sweep_config=sweep_config
    )
    print(f"fig4 coarse N={coarse.N}: cost {coarse_cost:.4f} after {coarse_report.iterations} iterations")

    fine_problem = coarse_problem.refined()
    traj, report, cost = run.solve(fine_problem, refine(coarse), sweep_config)
    stages = [_stage("coarse", coarse, coarse_report, coarse_cost), _stage("refined", traj, report, cost)]
    summary = run.write_outputs(fine_problem, traj, report, cost, sweep_config=sweep_config, stages=stages)
    print(summary)
    return _exit_code(coarse_report.converged and report.converged)


@reports_errors
def cmd_reproduce(cfg: RunConfig, figure: str) -> int:
    """Run the pipeline behind one of the three published figures"""
    reproducers = {"fig2": _reproduce_fig2, "fig3": _reproduce_fig3, "fig4": _reproduce_fig4}
    run = RelaxationRun(replace(cfg, problem=figure, config_path=None))
    return reproducers[figure](run)


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--problem", help=f"built-in problem: {', '.join(sorted(registry()))}")
    source.add_argument("--config", type=Path, help="YAML problem configuration")
    parser.add_argument("--N", type=int, help="number of segments")
    parser.add_argument("--T", type=float, help="time horizon")
    parser.add_argument("--rule", choices=[rule.value for rule in UpdateRule], help="update rule")
    parser.add_argument("--damping", type=float, help="damping coefficient in [0, 1)")
    parser.add_argument("--tol-factor", type=float, help="stop when max residual < tol-factor * h^2")
    parser.add_argument("--max-iter", type=int, help="iteration cap")
    parser.add_argument("--threads", type=int, help="parallel width of a sweep")
    parser.add_argument("--residual-norm", choices=[norm.value for norm in ResidualNorm], help="per-index norm")
    parser.add_argument("--guess", choices=["straight", "spline", "waypoints"], help="initial guess kind")
    parser.add_argument("--waypoints", help="polyline waypoints 'i:x,y;i:x,y'")
    parser.add_argument("--seed", type=int, help="seed of the guess perturbation")
    parser.add_argument("--perturb", type=float, help="perturbation amplitude (0.01 when --seed is given)")
    parser.add_argument("--out", type=Path, default=Path("output"), help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="navrelax", description="Parallel Jacobi relaxation of discrete navigation trajectories"
    )
    commands = parser.add_subparsers(dest="command", required=True)
    _add_run_options(commands.add_parser("solve", help="solve a problem from its initial guess"))
    refine_parser = commands.add_parser("refine", help="refine a trajectory CSV and continue iterating")
    refine_parser.add_argument("input", type=Path, help="trajectory CSV")
    _add_run_options(refine_parser)
    eval_parser = commands.add_parser("eval", help="cost and residual of a trajectory CSV")
    eval_parser.add_argument("input", type=Path, help="trajectory CSV")
    eval_parser.add_argument("--residuals", action="store_true", help="write per-index residuals")
    _add_run_options(eval_parser)
    reproduce_parser = commands.add_parser("reproduce", help="reproduce a published figure")
    reproduce_parser.add_argument("figure", choices=FIGURES)
    _add_run_options(reproduce_parser)
    return parser


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    problem = args.figure if args.command == "reproduce" else args.problem
    return RunConfig(
        problem=problem,
        config_path=None if args.command == "reproduce" else args.config,
        N=args.N,
        T=args.T,
        tol_factor=args.tol_factor,
        rule=None if args.rule is None else UpdateRule(args.rule),
        damping=args.damping,
        max_iterations=args.max_iter,
        threads=args.threads,
        residual_norm=None if args.residual_norm is None else ResidualNorm(args.residual_norm),
        guess=args.guess,
        waypoints=args.waypoints,
        seed=args.seed,
        perturb=args.perturb,
        out=args.out,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main function of the navrelax command line"""
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = run_config_from_args(args)
    except NavRelaxError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR
    if args.command == "solve":
        return cmd_solve(cfg)
    if args.command == "refine":
        return cmd_refine(cfg, args.input)
    if args.command == "eval":
        return cmd_eval(cfg, args.input, args.residuals)
    return cmd_reproduce(cfg, args.figure)


if __name__ == "__main__":
    sys.exit(main())

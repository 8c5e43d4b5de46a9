import csv
import json
from pathlib import Path

import numpy as np
import pytest
from conftest import line_trajectory

from application.config_loader import parse_waypoints, resolve_sweep_config
from application.main import EXIT_CONVERGED, EXIT_ERROR, EXIT_ITERATION_CAP, main
from application.run_types import ConfigError, RunConfig
from application.trajectory_io import read_trajectory_csv, write_trajectory_csv
from geometry.geometry_types import Vec2
from solver import ResidualNorm, SweepConfig, TrajectoryError, UpdateRule

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _summary(out: Path) -> dict:
    return json.loads((out / "summary.json").read_text())


def test_solve_writes_all_outputs(tmp_path):
    out = tmp_path / "run"
    assert main(["solve", "--problem", "free-particle", "--seed", "3", "--perturb", "0.1", "--out", str(out)]) == 0
    summary = _summary(out)
    assert summary["converged"]
    assert summary["iterations"] > 0
    assert summary["max_residual"] < summary["tolerance"]
    assert summary["cost"] == pytest.approx(1.0, rel=1e-6)
    traj = read_trajectory_csv(out / "trajectory.csv")
    assert traj.N == summary["N"] == 8
    with (out / "residuals.csv").open() as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == summary["iterations"] + 1
    assert float(rows[-1]["max_residual"]) == summary["max_residual"]


def test_iteration_cap_exits_with_two(tmp_path):
    argv = ["solve", "--problem", "free-particle", "--seed", "3", "--perturb", "0.1", "--max-iter", "2"]
    assert main(argv + ["--out", str(tmp_path)]) == EXIT_ITERATION_CAP
    assert not _summary(tmp_path)["converged"]


def test_unknown_problem_is_an_error(tmp_path, capsys):
    assert main(["solve", "--problem", "fig9", "--out", str(tmp_path)]) == EXIT_ERROR
    err = capsys.readouterr().err
    assert "Error: unknown problem 'fig9'" in err
    assert "free-particle" in err


def test_invalid_settings_are_errors(tmp_path, capsys):
    assert main(["solve", "--problem", "free-particle", "--damping", "1.5", "--out", str(tmp_path)]) == EXIT_ERROR
    assert "damping" in capsys.readouterr().err


def test_problem_and_config_are_exclusive():
    with pytest.raises(SystemExit):
        main(["solve", "--problem", "fig3", "--config", str(CONFIGS / "fig3.yaml")])


def test_eval_reproduces_the_reported_cost(tmp_path, capsys):
    out = tmp_path / "run"
    main(["solve", "--problem", "free-particle", "--seed", "1", "--perturb", "0.2", "--out", str(out)])
    capsys.readouterr()
    code = main(["eval", str(out / "trajectory.csv"), "--problem", "free-particle", "--out", str(tmp_path / "eval")])
    assert code == EXIT_CONVERGED
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("free-particle: cost ")
    assert float(lines[0].split("cost ")[1]) == _summary(out)["cost"]
    assert lines[1].startswith("max residual")


def test_eval_writes_per_index_residuals(tmp_path):
    path = write_trajectory_csv(line_trajectory((0.0, 0.0), (1.0, 1.0), 8, 0.125), tmp_path / "line.csv")
    assert main(["eval", str(path), "--residuals", "--problem", "free-particle", "--out", str(tmp_path)]) == 0
    with (tmp_path / "residuals_by_index.csv").open() as f:
        rows = list(csv.DictReader(f))
    assert [int(row["index"]) for row in rows] == list(range(1, 8))
    assert all(float(row["residual"]) < 1e-12 for row in rows)


def test_eval_warns_about_boundary_violations(tmp_path, capsys):
    path = write_trajectory_csv(line_trajectory((0.0, 0.5), (1.0, 1.0), 8, 0.125), tmp_path / "off.csv")
    assert main(["eval", str(path), "--problem", "free-particle", "--out", str(tmp_path)]) == 0
    assert "start is" in capsys.readouterr().err


def test_refine_doubles_the_grid(tmp_path):
    coarse = tmp_path / "coarse"
    fine = tmp_path / "fine"
    main(["solve", "--problem", "free-particle", "--seed", "2", "--perturb", "0.1", "--out", str(coarse)])
    code = main(["refine", str(coarse / "trajectory.csv"), "--problem", "free-particle", "--out", str(fine)])
    assert code == EXIT_CONVERGED
    traj = read_trajectory_csv(fine / "trajectory.csv")
    assert traj.N == 16
    assert traj.h == 0.0625
    np.testing.assert_allclose(traj.positions, np.linspace(0.0, 1.0, 17)[:, None] * [1.0, 1.0], atol=1e-4)


def test_config_file_run(tmp_path):
    code = main(["solve", "--config", str(CONFIGS / "free_particle.yaml"), "--out", str(tmp_path)])
    assert code == EXIT_CONVERGED
    summary = _summary(tmp_path)
    assert summary["N"] == 20
    assert summary["rule"] == "newton"
    assert summary["cost"] == pytest.approx(2.5, rel=1e-4)


def test_malformed_config_is_an_error(tmp_path):
    config = tmp_path / "bad.yaml"
    config.write_text("problem: [unbalanced\n")
    assert main(["solve", "--config", str(config), "--out", str(tmp_path)]) == EXIT_ERROR
    config.write_text("- just\n- a list\n")
    assert main(["solve", "--config", str(config), "--out", str(tmp_path)]) == EXIT_ERROR


def test_missing_trajectory_file_is_an_error(tmp_path):
    assert main(["eval", str(tmp_path / "nope.csv"), "--problem", "fig3"]) == EXIT_ERROR


def test_parse_waypoints():
    guess = parse_waypoints("40:3,3; 60:4.5,-1")
    assert guess.waypoints == ((40, Vec2(3.0, 3.0)), (60, Vec2(4.5, -1.0)))
    with pytest.raises(ConfigError):
        parse_waypoints("40:3")
    with pytest.raises(ConfigError):
        parse_waypoints(" ; ")


def test_solver_settings_layering():
    document = {"solver": {"rule": "exact", "threads": 4, "damping": 0.1}}
    cfg = RunConfig(problem="fig3", damping=0.2, residual_norm=ResidualNorm.INF)
    sweep = resolve_sweep_config(cfg, document)
    assert sweep.rule is UpdateRule.EXACT
    assert sweep.parallel_width == 4
    assert sweep.damping == 0.2
    assert sweep.residual_norm is ResidualNorm.INF
    assert resolve_sweep_config(RunConfig(problem="fig3")) == SweepConfig()
    with pytest.raises(ConfigError):
        resolve_sweep_config(cfg, {"solver": {"omega": 1.2}})
    with pytest.raises(ConfigError):
        resolve_sweep_config(cfg, {"solver": {"rule": "gauss-seidel"}})


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig()
    with pytest.raises(ConfigError):
        RunConfig(problem="fig3", config_path=Path("fig3.yaml"))
    with pytest.raises(ConfigError):
        RunConfig(problem="fig3", guess="waypoints")
    assert RunConfig(problem="fig3", seed=4).perturbation == 0.01
    assert RunConfig(problem="fig3").perturbation == 0.0


def test_trajectory_files_name_the_bad_line(tmp_path):
    path = write_trajectory_csv(line_trajectory((0.0, 0.0), (1.0, 1.0), 4, 0.25), tmp_path / "t.csv")
    lines = path.read_text().splitlines()
    lines[4] = "0.5,abc,1.0"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(TrajectoryError, match="line 5"):
        read_trajectory_csv(path)
    path.write_text("t,x,y\n0,0,0\n")
    with pytest.raises(TrajectoryError, match="line 1"):
        read_trajectory_csv(path)


def test_trajectory_files_check_the_sample_count(tmp_path):
    path = write_trajectory_csv(line_trajectory((0.0, 0.0), (1.0, 1.0), 4, 0.25), tmp_path / "t.csv")
    path.write_text(path.read_text().replace("N=4", "N=5"))
    with pytest.raises(TrajectoryError, match="N=5"):
        read_trajectory_csv(path)

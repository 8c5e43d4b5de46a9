"""
Plain-text artifacts of a run.

Trajectory files start with a `# kind=Q|TQ N=<int> h=<real> t0=<real>` line,
then a `t,x,y[,vx,vy]` header and one row per sample. Floats are written with
repr so reading a file back reproduces every value exactly.
"""

import csv
import json
import logging
import re
from pathlib import Path
from typing import Sequence

import numpy as np

from solver.solver_types import ResidualReport, Trajectory, TrajectoryError, TrajectoryKind

from .run_types import RunSummary

logger = logging.getLogger(__name__)

_META = re.compile(r"#\s*kind=(?P<kind>\w+)\s+N=(?P<N>\d+)\s+h=(?P<h>\S+)\s+t0=(?P<t0>\S+)\s*$")
_COLUMNS = {TrajectoryKind.Q: ["t", "x", "y"], TrajectoryKind.TQ: ["t", "x", "y", "vx", "vy"]}


def write_trajectory_csv(traj: Trajectory, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        f.write(f"# kind={traj.kind.value} N={traj.N} h={traj.h!r} t0={traj.t0!r}\n")
        writer = csv.writer(f)
        writer.writerow(_COLUMNS[traj.kind])
        for t, state in zip(traj.times, traj.states):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in state])
    logger.debug("Wrote %s to %s", traj, path)
    return path


def read_trajectory_csv(path: Path) -> Trajectory:
    """
    Read a trajectory written by write_trajectory_csv

    Raises:
        TrajectoryError: malformed content; the message names the line number
    """
    path = Path(path)
    with path.open(newline="") as f:
        lines = f.read().splitlines()
    if not lines:
        raise TrajectoryError(f"{path}: empty file")
    meta = _META.match(lines[0])
    if meta is None:
        raise TrajectoryError(f"{path}, line 1: expected '# kind=Q|TQ N=<int> h=<real> t0=<real>'")
    try:
        kind = TrajectoryKind(meta["kind"])
        h, t0 = float(meta["h"]), float(meta["t0"])
    except ValueError as exc:
        raise TrajectoryError(f"{path}, line 1: {exc}") from exc
    N = int(meta["N"])
    columns = _COLUMNS[kind]
    rows = list(csv.reader(lines[1:]))
    if not rows or [c.strip() for c in rows[0]] != columns:
        raise TrajectoryError(f"{path}, line 2: expected header {','.join(columns)}")
    states = []
    for number, row in enumerate(rows[1:], start=3):
        if not row:
            continue
        if len(row) != len(columns):
            raise TrajectoryError(f"{path}, line {number}: expected {len(columns)} fields, got {len(row)}")
        try:
            values = [float(v) for v in row]
        except ValueError as exc:
            raise TrajectoryError(f"{path}, line {number}: {exc}") from exc
        if not all(np.isfinite(values)):
            raise TrajectoryError(f"{path}, line {number}: non-finite value")
        states.append(values[1:])
    if len(states) != N + 1:
        raise TrajectoryError(f"{path}: header says N={N} but found {len(states)} samples")
    traj = Trajectory.from_states(kind, np.array(states), h, t0)
    logger.debug("Read %s from %s", traj, path)
    return traj


def write_residual_history(report: ResidualReport, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["iteration", "max_residual", "wall_seconds"])
        for iteration, (residual, seconds) in enumerate(zip(report.residuals, report.wall_seconds)):
            writer.writerow([iteration, repr(residual), repr(seconds)])
    return path


def write_index_residuals(norms: Sequence[float], path: Path) -> Path:
    """Per-index residual norms at the interior indices 1..N-1"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["index", "residual"])
        for index, value in enumerate(norms, start=1):
            writer.writerow([index, repr(float(value))])
    return path


def write_summary(summary: RunSummary, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as f:
        json.dump(summary.to_dict(), f, indent=2)
        f.write("\n")
    return path

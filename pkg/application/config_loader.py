import logging
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml

from geometry.geometry_types import Vec2
from problems.problem_types import ProblemSpec
from problems.registry import build_custom_problem, build_problem
from solver.solver_types import CubicSpline, PiecewiseLinear, ResidualNorm, StraightLine, SweepConfig, UpdateRule

from .run_types import ConfigError, RunConfig

logger = logging.getLogger(__name__)

SOLVER_KEYS = {
    "rule": "rule",
    "damping": "damping",
    "tol_factor": "tol_factor",
    "max_iterations": "max_iterations",
    "threads": "parallel_width",
    "residual_norm": "residual_norm",
    "report_every": "report_every",
}


def load_config_file(path: Path) -> Dict[str, Any]:
    """
    Parse a YAML problem configuration

    Raises:
        ConfigError: the document is not a mapping
        yaml.YAMLError: the document is not valid YAML
    """
    with Path(path).open() as f:
        document = yaml.safe_load(f)
    if document is None:
        document = {}
    if not isinstance(document, Mapping):
        raise ConfigError(f"{path}: top level must be a mapping of sections")
    logger.debug("Loaded config %s with sections %s", path, sorted(document))
    return dict(document)


def parse_waypoints(text: str) -> PiecewiseLinear:
    """Parse 'i:x,y;i:x,y' into a polyline guess"""
    waypoints = []
    for item in filter(None, (part.strip() for part in text.split(";"))):
        try:
            index, point = item.split(":")
            x, y = point.split(",")
            waypoints.append((int(index), Vec2(float(x), float(y))))
        except ValueError as exc:
            raise ConfigError(f"waypoint {item!r} is not of the form i:x,y") from exc
    if not waypoints:
        raise ConfigError("--waypoints needs at least one i:x,y entry")
    return PiecewiseLinear(tuple(waypoints))


def resolve_problem(cfg: RunConfig, document: Optional[Mapping[str, Any]] = None) -> ProblemSpec:
    """Problem named on the command line or described by the config file, with overrides applied"""
    spec = build_problem(cfg.problem) if cfg.problem is not None else build_custom_problem(document or {})
    if cfg.N is not None or cfg.T is not None:
        spec = spec.with_overrides(cfg.N, cfg.T)
    if cfg.guess == "straight":
        spec = replace(spec, guess=StraightLine())
    elif cfg.guess == "spline":
        spec = replace(spec, guess=CubicSpline(spec.knots.knots))
    elif cfg.guess == "waypoints":
        spec = replace(spec, guess=parse_waypoints(cfg.waypoints))
    return spec


def resolve_sweep_config(
    cfg: RunConfig, document: Optional[Mapping[str, Any]] = None, base: Optional[SweepConfig] = None
) -> SweepConfig:
    """
    Solver settings: defaults, then the config file's solver section, then flags

    Raises:
        ConfigError: unknown keys or values in the solver section
    """
    section = (document or {}).get("solver") or {}
    if not isinstance(section, Mapping):
        raise ConfigError("section 'solver' must be a mapping")
    unknown = set(section) - set(SOLVER_KEYS)
    if unknown:
        raise ConfigError(f"unknown solver settings {sorted(unknown)}; allowed: {sorted(SOLVER_KEYS)}")
    values = {SOLVER_KEYS[key]: value for key, value in section.items()}
    flags = {
        "rule": cfg.rule,
        "damping": cfg.damping,
        "tol_factor": cfg.tol_factor,
        "max_iterations": cfg.max_iterations,
        "parallel_width": cfg.threads,
        "residual_norm": cfg.residual_norm,
    }
    values.update({key: value for key, value in flags.items() if value is not None})
    try:
        if "rule" in values:
            values["rule"] = UpdateRule(values["rule"])
        if "residual_norm" in values:
            values["residual_norm"] = ResidualNorm(values["residual_norm"])
        return replace(base or SweepConfig(), **values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver settings: {exc}") from exc

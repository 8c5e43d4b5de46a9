from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from geometry.geometry_types import NavRelaxError
from solver.solver_types import ResidualNorm, UpdateRule


class ConfigError(NavRelaxError, ValueError):
    """Invalid command-line or config-file settings"""


@dataclass(frozen=True)
class RunConfig:
    """Class representing one command-line run: which problem, overrides and where outputs go"""

    problem: Optional[str] = None
    config_path: Optional[Path] = None
    N: Optional[int] = None
    T: Optional[float] = None
    tol_factor: Optional[float] = None
    rule: Optional[UpdateRule] = None
    damping: Optional[float] = None
    max_iterations: Optional[int] = None
    threads: Optional[int] = None
    residual_norm: Optional[ResidualNorm] = None
    guess: Optional[str] = None
    waypoints: Optional[str] = None
    seed: Optional[int] = None
    perturb: Optional[float] = None
    out: Path = Path("output")

    def __post_init__(self):
        if self.problem is None and self.config_path is None:
            raise ConfigError("give --problem or --config")
        if self.problem is not None and self.config_path is not None:
            raise ConfigError("--problem and --config are mutually exclusive")
        if self.N is not None and self.N < 2:
            raise ConfigError(f"N must be at least 2, got {self.N}")
        if self.T is not None and not self.T > 0.0:
            raise ConfigError(f"T must be positive, got {self.T}")
        if self.tol_factor is not None and not self.tol_factor > 0.0:
            raise ConfigError(f"tolerance factor must be positive, got {self.tol_factor}")
        if self.damping is not None and not 0.0 <= self.damping < 1.0:
            raise ConfigError(f"damping must lie in [0, 1), got {self.damping}")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ConfigError(f"max iterations must be non-negative, got {self.max_iterations}")
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")
        if self.perturb is not None and not self.perturb >= 0.0:
            raise ConfigError(f"perturbation amplitude must be non-negative, got {self.perturb}")
        if self.guess is not None and self.guess not in ("straight", "spline", "waypoints"):
            raise ConfigError(f"unknown guess {self.guess!r}; use straight, spline or waypoints")
        if (self.guess == "waypoints") != (self.waypoints is not None):
            raise ConfigError("--guess waypoints and --waypoints go together")

    @property
    def perturbation(self) -> float:
        """Amplitude of the seeded guess perturbation, 0.01 by default once a seed is given"""
        if self.perturb is not None:
            return self.perturb
        return 0.01 if self.seed is not None else 0.0


@dataclass
class RunSummary:
    """Outcome of a run, written as summary.json"""

    problem: str
    kind: str
    N: int
    h: float
    rule: str
    damping: float
    converged: bool
    iterations: int
    max_residual: float
    tolerance: float
    cost: float
    wall_seconds: float
    outputs: Dict[str, str] = field(default_factory=dict)
    stages: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def __str__(self) -> str:
        status = "converged" if self.converged else "NOT converged"
        return (
            f"{self.problem}: {status} after {self.iterations} iterations, cost {self.cost:.6f}, "
            f"max residual {self.max_residual:.3e} (tol {self.tolerance:.3e}), {self.wall_seconds:.2f}s"
        )

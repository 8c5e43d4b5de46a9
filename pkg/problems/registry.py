import logging
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from geometry.geometry_types import Vec2
from solver.solver_types import (
    Boundary,
    CubicSpline,
    GuessKind,
    KnotSet,
    PiecewiseLinear,
    StraightLine,
)

from .problem_types import LagrangianId, ProblemError, ProblemKind, ProblemSpec, WindSpec

logger = logging.getLogger(__name__)

ZERO = Vec2(0.0, 0.0)

# Zermelo travel time does not depend on the parametrisation; T only sets h
FIG2_HORIZON = 8.0
FIG2_N = 80

FIG3_HORIZON = 30.0
FIG3_N = 200

FIG4_HORIZON = 60.0
FIG4_N = 240
FIG4_COARSE_N = 120
FIG4_WEIGHT = 50.0
FIG4_KNOT_TIMES = ((20.0, Vec2(1.0, 3.0)), (40.0, Vec2(5.0, 2.0)))

# Polyline guesses with two to five segments on the N = 80 grid
FIG2_WAYPOINTS: Tuple[Tuple[Tuple[int, Tuple[float, float]], ...], ...] = (
    ((40, (3.0, -1.0)),),
    ((40, (3.0, 3.0)),),
    ((27, (0.5, 3.0)), (54, (4.0, 4.5))),
    ((20, (2.0, -0.5)), (40, (4.0, 0.0)), (60, (6.0, 0.5))),
    ((16, (1.0, 1.5)), (32, (3.0, 3.5)), (48, (5.0, 3.5)), (64, (6.5, 3.0))),
    ((20, (1.5, 0.0)), (40, (3.0, 1.5)), (60, (4.5, 3.0))),
)


def _knots_at(times: Sequence[Tuple[float, Vec2]], T: float, N: int) -> KnotSet:
    h = T / N
    knots = []
    for time, point in times:
        index = time / h
        if abs(index - round(index)) > 1e-9 * max(1.0, index):
            raise ProblemError(f"knot time {time:g} is not on the grid with N={N}, T={T:g}")
        knots.append((int(round(index)), point))
    return KnotSet(tuple(knots))


def build_fig2_problem(guess: Optional[GuessKind] = None) -> ProblemSpec:
    """Minimum-time navigation through four rotational bumps from (0,0) to (6,2)"""
    return ProblemSpec(
        name="fig2",
        lagrangian=LagrangianId.ZERMELO,
        wind=WindSpec("zermelo"),
        T=FIG2_HORIZON,
        N=FIG2_N,
        boundary=Boundary(Vec2(0.0, 0.0), Vec2(6.0, 2.0)),
        guess=guess,
    )


def fig2_guesses() -> List[PiecewiseLinear]:
    return [PiecewiseLinear(tuple((i, Vec2(*p)) for i, p in waypoints)) for waypoints in FIG2_WAYPOINTS]


def build_fig3_problem() -> ProblemSpec:
    """Minimum-fuel crossing of the fuel current in fixed time T = 30"""
    return ProblemSpec(
        name="fig3",
        lagrangian=LagrangianId.FUEL,
        wind=WindSpec("fuel"),
        T=FIG3_HORIZON,
        N=FIG3_N,
        boundary=Boundary(Vec2(0.0, 0.0), Vec2(6.0, 5.0)),
        guess=StraightLine(),
    )


def build_fig4_problem(N: int = FIG4_N) -> ProblemSpec:
    """
    Second-order interpolation problem with control-variation penalty c = 50

    Args:
        N: 240 for the final grid, 120 for the pre-refinement run

    Returns:
        Problem from (0,0) at rest to (3,5) at rest in T = 60, through
        (1,3) at t = 20 and (5,2) at t = 40
    """
    knots = _knots_at(FIG4_KNOT_TIMES, FIG4_HORIZON, N)
    return ProblemSpec(
        name="fig4" if N == FIG4_N else f"fig4-n{N}",
        lagrangian=LagrangianId.SECOND_ORDER_TV,
        wind=WindSpec("fuel"),
        T=FIG4_HORIZON,
        N=N,
        boundary=Boundary(Vec2(0.0, 0.0), Vec2(3.0, 5.0), ZERO, ZERO),
        knots=knots,
        c=FIG4_WEIGHT,
        guess=CubicSpline(knots.knots),
    )


def build_fig4_coarse_problem() -> ProblemSpec:
    return build_fig4_problem(FIG4_COARSE_N)


def build_free_particle_problem(
    N: int = 8, start: Vec2 = Vec2(0.0, 0.0), end: Vec2 = Vec2(1.0, 1.0), T: float = 1.0
) -> ProblemSpec:
    """Kinetic-energy problem whose solution is the equally spaced segment"""
    return ProblemSpec(
        name="free-particle",
        lagrangian=LagrangianId.FREE_PARTICLE,
        wind=WindSpec("calm"),
        T=T,
        N=N,
        boundary=Boundary(start, end),
        guess=StraightLine(),
    )


_REGISTRY: Dict[str, Callable[[], ProblemSpec]] = {
    "fig2": build_fig2_problem,
    "fig3": build_fig3_problem,
    "fig4": build_fig4_problem,
    "fig4-coarse": build_fig4_coarse_problem,
    "free-particle": build_free_particle_problem,
}


def registry() -> Dict[str, Callable[[], ProblemSpec]]:
    return dict(_REGISTRY)


def build_problem(name: str) -> ProblemSpec:
    """
    Build a registered problem by name

    Raises:
        ProblemError: unknown name; the message lists the available ones
    """
    try:
        builder = _REGISTRY[name]
    except KeyError:
        raise ProblemError(f"unknown problem {name!r}; available: {', '.join(sorted(_REGISTRY))}") from None
    spec = builder()
    logger.debug("Built %s", spec)
    return spec


def _point(value: Any, what: str) -> Vec2:
    try:
        x, y = value
        return Vec2(float(x), float(y))
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"{what} must be a pair of numbers, got {value!r}") from exc


def _section(config: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    value = config.get(key) or {}
    if not isinstance(value, Mapping):
        raise ProblemError(f"section {key!r} must be a mapping")
    return value


def _wind_spec(section: Mapping[str, Any], default: str) -> WindSpec:
    expressions = section.get("expressions")
    if expressions is not None:
        if not isinstance(expressions, Mapping) or set(expressions) != {"w1", "w2"}:
            raise ProblemError("wind expressions need exactly the keys w1 and w2")
        return WindSpec(builtin=None, w1=str(expressions["w1"]), w2=str(expressions["w2"]))
    return WindSpec(builtin=str(section.get("builtin", default)))


def _indexed(entries: Sequence[Mapping[str, Any]], what: str) -> Tuple[Tuple[int, Vec2], ...]:
    points = []
    for n, entry in enumerate(entries):
        if "index" not in entry or "position" not in entry:
            raise ProblemError(f"{what} entry {n} needs 'index' and 'position'")
        points.append((int(entry["index"]), _point(entry["position"], f"{what} {n} position")))
    return tuple(points)


def _guess(value: Any, knots: KnotSet) -> Optional[GuessKind]:
    if value is None:
        return None
    if value == "straight":
        return StraightLine()
    if value == "spline":
        return CubicSpline(knots.knots)
    if isinstance(value, Mapping) and "waypoints" in value:
        return PiecewiseLinear(_indexed(value["waypoints"], "waypoint"))
    raise ProblemError(f"guess must be 'straight', 'spline' or a waypoints mapping, got {value!r}")


def build_custom_problem(config: Mapping[str, Any]) -> ProblemSpec:
    """
    Build a problem from a parsed configuration document

    A `problem.name` selects a registered problem and the remaining problem
    keys override it; otherwise `problem.lagrangian` and the wind, boundary
    and knots sections define a new one.

    Raises:
        ProblemError: missing or malformed sections
    """
    section = _section(config, "problem")
    if "name" in section and "lagrangian" not in section:
        spec = build_problem(str(section["name"]))
        spec = spec.with_overrides(section.get("N"), section.get("T"))
        if "guess" in config:
            spec = spec.with_overrides(guess=_guess(config["guess"], spec.knots))
        return spec

    if "lagrangian" not in section:
        raise ProblemError("problem section needs either 'name' or 'lagrangian'")
    try:
        lagrangian = LagrangianId(section["lagrangian"])
    except ValueError:
        available = ", ".join(item.value for item in LagrangianId)
        raise ProblemError(f"unknown lagrangian {section['lagrangian']!r}; available: {available}") from None
    for key in ("N", "T"):
        if key not in section:
            raise ProblemError(f"problem section needs {key!r}")
    N, T = int(section["N"]), float(section["T"])
    t0 = float(section.get("t0", 0.0))

    b = _section(config, "boundary")
    if "start" not in b or "end" not in b:
        raise ProblemError("boundary section needs 'start' and 'end'")
    velocities = [b.get("start_velocity"), b.get("end_velocity")]
    if lagrangian.kind is ProblemKind.SECOND_ORDER:
        velocities = [ZERO if v is None else _point(v, "boundary velocity") for v in velocities]
    elif any(v is not None for v in velocities):
        raise ProblemError(f"{lagrangian.value} problems take no boundary velocities")
    boundary = Boundary(_point(b["start"], "boundary start"), _point(b["end"], "boundary end"), *velocities)

    knot_entries = config.get("knots") or []
    knot_times = []
    for n, entry in enumerate(knot_entries):
        if "time" not in entry or "position" not in entry:
            raise ProblemError(f"knot entry {n} needs 'time' and 'position'")
        knot_times.append((float(entry["time"]) - t0, _point(entry["position"], f"knot {n} position")))
    knots = _knots_at(knot_times, T, N)

    spec = ProblemSpec(
        name=str(section.get("name", "custom")),
        lagrangian=lagrangian,
        wind=_wind_spec(_section(config, "wind"), default="calm"),
        T=T,
        N=N,
        boundary=boundary,
        knots=knots,
        c=float(section.get("c", 0.0)),
        t0=t0,
        guess=_guess(config.get("guess"), knots),
    )
    # parse expression winds now so syntax errors surface before solving
    spec.wind_field
    logger.debug("Built custom problem %s", spec)
    return spec

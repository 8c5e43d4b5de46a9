# Problem definitions: built-in configurations, custom problems and their costs
from .evaluate import evaluate_cost
from .problem_types import BUILTIN_WINDS, LagrangianId, ProblemError, ProblemKind, ProblemSpec, WindSpec
from .registry import (
    build_custom_problem,
    build_fig2_problem,
    build_fig3_problem,
    build_fig4_coarse_problem,
    build_fig4_problem,
    build_free_particle_problem,
    build_problem,
    fig2_guesses,
    registry,
)

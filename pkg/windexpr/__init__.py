# Wind component expressions: parsing, evaluation and derivatives
from .expr_eval import (
    DualValue,
    differentiate,
    eval_dual,
    evaluate,
    validate_differentiable,
    wind_from_expressions,
)
from .expr_parser import parse, render
from .expr_types import (
    Expr,
    ExprDomainError,
    ExprError,
    ExprSyntaxError,
    ExprValidationError,
    UnknownIdentifierError,
)

import math
from dataclasses import dataclass, field
from typing import FrozenSet, Union

from geometry.geometry_types import NavRelaxError

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs")
VARIABLES = ("x", "y")
CONSTANTS = ("pi",)


class ExprError(NavRelaxError, ValueError):
    """Base class for expression errors"""


class ExprSyntaxError(ExprError):
    """Malformed expression text"""

    def __init__(self, message: str, offset: int, expected: FrozenSet[str]):
        self.offset = offset
        self.expected = expected
        wanted = ", ".join(sorted(expected))
        super().__init__(f"{message} at byte {offset} (expected one of: {wanted})")


class UnknownIdentifierError(ExprError):
    """Identifier that is neither x, y, pi nor a known function"""

    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at byte {offset}")


class ExprDomainError(ExprError, ArithmeticError):
    """Evaluation left the domain of an operation"""

    def __init__(self, reason: str, offset: int, fragment: str):
        self.reason = reason
        self.offset = offset
        self.fragment = fragment
        super().__init__(f"{reason} in {fragment!r} at byte {offset}")


class ExprValidationError(ExprError):
    """Expression is not usable where derivatives are required"""


@dataclass(frozen=True)
class Num:
    """Literal as written in source: finite and unsigned; negation is a Unary node"""

    value: float
    offset: int = field(default=0, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.value) or math.copysign(1.0, self.value) < 0.0:
            raise ValueError(f"literal must be finite and unsigned, got {self.value!r}; wrap it in Unary(\"-\", ...)")


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Const:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"
    offset: int = field(default=0, compare=False)


Expr = Union[Num, Var, Const, Unary, Binary, Call]

import logging
import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from geometry import jets
from geometry.geometry_types import Vec2, WindField
from geometry.jets import Jet, value_of

from .expr_parser import parse, render
from .expr_types import (
    Binary,
    Call,
    Const,
    Expr,
    ExprDomainError,
    ExprValidationError,
    Num,
    Unary,
    Var,
)

logger = logging.getLogger(__name__)

_CONSTANT_VALUES = {"pi": math.pi}


@dataclass(frozen=True)
class DualValue:
    """Value of an expression with its partial derivatives in (x, y)"""

    value: float
    gradient: np.ndarray
    hessian: Optional[np.ndarray] = None


def depends_on_variables(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, (Num, Const)):
        return False
    if isinstance(e, Unary):
        return depends_on_variables(e.operand)
    if isinstance(e, Binary):
        return depends_on_variables(e.left) or depends_on_variables(e.right)
    return depends_on_variables(e.arg)


def _domain(reason: str, node: Expr) -> ExprDomainError:
    return ExprDomainError(reason, node.offset, render(node))


def _is_integral(p: Any) -> bool:
    p = np.asarray(p)
    return bool(np.all(p == np.round(p)))


def evaluate(e: Expr, x: Any, y: Any) -> Any:
    """
    Evaluate an expression tree

    Args:
        e: Expression tree
        x, y: Floats, numpy arrays or Jets

    Returns:
        The value, of the same kind as the inputs (a float for constant trees)

    Raises:
        ExprDomainError: log/sqrt of negative values, division by zero, or a
            non-integer power of a negative base
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        return _CONSTANT_VALUES[e.name]
    if isinstance(e, Var):
        return x if e.name == "x" else y
    if isinstance(e, Unary):
        return -evaluate(e.operand, x, y)
    if isinstance(e, Binary):
        left = evaluate(e.left, x, y)
        right = evaluate(e.right, x, y)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        if e.op == "/":
            if np.any(value_of(right) == 0.0):
                raise _domain("division by zero", e)
            return left / right
        return _power(e, left, right)
    return _call(e, evaluate(e.arg, x, y))


def _power(node: Binary, base: Any, exponent: Any) -> Any:
    b = value_of(base)
    if isinstance(exponent, Jet):
        if np.any(b <= 0.0):
            raise _domain("variable exponent needs a positive base", node)
        return base**exponent
    if np.any(b < 0.0) and not _is_integral(exponent):
        raise _domain("non-integer power of a negative base", node)
    if np.any(b == 0.0) and np.any(np.asarray(exponent) < 0.0):
        raise _domain("division by zero", node)
    if isinstance(base, Jet):
        if np.any(b == 0.0) and not _is_integral(exponent) and float(exponent) < 2.0:
            raise _domain("power not differentiable at zero", node)
        return base ** float(exponent)
    result = np.power(b, exponent)
    return result if np.ndim(result) else float(result)


def _call(node: Call, arg: Any) -> Any:
    a = value_of(arg)
    if node.func == "log" and np.any(a <= 0.0):
        raise _domain("log of a non-positive value", node)
    if node.func == "sqrt":
        if np.any(a < 0.0):
            raise _domain("sqrt of a negative value", node)
        if isinstance(arg, Jet) and np.any(a == 0.0):
            raise _domain("sqrt not differentiable at zero", node)
    if node.func == "abs" and isinstance(arg, Jet) and np.any(a == 0.0):
        raise _domain("abs not differentiable at zero", node)
    func = jets.absolute if node.func == "abs" else getattr(jets, node.func)
    result = func(arg)
    return result if isinstance(result, Jet) or np.ndim(result) else float(result)


def eval_dual(e: Expr, p: Vec2, order: int = 1) -> DualValue:
    """
    Evaluate an expression with its partial derivatives by forward differentiation

    Args:
        e: Expression tree
        p: Evaluation point
        order: 1 for value and gradient, 2 to add the Hessian

    Returns:
        DualValue with gradient (d/dx, d/dy) and, for order 2, the Hessian
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    x, y = Jet.variables([p.x, p.y], order=order)
    result = evaluate(e, x, y)
    if not isinstance(result, Jet):
        return DualValue(float(result), np.zeros(2), np.zeros((2, 2)) if order == 2 else None)
    hessian = np.array(result.hess, dtype=float) if order == 2 else None
    return DualValue(float(result.value), np.array(result.grad, dtype=float), hessian)


# symbolic differentiation, folding the trivial 0 and 1 cases


def _is_num(e: Expr, value: float) -> bool:
    return isinstance(e, Num) and e.value == value


def _add(a: Expr, b: Expr, at: int) -> Expr:
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    return Binary("+", a, b, at)


def _sub(a: Expr, b: Expr, at: int) -> Expr:
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return Unary("-", b, at)
    return Binary("-", a, b, at)


def _mul(a: Expr, b: Expr, at: int) -> Expr:
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0, at)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    return Binary("*", a, b, at)


def _div(a: Expr, b: Expr, at: int) -> Expr:
    if _is_num(a, 0.0):
        return Num(0.0, at)
    return Binary("/", a, b, at)


def differentiate(e: Expr, var: str) -> Expr:
    """Return the tree of the partial derivative of e with respect to var"""
    at = e.offset
    if isinstance(e, (Num, Const)):
        return Num(0.0, at)
    if isinstance(e, Var):
        return Num(1.0 if e.name == var else 0.0, at)
    if isinstance(e, Unary):
        d = differentiate(e.operand, var)
        return d if _is_num(d, 0.0) else Unary("-", d, at)
    if isinstance(e, Binary):
        u, w = e.left, e.right
        du, dw = differentiate(u, var), differentiate(w, var)
        if e.op == "+":
            return _add(du, dw, at)
        if e.op == "-":
            return _sub(du, dw, at)
        if e.op == "*":
            return _add(_mul(du, w, at), _mul(u, dw, at), at)
        if e.op == "/":
            return _sub(_div(du, w, at), _div(_mul(u, dw, at), Binary("*", w, w, at), at), at)
        if not depends_on_variables(w):
            reduced = Binary("^", u, Binary("-", w, Num(1.0, at), at), at)
            return _mul(_mul(w, reduced, at), du, at)
        log_part = _mul(dw, Call("log", u, at), at)
        ratio_part = _div(_mul(w, du, at), u, at)
        return _mul(e, _add(log_part, ratio_part, at), at)
    u = e.arg
    du = differentiate(u, var)
    if _is_num(du, 0.0):
        return Num(0.0, at)
    if e.func == "sin":
        outer = Call("cos", u, at)
    elif e.func == "cos":
        outer = Unary("-", Call("sin", u, at), at)
    elif e.func == "tan":
        outer = Binary("+", Num(1.0, at), Binary("^", Call("tan", u, at), Num(2.0, at), at), at)
    elif e.func == "exp":
        outer = e
    elif e.func == "log":
        return _div(du, u, at)
    elif e.func == "sqrt":
        return _div(du, Binary("*", Num(2.0, at), e, at), at)
    else:
        raise ExprValidationError(f"abs of a variable-dependent argument is not differentiable: {render(e)}")
    return _mul(outer, du, at)


def validate_differentiable(e: Expr) -> None:
    """Reject abs applied to anything that depends on x or y"""
    if isinstance(e, Call):
        if e.func == "abs" and depends_on_variables(e.arg):
            raise ExprValidationError(
                f"abs over a variable-dependent argument at byte {e.offset} is not C2: {render(e)}"
            )
        validate_differentiable(e.arg)
    elif isinstance(e, Unary):
        validate_differentiable(e.operand)
    elif isinstance(e, Binary):
        validate_differentiable(e.left)
        validate_differentiable(e.right)


def _broadcast(value: Any, like: Any) -> Any:
    # constant trees evaluate to plain floats; give them the batch shape
    if isinstance(value, Jet) or isinstance(like, Jet):
        return value
    return value + 0.0 * value_of(like) if np.ndim(like) else value


def wind_from_expressions(w1: str, w2: str, name: str = "custom") -> WindField:
    """
    Build a wind field from component expressions

    Args:
        w1: Expression for the x component
        w2: Expression for the y component
        name: Field name used in logs and summaries

    Returns:
        WindField whose Jacobian components are the symbolic derivatives
    """
    trees = (parse(w1), parse(w2))
    for tree in trees:
        validate_differentiable(tree)
    partials = tuple((differentiate(t, "x"), differentiate(t, "y")) for t in trees)
    logger.debug("wind %s: W1=%s W2=%s", name, render(trees[0]), render(trees[1]))

    def components(x, y):
        return tuple(_broadcast(evaluate(t, x, y), x) for t in trees)

    def jacobian_components(x, y):
        return tuple(tuple(_broadcast(evaluate(d, x, y), x) for d in row) for row in partials)

    return WindField(name, components, jacobian_components)

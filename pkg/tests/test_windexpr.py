import math

import numpy as np
import pytest
from conftest import assert_close_to_fd, fd_gradient
from hypothesis import given
from hypothesis import strategies as st

from geometry.geometry_types import Vec2
from geometry.wind_fields import fuel_wind
from windexpr import (
    ExprDomainError,
    ExprSyntaxError,
    ExprValidationError,
    UnknownIdentifierError,
    differentiate,
    eval_dual,
    evaluate,
    parse,
    render,
    validate_differentiable,
    wind_from_expressions,
)
from windexpr.expr_types import Binary, Num, Unary, Var


def test_evaluates_the_fuel_component():
    assert evaluate(parse("cos(2*x - y - 6)"), 0.0, 0.0) == pytest.approx(0.9601703, abs=1e-7)
    assert evaluate(parse("x + y"), 0.0, 0.0) == 0.0


def test_power_binds_tighter_than_product():
    assert parse("2*x^3") == Binary("*", Num(2.0), Binary("^", Var("x"), Num(3.0)))


def test_power_is_right_associative_and_above_unary_minus():
    assert evaluate(parse("2^3^2"), 0.0, 0.0) == 512.0
    assert evaluate(parse("-x^2"), 3.0, 0.0) == -9.0
    assert evaluate(parse("2^-1"), 0.0, 0.0) == 0.5


def test_whitespace_is_insignificant():
    assert parse(" sin( x ) *\t2 ") == parse("sin(x)*2")


def test_constant_pi():
    assert evaluate(parse("cos(pi)"), 0.0, 0.0) == pytest.approx(-1.0)


@pytest.mark.parametrize(
    "src, offset, expected",
    [
        ("x +", 3, "<number>"),
        ("2 * (x", 6, ")"),
        ("x y", 2, "+"),
        ("1,5", 1, "+"),
    ],
)
def test_syntax_errors_name_offset_and_expected_tokens(src, offset, expected):
    with pytest.raises(ExprSyntaxError) as err:
        parse(src)
    assert err.value.offset == offset
    assert expected in err.value.expected


def test_syntax_error_offsets_count_utf8_bytes():
    # each no-break space is two bytes
    with pytest.raises(ExprSyntaxError) as err:
        parse("x\u00a0+\u00a0$")
    assert err.value.offset == 6


def test_numbers_use_ascii_digits_only():
    # ARABIC-INDIC DIGIT THREE
    with pytest.raises(ExprSyntaxError) as err:
        parse("x + \u0663")
    assert err.value.offset == 4


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as err:
        parse("x + foo(y)")
    assert err.value.name == "foo"
    assert err.value.offset == 4


@pytest.mark.parametrize(
    "src, x, fragment",
    [
        ("log(x)", 0.0, "log(x)"),
        ("1 / (x - 1)", 1.0, "(1.0 / (x - 1.0))"),
        ("sqrt(x)", -1.0, "sqrt(x)"),
        ("x^0.5", -2.0, "(x ^ 0.5)"),
    ],
)
def test_domain_errors_name_the_subexpression(src, x, fragment):
    with pytest.raises(ExprDomainError) as err:
        evaluate(parse(src), x, 0.0)
    assert err.value.fragment == fragment


def test_domain_error_offset_points_at_the_operator():
    with pytest.raises(ExprDomainError) as err:
        evaluate(parse("y + 1/x"), 0.0, 1.0)
    assert err.value.offset == 5


def test_integer_power_of_negative_base_is_allowed():
    assert evaluate(parse("x^3"), -2.0, 0.0) == -8.0


def test_eval_dual_examples():
    d = eval_dual(parse("x*x"), Vec2(3.0, 0.0))
    assert d.value == 9.0
    assert d.gradient[0] == 6.0

    d = eval_dual(parse("sin(x)"), Vec2(0.0, 0.0), order=2)
    assert d.value == 0.0
    assert d.gradient[0] == 1.0
    assert d.hessian[0, 0] == 0.0

    d = eval_dual(parse("cos(2*x-y-6)"), Vec2(0.0, 0.0))
    assert d.gradient[1] == pytest.approx(0.2794155, abs=1e-7)


def test_eval_dual_of_constant_tree():
    d = eval_dual(parse("2*pi"), Vec2(1.0, 1.0), order=2)
    assert d.value == pytest.approx(2 * math.pi)
    np.testing.assert_array_equal(d.gradient, [0.0, 0.0])
    np.testing.assert_array_equal(d.hessian, np.zeros((2, 2)))


def test_eval_dual_rejects_other_orders():
    with pytest.raises(ValueError):
        eval_dual(parse("x"), Vec2(0.0, 0.0), order=3)


# a small grammar of expressions that are smooth on the whole plane
_leaves = st.sampled_from(["x", "y", "0.5", "2", "1.25", "pi"])


def _extend(children):
    binary = st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})")
    unary = st.tuples(
        st.sampled_from(
            ["sin({})", "cos({})", "exp(sin({}))", "sqrt(1 + sin({})^2)", "log(2 + cos({}))", "-({})", "sin({})^2"]
        ),
        children,
    ).map(lambda t: t[0].format(t[1]))
    quotient = st.tuples(children, children).map(lambda t: f"({t[0]}) / (2 + sin({t[1]}))")
    return binary | unary | quotient


expressions = st.recursive(_leaves, _extend, max_leaves=6)
sample_points = st.tuples(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))


@given(expressions, sample_points)
def test_gradients_of_random_expressions_match_finite_differences(src, point):
    tree = parse(src)
    d = eval_dual(tree, Vec2(*point))
    numeric = fd_gradient(lambda p: float(evaluate(tree, p[0], p[1])), np.array(point))
    assert_close_to_fd(d.gradient, numeric)


@given(expressions, sample_points)
def test_symbolic_derivatives_agree_with_forward_differentiation(src, point):
    tree = parse(src)
    d = eval_dual(tree, Vec2(*point))
    symbolic = [float(evaluate(differentiate(tree, v), *point)) for v in ("x", "y")]
    np.testing.assert_allclose(symbolic, d.gradient, rtol=1e-9, atol=1e-9)


@given(expressions)
def test_render_parses_back_to_the_same_tree(src):
    tree = parse(src)
    assert parse(render(tree)) == tree


def test_abs_is_rejected_over_variables_only():
    with pytest.raises(ExprValidationError):
        validate_differentiable(parse("1 + abs(x - y)"))
    validate_differentiable(parse("abs(-2) * x"))


def test_expression_wind_matches_the_builtin_fuel_field():
    field = wind_from_expressions("cos(2*x - y - 6)", "(2/3)*sin(y) + x - 3")
    builtin = fuel_wind()
    for p in (Vec2(0.0, 0.0), Vec2(3.0, 0.0), Vec2(1.7, -2.2)):
        a, b = field.eval(p), builtin.eval(p)
        assert a.x == pytest.approx(b.x, abs=1e-14)
        assert a.y == pytest.approx(b.y, abs=1e-14)
        np.testing.assert_allclose(field.jacobian(p), builtin.jacobian(p), atol=1e-14)
        np.testing.assert_allclose(field.second_partials(p), builtin.second_partials(p), atol=1e-13)


def test_constant_expression_wind_broadcasts_over_batches():
    field = wind_from_expressions("0.5", "0")
    w1, w2 = field.lift(np.zeros(4), np.ones(4))
    assert np.shape(w1) == (4,)
    assert np.shape(w2) == (4,)
    np.testing.assert_array_equal(field.jacobian(Vec2(1.0, 2.0)), np.zeros((2, 2)))


def test_expression_wind_rejects_abs_of_variables():
    with pytest.raises(ExprValidationError):
        wind_from_expressions("abs(x)", "0")


@pytest.mark.parametrize("value", [-2.0, -0.0, math.inf, math.nan])
def test_literals_are_finite_and_unsigned(value):
    with pytest.raises(ValueError):
        Num(value)


def test_negated_literals_render_back_to_the_same_tree():
    tree = Binary("*", Unary("-", Num(2.5)), Var("x"))
    assert render(tree) == "((-2.5) * x)"
    assert parse(render(tree)) == tree

from fractions import Fraction

import pytest
from hypothesis import given, settings

from sgv.errors import ExpressionError
from sgv.expr import evaluate, parse_poly
from strategies import C11, C22, polys


def test_odd_squares_normalize_at_parse_time():
    assert parse_poly("theta^2 + x", C11) == C11.var("x")
    assert parse_poly("theta*theta", C11) == C11.zero()


def test_rationals_and_precedence():
    x = C11.var("x")
    assert parse_poly("1/2*x^2 - (x - 3)/3", C11) == (x ** 2).scale(Fraction(1, 2)) - x.scale(Fraction(1, 3)) + 1


def test_ordering_sign():
    assert parse_poly("t2*t1", C22) == -parse_poly("t1*t2", C22)


@pytest.mark.parametrize(
    "text",
    ["x ** 2", "x^theta", "x/theta", "x/0", "y + 1", "x.real", "lambda: 1", "1.5*x", "f(x)", "x^-1", "(x"],
)
def test_rejects(text):
    with pytest.raises(ExpressionError):
        parse_poly(text, C11)


@settings(max_examples=80, deadline=None)
@given(polys(C22, 3, max_terms=5))
def test_print_parse_round_trip(f):
    assert parse_poly(str(f), C22).terms == f.terms


def test_function_calls_need_a_table():
    double = lambda p: p.scale(2)
    assert evaluate("double(x) + 1", C11, {}, {"double": double}) == C11.var("x").scale(2) + 1
    with pytest.raises(ExpressionError):
        evaluate("triple(x)", C11, {}, {"double": double})


def test_names_from_environment_shadow_nothing_else():
    env = {"f": C11.var("x") * C11.var("theta")}
    assert evaluate("f*x", C11, env, {}) == C11.var("x") ** 2 * C11.var("theta")

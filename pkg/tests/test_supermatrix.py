import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgv.errors import NotInvertibleError, ParityError
from sgv.expr import parse_poly
from sgv.grassmann import Chart
from sgv.supermatrix import CoordinateChange, SuperMatrix, berezinian, det_even, substitute
from strategies import C11, C22, homogeneous, nilpotent_even

E2 = Chart.from_spec([("x", "even"), ("y", "even")])


def change(chart, **images):
    imgs = {n: parse_poly(images.get(n, n), chart) for n in chart.names}
    return CoordinateChange(chart, chart, imgs)


def test_identity_berezinian():
    assert CoordinateChange.identity(C22).berezinian() == C22.one()
    assert berezinian(SuperMatrix.identity(C22, C22.parities)) == C22.one()


def test_even_chart_gives_determinant():
    c = change(E2, x="2*x + y", y="x + 3*y")
    assert c.berezinian() == parse_poly("5", E2)
    rows = [[parse_poly("2", E2), parse_poly("1", E2)], [parse_poly("1", E2), parse_poly("3", E2)]]
    assert det_even(rows, E2) == parse_poly("5", E2)


def test_substitution_example():
    c = change(C11, theta="theta + x*theta")
    f = parse_poly("theta*x", C11)
    assert substitute(f, c) == parse_poly("x*theta + x^2*theta", C11)
    assert substitute(C11.var("x"), CoordinateChange.identity(C11)) == C11.var("x")


def test_rescaling_odd_variables_divides():
    c = change(C22, t1="2*t1", t2="3*t2", x1="5*x1")
    assert c.berezinian() == parse_poly("5/6", C22)


def test_non_polynomial_inverse_rejected():
    c = change(C11, theta="theta + x^2*theta")
    with pytest.raises(NotInvertibleError):
        c.berezinian()


def test_image_parity_checked():
    with pytest.raises(ParityError):
        change(C11, x="theta")


@settings(max_examples=40, deadline=None)
@given(homogeneous(C22), homogeneous(C22))
def test_substitute_is_a_homomorphism(f, g):
    c = change(C22, x1="x1 + x2*t1*t2", t1="t1 + x1*t2", t2="t2 - t1")
    assert substitute(f * g, c) == substitute(f, c) * substitute(g, c)


shears = st.tuples(nilpotent_even(C22), nilpotent_even(C22))


@settings(max_examples=25, deadline=None)
@given(shears, shears)
def test_berezinian_is_multiplicative(s1, s2):
    a = change(C22, x1="2*x1 + x2", x2="x1 + x2")
    a = CoordinateChange(C22, C22, {**a.images, "x1": a.images["x1"] + s1[0], "x2": a.images["x2"] + s1[1]})
    b = change(C22, t1="t1 - t2", t2="-t1 + 2*t2")
    b = CoordinateChange(C22, C22, {**b.images, "x1": b.images["x1"] + s2[0]})
    assert a.then(b).berezinian() == a.berezinian() * substitute(b.berezinian(), a)

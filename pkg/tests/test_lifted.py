import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgv.errors import JacobiError
from sgv.geometry import StructureTensor, VectorField, hamiltonian_field
from sgv.lifted import (
    LiftedChart,
    canonical_bracket,
    is_poisson_field,
    is_poisson_field_direct,
    lift_vector_field,
    sl_differential,
)
from strategies import C11, C22, homogeneous

LIFTS = {shift: LiftedChart(C11, shift) for shift in (False, True)}
SETTINGS = settings(max_examples=40, deadline=None)


def sign(e):
    return -1 if e % 2 else 1


@pytest.mark.parametrize("shift", [False, True])
def test_fibre_pairs_with_base(shift):
    lc = LIFTS[shift]
    for a in range(len(C11)):
        assert canonical_bracket(lc, lc.fiber(a), lc.chart.coords()[a]) == lc.chart.one()


def lifted_pair(shift):
    chart = LIFTS[shift].chart
    return st.tuples(st.just(shift), homogeneous(chart, 2), homogeneous(chart, 2), homogeneous(chart, 2))


@SETTINGS
@given(st.sampled_from([False, True]).flatmap(lifted_pair))
def test_graded_antisymmetry_and_jacobi(args):
    shift, F, G, K = args
    lc, e = LIFTS[shift], int(shift)
    fp, gp = int(F.parity), int(G.parity)
    br = lambda a, b: canonical_bracket(lc, a, b)
    assert br(F, G) == -br(G, F).scale(sign((fp + e) * (gp + e)))
    assert br(F, br(G, K)) == br(br(F, G), K) + br(G, br(F, K)).scale(sign((fp + e) * (gp + e)))


def test_even_function_of_low_momentum_degree_commutes_with_itself():
    lc = LIFTS[False]
    x, t, px, pt = lc.chart.coords()
    F = x * px + t * pt + x ** 2
    assert canonical_bracket(lc, F, F) == lc.chart.zero()


def test_darboux_lift_squares_to_zero():
    S = StructureTensor.darboux(C22, [("x1", "t1"), ("x2", "t2")])
    lc = S.lifted_chart
    assert canonical_bracket(lc, S.lifted, S.lifted) == lc.chart.zero()
    assert sl_differential(lc, S.lifted, lc.chart.one()) == lc.chart.zero()


def test_differential_refuses_broken_tensor():
    T = StructureTensor.from_named(C22, "odd_poisson", {("x1", "t1"): C22.one(), ("x2", "t2"): C22.one(),
                                                         ("t1", "t2"): C22.var("x1") * C22.var("t1")})
    with pytest.raises(JacobiError):
        sl_differential(T.lifted_chart, T.lifted, T.lifted_chart.chart.one())


def test_hamiltonian_fields_are_poisson_and_others_are_not():
    S = StructureTensor.darboux(C11, [("x", "theta")])
    x, t = C11.coords()
    for f in (x, t, x * t, x ** 2):
        X = hamiltonian_field(S, f)
        assert is_poisson_field(S, X)
        assert is_poisson_field_direct(S, X) == (True, None)
    assert is_poisson_field(S, VectorField.from_named(C11, {"theta": x}, 1))  # x d/dtheta = X of x^2/2, up to sign
    Y = VectorField.from_named(C11, {"x": x}, 0)  # x d/dx rescales {theta, x} = 1
    assert not is_poisson_field(S, Y)
    ok, pair = is_poisson_field_direct(S, Y)
    assert not ok and pair is not None
    assert lift_vector_field(S.lifted_chart, Y) != S.lifted_chart.chart.zero()

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgv.errors import ParityError, SGVError
from sgv.geometry import (
    GeometryKind,
    StructureTensor,
    VectorField,
    apply_field,
    bracket,
    bracket_direct,
    bracket_lifted,
    check_jacobi,
    field_commutator,
    hamiltonian_field,
    hamiltonian_potential,
    is_casimir,
    jacobiator,
)
from strategies import C11, C22, homogeneous

from corpus import BROKEN, DARBOUX11, DARBOUX22, E1, E2, EVEN_POISSON, LINE, LINEAR, QUADRATIC_POISSON, TENSORS, named


def pairs_for(T):
    return st.tuples(st.just(T), homogeneous(T.chart, 2), homogeneous(T.chart, 2))


@settings(max_examples=120, deadline=None)
@given(st.sampled_from(TENSORS).flatmap(pairs_for))
def test_three_bracket_formulas_agree(args):
    T, f, g = args
    b = bracket(T, f, g)
    assert b == bracket_direct(T, f, g) == bracket_lifted(T, f, g)


@settings(max_examples=120, deadline=None)
@given(st.sampled_from(TENSORS).flatmap(pairs_for))
def test_bracket_symmetry(args):
    T, f, g = args
    s = T.kind.bracket_symmetry(int(f.parity), int(g.parity))
    assert bracket(T, f, g) == bracket(T, g, f).scale(s)


def test_darboux_signs():
    x, t = C11.coords()
    assert bracket(DARBOUX11, t, x) == C11.one()
    assert bracket(DARBOUX11, x, t) == -C11.one()
    assert bracket(DARBOUX11, C11.one(), x) == C11.zero()


def test_riemannian_examples():
    x = E1.var("x")
    assert bracket(LINE, x ** 2, x ** 3) == (x ** 3).scale(6)
    assert hamiltonian_field(LINE, x ** 2) == VectorField(E1, (x.scale(2),), 0)
    assert str(LINE.lifted) == "1/2*p_x^2"


def test_hamiltonian_field_of_x():
    X = hamiltonian_field(DARBOUX11, C11.var("x"))
    assert int(X.parity) == 1
    assert X.named() == {"theta": C11.one()}
    assert hamiltonian_field(DARBOUX11, C11.one()).is_zero()


def test_darboux_lift_degree_and_parity():
    lc = DARBOUX11.lifted_chart
    assert int(DARBOUX11.lifted.parity) == 1
    assert lc.momentum_degree(DARBOUX11.lifted) == 2
    assert StructureTensor(C11, GeometryKind.ODD_POISSON, {}).lifted == lc.chart.zero()


def test_symmetry_auto_completion_and_conflicts():
    x, t = C11.coords()
    T = named(C11, "odd_poisson", theta_x="x")
    assert T.entry(1, 0) == x and T.entry(0, 1) == x
    P = named(E2, "even_poisson", x_y="x")
    assert P.entry(1, 0) == -E2.var("x")
    with pytest.raises(SGVError, match="conflicting explicit partner"):
        StructureTensor.from_named(C11, "odd_poisson", {("theta", "x"): x, ("x", "theta"): -x})


def test_entry_parity_enforced():
    with pytest.raises(ParityError):
        named(C22, "odd_poisson", t1_t2="x1")
    with pytest.raises(ParityError):
        named(C11, "even_riemannian", x_theta="1")


@pytest.mark.parametrize("T", [DARBOUX11, DARBOUX22, LINEAR, EVEN_POISSON, QUADRATIC_POISSON])
def test_jacobi_holds(T):
    r = check_jacobi(T)
    assert r.ok and r.scan_ok and r.lifted_ok


def test_jacobi_broken_with_witness():
    r = check_jacobi(BROKEN)
    assert not r.ok and not r.scan_ok and not r.lifted_ok
    f, g, h = (C22.var(n) for n in r.witness)
    assert jacobiator(BROKEN, f, g, h) == r.value != C22.zero()


def test_jacobiator_examples():
    x, t = C11.coords()
    assert jacobiator(LINEAR, t, t, x) == C11.zero()
    for f, g, h in itertools.product(C22.coords(), repeat=3):
        assert jacobiator(DARBOUX22, f, g, h) == C22.zero()


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([DARBOUX22, LINEAR, QUADRATIC_POISSON]).flatmap(pairs_for))
def test_hamiltonian_fields_close(args):
    T, f, g = args
    assert hamiltonian_field(T, bracket(T, f, g)) == field_commutator(hamiltonian_field(T, f), hamiltonian_field(T, g))


def test_casimirs():
    assert is_casimir(DARBOUX11, C11.one().scale(5))
    assert not is_casimir(DARBOUX11, C11.var("x"))
    zero = StructureTensor(C11, GeometryKind.ODD_POISSON, {})
    assert is_casimir(zero, C11.var("x"))


def test_apply_field_on_even_line():
    X = VectorField(E1, (E1.one(),), 0)
    assert apply_field(X, E1.var("x") ** 2) == E1.var("x").scale(2)


@settings(max_examples=30, deadline=None)
@given(homogeneous(C22, 3))
def test_potential_recovers_hamiltonian(f):
    X = hamiltonian_field(DARBOUX22, f)
    g = hamiltonian_potential(DARBOUX22, X, 3)
    assert g is not None and is_casimir(DARBOUX22, g - f)


def test_potential_of_non_hamiltonian_field():
    x = C11.var("x")
    assert hamiltonian_potential(DARBOUX11, VectorField(C11, (x, C11.zero()), 0), 4) is None

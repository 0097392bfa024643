from fractions import Fraction

import pytest
from hypothesis import given, settings

from sgv.errors import SGVError
from sgv.expr import parse_poly
from sgv.geometry import bracket, is_casimir
from sgv.groupoid import (
    GroupoidArrow,
    arrow_valid,
    compose,
    identity_arrow,
    invert,
    lambda_counterexample,
    lambda_residual,
    orbit_invariant_check,
)
from sgv.harness import probe_basis
from sgv.laplace import VolumeForm, cocycle_H
from sgv.manifest import parse_manifest
from corpus import BROKEN, DARBOUX11, DARBOUX22, EVEN_POISSON, E2
from strategies import C11, C22, polys

HALF = Fraction(1, 2)


def P(text, chart=C22):
    return parse_poly(text, chart)


def test_shipped_arrows():
    m = parse_manifest("darboux22")
    assert arrow_valid(m.arrows["a"]) == (True, C22.zero())
    ok, res = arrow_valid(m.arrows["bad"])
    assert not ok and res == P("2*t2")


def test_compose_and_invert():
    m = parse_manifest("darboux22")
    a, b = m.arrows["a"], m.arrows["b"]
    ab = compose(a, b)
    assert ab.source == a.source and ab.target == b.target
    assert arrow_valid(ab)[0]
    back = invert(ab)
    assert back.source == ab.target and arrow_valid(back)[0]
    assert compose(ab, back).shift == C22.zero()


def test_compose_rejects_mismatched_endpoints():
    m = parse_manifest("darboux22")
    with pytest.raises(SGVError, match="not composable"):
        compose(m.arrows["b"], m.arrows["a"])


def test_invalid_arrows_are_refused():
    m = parse_manifest("darboux22")
    with pytest.raises(SGVError):
        invert(m.arrows["bad"])


def test_identity_arrow():
    rho = VolumeForm(C22, P("x1*x2"))
    assert arrow_valid(identity_arrow(DARBOUX22, rho))[0]


def test_jacobi_is_required():
    a = GroupoidArrow(BROKEN, VolumeForm.coordinate(C22), P("x1"))
    with pytest.raises(SGVError, match="Jacobi"):
        arrow_valid(a)


def test_even_poisson_has_no_cocycle():
    a = GroupoidArrow(EVEN_POISSON, VolumeForm.coordinate(E2), parse_poly("x", E2))
    with pytest.raises(SGVError):
        arrow_valid(a)


@settings(max_examples=30, deadline=None)
@given(polys(C22, 2, parity=0), polys(C22, 2, parity=0))
def test_validity_matches_cocycle(sigma, tau):
    rho = VolumeForm(C22, sigma)
    a = GroupoidArrow(DARBOUX22, rho, tau)
    ok, res = arrow_valid(a)
    assert res == cocycle_H(DARBOUX22, rho.shifted(tau), rho)
    assert ok == (not res)


def test_casimirs():
    assert is_casimir(DARBOUX22, C22.one().scale(3))
    assert not is_casimir(DARBOUX22, P("x1"))


def test_lambda_half_is_exceptional():
    rho = VolumeForm.coordinate(C22)
    basis = [P("x1"), P("t1*t2")]
    for lam in (Fraction(1, 4), Fraction(1), Fraction(2)):
        cex = lambda_counterexample(DARBOUX22, rho, lam, basis)
        assert cex is not None
        assert not lambda_residual(DARBOUX22, rho, cex.sigma, lam)
        assert lambda_residual(DARBOUX22, rho, cex.sigma + cex.tau, lam) == cex.residual
        assert cex.residual == bracket(DARBOUX22, cex.sigma, cex.tau).scale(1 - 2 * lam)
    assert lambda_counterexample(DARBOUX22, rho, HALF, basis) is None


def test_odd_modulus_scenario():
    m = parse_manifest("odd_modulus")
    T, a = m.geometry(), m.arrows["modulus"]
    rep = orbit_invariant_check(T, a, probe_basis(m.chart, 2))
    nu = m.chart.var("nu")
    assert rep.cocycle == nu
    assert rep.get("modular_fields_equal").ok
    assert rep.get("cocycle_is_casimir").ok
    half = rep.get("half_density_laplacians_equal")
    assert half.ok is False
    assert half.witness == "probe 1: target - source = -1/2*nu"


def test_orbit_check_on_valid_arrow():
    a = GroupoidArrow(DARBOUX11, VolumeForm.coordinate(C11), parse_poly("x", C11))
    rep = orbit_invariant_check(DARBOUX11, a, probe_basis(C11, 2))
    assert rep.ok and not rep.cocycle

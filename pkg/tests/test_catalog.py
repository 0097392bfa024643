from dataclasses import replace

from sgv.catalog import CASE_IDS, CATALOG, generated_arrows
from sgv.geometry import GeometryKind, jacobiator
from sgv.groupoid import arrow_valid
from sgv.harness import Context, run_suite, structures_of
from sgv.manifest import parse_manifest

EXPECTED_IDS = [
    "LIFT_QUADRATIC", "BRACKET_LIFT", "HAMILTONIAN_FIELD", "FIELD_OF_BRACKET", "FIELD_OF_PRODUCT",
    "LIE_ON_FUNCTIONS", "LIE_COMMUTATOR", "LAPLACE_DIVERGENCE", "DIVERGENCE_PRODUCT", "LAPLACE_COORDINATES",
    "BRACKET_DERIVATION", "LAPLACE_FIELD_COMMUTATOR", "PRODUCT_RULE", "FUNCTION_COMMUTATOR", "POWER_RULE",
    "EXPONENTIAL_RULE", "VOLUME_CHANGE", "DARBOUX_DECOMPOSITION", "CANONICAL_HALF_DENSITY", "BV_LEMMA",
    "HALF_DENSITY_PRODUCT", "MODULAR_HAMILTONIAN", "HALF_DENSITY_LIE", "HALF_DENSITY_COMMUTATOR",
    "MODULAR_DERIVATION", "MODULAR_SHIFT", "MODULAR_FIELD_PROPERTIES", "JACOBI", "SL_DIFFERENTIAL",
    "COCYCLE_DEFINITION", "COCYCLE_IDENTITY", "COCYCLE_ANTISYMMETRY", "COCYCLE_ADDITIVITY", "MASTER_GROUPOID",
    "LAMBDA_EXCEPTIONAL", "HALF_DENSITY_COMMUTATOR_POISSON", "HALF_DENSITY_NORMALIZATION", "HALF_DENSITY_SHIFT",
    "ORBIT_INVARIANTS", "WEIGHT_DENSITY_LAPLACIAN", "WEIGHT_COMMUTATOR", "WEIGHT_VOLUME_CHANGE",
    "RIEMANN_LAPLACE", "RIEMANN_PRODUCT", "RIEMANN_EXPONENTIAL", "RIEMANN_VOLUME_CHANGE", "RIEMANN_WEIGHT",
    "RIEMANN_HALF_COMMUTATOR", "RIEMANN_HALF_SHIFT", "RIEMANN_GROUPOID", "GEOMETRY_TABLE",
]


def test_catalog_ids_are_fixed():
    assert list(CASE_IDS) == EXPECTED_IDS
    assert len(set(CASE_IDS)) == len(CASE_IDS)


def test_every_case_is_described():
    for case in CATALOG:
        assert case.equation_ref and case.applicable_kinds
        assert case.applicable_kinds <= set(GeometryKind)


def test_every_case_applies_somewhere_in_the_corpus():
    kinds = {s.kind for p in ("darboux11", "even_poisson_r2", "riemann_line", "odd_riemann11")
             for s in structures_of(parse_manifest(p))}
    assert kinds == set(GeometryKind)


def test_jacobi_witness_is_sound():
    m = parse_manifest("jacobi_broken")
    [r] = run_suite(structures_of(m), ["JACOBI"], max_degree=1)
    names = r.witness.probe.strip("()").split(", ")
    f, g, h = (m.chart.var(n) for n in names)
    assert str(jacobiator(m.geometry(), f, g, h)) == r.witness.lhs
    assert r.witness.lhs != "0"


def test_generated_arrows_are_plentiful_and_valid():
    [s] = structures_of(parse_manifest("darboux22"))
    arrows = generated_arrows(Context(s, 2))
    assert len(arrows) >= 10
    assert all(arrow_valid(a)[0] for _, a in arrows)
    assert "bad" not in dict(arrows)


def test_odd_riemannian_column():
    reports = run_suite(structures_of(parse_manifest("odd_riemann11")), ["all"], max_degree=2)
    got = {r.case: r.status for r in reports}
    assert got["RIEMANN_LAPLACE"] == "pass" and got["GEOMETRY_TABLE"] == "pass"
    assert got["PRODUCT_RULE"] == "skipped"


def test_shipped_corpus_has_only_the_declared_failure():
    fails = []
    for p in ("darboux11", "linear_schouten11", "even_poisson_r2", "riemann_mixed12", "jacobi_broken"):
        for r in run_suite(structures_of(parse_manifest(p)), ["all"], max_degree=2):
            if r.status == "fail":
                fails.append((r.structure, r.case))
    assert fails == [("jacobi_broken:S", "JACOBI")]


def test_checks_can_fail():
    # the odd Poisson volume-change law has the opposite sign for even brackets
    [case] = [c for c in CATALOG if c.id == "VOLUME_CHANGE"]
    widened = replace(case, applicable_kinds=frozenset(GeometryKind))
    [r] = run_suite(structures_of(parse_manifest("even_poisson_r2")), ["all"], catalog=[widened], max_degree=2)
    assert r.status == "fail" and r.witness.lhs != r.witness.rhs

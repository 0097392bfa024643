import pytest

from sgv.errors import SGVError
from sgv.harness import (
    IdentityCase,
    IdentityReport,
    Skip,
    Witness,
    default_max_degree,
    probe_basis,
    report_json,
    report_text,
    run_suite,
    select_cases,
    structures_of,
    summarize,
)
from sgv.catalog import CATALOG, RIEMANNIAN
from sgv.manifest import parse_manifest
from strategies import C02, C11


def test_probe_basis_order():
    assert [str(p) for p in probe_basis(C11, 2)] == ["1", "x", "theta", "x^2", "x*theta"]
    assert [str(p) for p in probe_basis(C02, 3)] == ["1", "t1", "t2", "t1*t2"]
    assert [str(p) for p in probe_basis(C11, 0)] == ["1"]


def test_max_degree_from_environment(monkeypatch):
    monkeypatch.delenv("SGV_MAX_DEGREE", raising=False)
    assert default_max_degree() == 3
    monkeypatch.setenv("SGV_MAX_DEGREE", "2")
    assert default_max_degree() == 2
    for bad in ("-1", "two"):
        monkeypatch.setenv("SGV_MAX_DEGREE", bad)
        with pytest.raises(SGVError):
            default_max_degree()


def test_darboux_run_passes_and_skips_other_columns():
    reports = run_suite(structures_of(parse_manifest("darboux11")), ["all"], max_degree=2)
    assert len(reports) == len(CATALOG)
    by_case = {r.case: r for r in reports}
    assert all(r.status != "fail" for r in reports)
    for case in CATALOG:
        if case.applicable_kinds <= RIEMANNIAN:
            assert by_case[case.id].status == "skipped"
            assert "not applicable" in by_case[case.id].reason
    assert by_case["LAPLACE_COORDINATES"].status == "pass"


def test_broken_jacobi_fails_with_witness_and_skips_dependents():
    reports = run_suite(structures_of(parse_manifest("jacobi_broken")),
                        ["JACOBI", "BRACKET_DERIVATION", "PRODUCT_RULE"], max_degree=2)
    by_case = {r.case: r for r in reports}
    j = by_case["JACOBI"]
    assert j.status == "fail"
    assert j.witness.probe == "(x1, t1, t2)" and j.witness.lhs == "-x1"
    assert by_case["BRACKET_DERIVATION"].status == "skipped"
    assert "Jacobi" in by_case["BRACKET_DERIVATION"].reason
    assert by_case["PRODUCT_RULE"].status == "pass"
    assert summarize(reports)["unexpected"] == 1
    assert summarize(reports, {"JACOBI": "fail"})["unexpected"] == 0
    assert summarize(reports, {("jacobi_broken:S", "JACOBI"): "fail"})["unexpected"] == 0


def test_declared_outcome_that_does_not_happen_counts():
    reports = run_suite(structures_of(parse_manifest("darboux11")), ["JACOBI"], max_degree=1)
    assert summarize(reports, {"JACOBI": "fail"})["unexpected"] == 1


def test_empty_selection():
    reports = run_suite(structures_of(parse_manifest("darboux11")), [], max_degree=1)
    assert reports == []
    assert summarize(reports) == {"pass": 0, "fail": 0, "skipped": 0, "total": 0, "unexpected": 0}
    assert '"reports": []' in report_json(reports)


def test_unknown_suite():
    with pytest.raises(SGVError, match="unknown suite"):
        select_cases(CATALOG, ["NOPE"])


def test_selection_keeps_catalog_semantics():
    assert [c.id for c in select_cases(CATALOG, ["JACOBI", "BV_LEMMA", "JACOBI"])] == ["JACOBI", "BV_LEMMA"]


def test_schedules_agree():
    structures = structures_of(parse_manifest("darboux11"))
    sel = ["PRODUCT_RULE", "JACOBI", "MODULAR_SHIFT", "RIEMANN_LAPLACE"]
    a = run_suite(structures, sel, max_degree=2)
    b = run_suite(structures, sel, max_degree=2, schedule="permuted")
    assert report_json(a) == report_json(b)
    with pytest.raises(SGVError):
        run_suite(structures, sel, schedule="random")


def test_report_contract():
    with pytest.raises(ValueError):
        IdentityReport("X", "s", "fail", None, "ref")
    with pytest.raises(ValueError):
        IdentityReport("X", "s", "skipped", None, "ref")
    r = IdentityReport("X", "s", "fail", Witness("p", "1", "0"), "ref")
    text = report_text([r])
    assert "witness.probe: p" in text and text.endswith("summary: pass=0 fail=1 skipped=0 total=1 unexpected=1\n")


def test_checker_outcomes_map_to_statuses():
    structures = structures_of(parse_manifest("darboux11"))
    cases = [
        IdentityCase("OK", "", frozenset({structures[0].kind}), lambda ctx: None),
        IdentityCase("SKIP", "", frozenset({structures[0].kind}), lambda ctx: Skip("why")),
        IdentityCase("BAD", "", frozenset({structures[0].kind}), lambda ctx: Witness("p", "a", "b")),
    ]
    got = {r.case: r.status for r in run_suite(structures, ["all"], catalog=cases, max_degree=1)}
    assert got == {"OK": "pass", "SKIP": "skipped", "BAD": "fail"}

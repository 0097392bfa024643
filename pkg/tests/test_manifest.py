import copy
import json

import pytest

from sgv.errors import ManifestError
from sgv.manifest import load_manifest_data, parse_manifest, shipped_manifest_path, shipped_manifests

BASE = {
    "name": "tiny",
    "chart": [{"name": "x", "parity": "even"}, {"name": "theta", "parity": "odd"}],
    "darboux": [["x", "theta"]],
    "geometries": {"S": {"kind": "odd_poisson", "entries": {"x,theta": "1"}}},
    "volumes": {"rho0": "0", "rho1": "x"},
}


def variant(**changes):
    data = copy.deepcopy(BASE)
    data.update(changes)
    return data


def test_symmetric_partner_is_filled_in():
    m = load_manifest_data(BASE)
    T = m.geometry()
    assert T.entry(0, 1) == m.chart.one()
    assert T.entry(1, 0) == m.chart.one()
    assert T.entry(0, 0) == m.chart.zero()


def test_default_volume_and_suites():
    data = variant()
    del data["volumes"]
    m = load_manifest_data(data)
    assert list(m.volumes) == ["Dx"]
    assert m.suites == ("all",)


def test_odd_log_density_is_rejected():
    with pytest.raises(ManifestError, match="volume log-density must be even") as err:
        load_manifest_data(variant(volumes={"bad": "theta"}))
    assert err.value.location == "volumes.bad"


def test_conflicting_partner_is_rejected():
    geo = {"S": {"kind": "odd_poisson", "entries": {"x,theta": "1", "theta,x": "-x"}}}
    with pytest.raises(ManifestError) as err:
        load_manifest_data(variant(geometries=geo))
    assert err.value.location == "geometries.S"


@pytest.mark.parametrize(
    "changes, where",
    [
        ({"denominators": ["x"]}, "denominators"),
        ({"extra": 1}, None),
        ({"volumes": {"v": "1/x"}}, "volumes.v"),
        ({"volumes": {"v": "y"}}, "volumes.v"),
        ({"geometries": {"S": {"kind": "kahler"}}}, "geometries.S.kind"),
        ({"geometries": {"S": {"kind": "odd_poisson", "entries": {"x,x": "x"}}}}, "geometries.S"),
        ({"darboux": [["theta", "x"]]}, "darboux"),
        ({"arrows": {"a": {"source": "nowhere", "shift": "x"}}}, "arrows.a.source"),
        ({"arrows": {"a": {"source": "rho0", "shift": "theta"}}}, "arrows.a.shift"),
        ({"expect": {"JACOBI": "maybe"}}, "expect.JACOBI"),
        ({"chart": [{"name": "x", "parity": "even"}, {"name": "x", "parity": "odd"}]}, "chart"),
    ],
)
def test_invalid_manifests(changes, where):
    with pytest.raises(ManifestError) as err:
        load_manifest_data(variant(**changes))
    assert err.value.location == where


def test_missing_file(tmp_path):
    with pytest.raises(ManifestError):
        parse_manifest(tmp_path / "absent.json")


def test_file_round_trip(tmp_path):
    p = tmp_path / "tiny.json"
    p.write_text(json.dumps(BASE))
    m = parse_manifest(p)
    assert m.name == "tiny" and m.darboux == (("x", "theta"),)


@pytest.mark.parametrize("path", shipped_manifests(), ids=lambda p: p.stem)
def test_every_shipped_manifest_loads(path):
    m = parse_manifest(path)
    assert m.geometries
    assert shipped_manifest_path(path.stem) == path


def test_shipped_manifests_by_name():
    assert parse_manifest("jacobi_broken").expect == {"JACOBI": "fail"}


def test_lower_triangle_entry_is_completed():
    geo = {"S": {"kind": "odd_poisson", "entries": {"theta,x": "x"}}}
    m = load_manifest_data(variant(geometries=geo))
    x = m.chart.var("x")
    assert m.geometry().entry(0, 1) == x and m.geometry().entry(1, 0) == x


def test_parity_mismatch_message_names_the_entry():
    geo = {"S": {"kind": "odd_poisson", "entries": {"theta,x": "theta"}}}
    with pytest.raises(ManifestError, match=r"tensor entry \(theta,x\) parity mismatch for kind odd_poisson"):
        load_manifest_data(variant(geometries=geo))

"""JSON manifests: a chart, structures on it, volume forms, functions, changes, arrows.

Schema (all keys except ``chart`` optional)::

    {
      "name": "darboux11",
      "chart": [{"name": "x", "parity": "even"}, {"name": "theta", "parity": "odd"}],
      "darboux": [["x", "theta"]],
      "geometries": {"S": {"kind": "odd_poisson", "entries": {"theta,x": "1"}}},
      "volumes": {"rho0": "0", "rho1": "x"},
      "functions": {"f": "x*theta"},
      "changes": {"swap": {"x": "...", "theta": "..."}},
      "arrows": {"a": {"geometry": "S", "source": "rho0", "shift": "x"}},
      "suites": ["all"],
      "expect": {"JACOBI": "fail"},
      "denominators": []
    }

Tensor entries are keyed ``"a,b"``; the partner ``"b,a"`` is filled in by the
kind's symmetry rule.  Change images default to the identity.  ``expect``
marks statuses that are the intended outcome for this manifest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .errors import ExpressionError, ManifestError, SGVError
from .expr import parse_poly
from .geometry import GeometryKind, StructureTensor
from .grassmann import Chart, Parity, SuperPoly
from .groupoid import GroupoidArrow
from .laplace import VolumeForm, darboux_pairs_valid
from .supermatrix import CoordinateChange

STATUSES = ("pass", "fail", "skipped")
_KNOWN_KEYS = {
    "name", "description", "chart", "darboux", "geometries", "volumes", "functions",
    "changes", "arrows", "suites", "expect", "denominators",
}


@dataclass(frozen=True)
class Manifest:
    name: str
    chart: Chart
    darboux: tuple[tuple[str, str], ...]
    geometries: Mapping[str, StructureTensor]
    volumes: Mapping[str, VolumeForm]
    functions: Mapping[str, SuperPoly]
    changes: Mapping[str, CoordinateChange]
    arrows: Mapping[str, GroupoidArrow]
    suites: tuple[str, ...] = ("all",)
    expect: Mapping[str, str] = field(default_factory=dict)
    source: str | None = None

    def geometry(self, name: str | None = None) -> StructureTensor:
        if name is None:
            if not self.geometries:
                raise SGVError(f"manifest {self.name} declares no geometry")
            return next(iter(self.geometries.values()))
        try:
            return self.geometries[name]
        except KeyError:
            raise SGVError(f"unknown geometry {name!r}; have {sorted(self.geometries)}") from None


def _poly(text: Any, chart: Chart, where: str) -> SuperPoly:
    if isinstance(text, int) and not isinstance(text, bool):
        text = str(text)
    if not isinstance(text, str):
        raise ManifestError(f"expected an expression string, got {type(text).__name__}", where)
    try:
        return parse_poly(text, chart)
    except ExpressionError as exc:
        raise ManifestError(str(exc), where) from None


def _mapping(raw: Any, where: str) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ManifestError("expected an object", where)
    return raw


def _chart(raw: Any) -> Chart:
    if not isinstance(raw, list) or not raw:
        raise ManifestError("chart must be a non-empty list of {name, parity}", "chart")
    spec = []
    for i, item in enumerate(raw):
        where = f"chart[{i}]"
        if not isinstance(item, dict) or "name" not in item or "parity" not in item:
            raise ManifestError("each variable needs 'name' and 'parity'", where)
        name = item["name"]
        if not isinstance(name, str) or not name.isidentifier():
            raise ManifestError(f"variable name {name!r} is not an identifier", where)
        try:
            parity = Parity.parse(item["parity"])
        except SGVError:
            raise ManifestError(f"parity must be 'even' or 'odd', got {item['parity']!r}", where) from None
        spec.append((name, parity))
    names = [n for n, _ in spec]
    if len(set(names)) != len(names):
        raise ManifestError("duplicate variable names", "chart")
    return Chart.from_spec(spec)


def _geometry(name: str, raw: Any, chart: Chart) -> StructureTensor:
    where = f"geometries.{name}"
    raw = _mapping(raw, where)
    try:
        kind = GeometryKind(raw.get("kind"))
    except ValueError:
        raise ManifestError(
            f"kind must be one of {[k.value for k in GeometryKind]}, got {raw.get('kind')!r}", f"{where}.kind"
        ) from None
    entries = {}
    for key, text in _mapping(raw.get("entries"), f"{where}.entries").items():
        ewhere = f"{where}.entries[{key!r}]"
        parts = [p.strip() for p in str(key).split(",")]
        if len(parts) != 2:
            raise ManifestError("entry keys look like 'a,b'", ewhere)
        for p in parts:
            if p not in chart.names:
                raise ManifestError(f"undeclared variable {p!r}", ewhere)
        entries[(parts[0], parts[1])] = _poly(text, chart, ewhere)
    try:
        return StructureTensor.from_named(chart, kind, entries)
    except SGVError as exc:
        raise ManifestError(str(exc), where) from None


def load_manifest_data(data: Any, source: str | None = None) -> Manifest:
    if not isinstance(data, dict):
        raise ManifestError("top level must be an object", source)
    unknown = sorted(set(data) - _KNOWN_KEYS)
    if unknown:
        raise ManifestError(f"unknown keys {unknown}", source)
    if data.get("denominators"):
        raise ManifestError("declared denominators (localization) are not supported", "denominators")
    chart = _chart(data.get("chart"))
    name = data.get("name") or (Path(source).stem if source else "manifest")

    pairs = []
    for i, pair in enumerate(data.get("darboux") or []):
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(p, str) for p in pair)):
            raise ManifestError("each Darboux pair is [even_name, odd_name]", f"darboux[{i}]")
        for p in pair:
            if p not in chart.names:
                raise ManifestError(f"undeclared variable {p!r}", f"darboux[{i}]")
        pairs.append(tuple(pair))
    if pairs:
        try:
            darboux_pairs_valid(chart, pairs)
        except SGVError as exc:
            raise ManifestError(str(exc), "darboux") from None

    geometries = {g: _geometry(g, raw, chart) for g, raw in _mapping(data.get("geometries"), "geometries").items()}

    volumes = {}
    for v, text in _mapping(data.get("volumes"), "volumes").items():
        where = f"volumes.{v}"
        sigma = _poly(text, chart, where)
        if sigma and (not sigma.is_homogeneous() or sigma.parity != 0):
            raise ManifestError(f"volume log-density must be even, got {sigma}", where)
        volumes[v] = VolumeForm(chart, sigma)
    if not volumes:
        volumes["Dx"] = VolumeForm.coordinate(chart)

    functions = {f: _poly(t, chart, f"functions.{f}") for f, t in _mapping(data.get("functions"), "functions").items()}

    changes = {}
    for c, raw in _mapping(data.get("changes"), "changes").items():
        where = f"changes.{c}"
        images = {n: chart.var(n) for n in chart.names}
        for var, text in _mapping(raw, where).items():
            if var not in chart.names:
                raise ManifestError(f"undeclared variable {var!r}", where)
            images[var] = _poly(text, chart, f"{where}.{var}")
        try:
            changes[c] = CoordinateChange(chart, chart, images)
        except SGVError as exc:
            raise ManifestError(str(exc), where) from None

    arrows = {}
    for a, raw in _mapping(data.get("arrows"), "arrows").items():
        where = f"arrows.{a}"
        raw = _mapping(raw, where)
        gname = raw.get("geometry") or (next(iter(geometries)) if len(geometries) == 1 else None)
        if gname not in geometries:
            raise ManifestError(f"unknown geometry {gname!r}", f"{where}.geometry")
        src = raw.get("source")
        if src not in volumes:
            raise ManifestError(f"unknown source volume {src!r}", f"{where}.source")
        shift = _poly(raw.get("shift", "0"), chart, f"{where}.shift")
        if shift and (not shift.is_homogeneous() or shift.parity != 0):
            raise ManifestError(f"arrow shift must be even, got {shift}", f"{where}.shift")
        arrows[a] = GroupoidArrow(geometries[gname], volumes[src], shift)

    suites = data.get("suites", ["all"])
    if isinstance(suites, str):
        suites = [suites]
    if not isinstance(suites, list) or not all(isinstance(s, str) for s in suites):
        raise ManifestError("suites must be a list of case ids", "suites")

    expect = {}
    for case, status in _mapping(data.get("expect"), "expect").items():
        if status not in STATUSES:
            raise ManifestError(f"expected status must be one of {STATUSES}", f"expect.{case}")
        expect[case] = status

    return Manifest(name, chart, tuple(pairs), geometries, volumes, functions, changes, arrows,
                    tuple(suites), expect, source)


def shipped_manifest_path(name: str) -> Path | None:
    base = resources.files("sgv") / "manifests"
    stem = name[:-5] if name.endswith(".json") else name
    cand = base / f"{stem}.json"
    return Path(str(cand)) if cand.is_file() else None


def shipped_manifests() -> list[Path]:
    base = resources.files("sgv") / "manifests"
    return sorted(Path(str(p)) for p in base.iterdir() if p.name.endswith(".json"))


def parse_manifest(path: str | Path) -> Manifest:
    """Load a manifest file; a bare name falls back to the shipped manifests."""
    p = Path(path)
    if not p.is_file():
        shipped = shipped_manifest_path(str(path)) if p.parent == Path(".") else None
        if shipped is None:
            raise ManifestError("no such manifest file", str(path))
        p = shipped
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"invalid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}", str(p)) from None
    return load_manifest_data(data, str(p))


__all__ = ["Manifest", "parse_manifest", "load_manifest_data", "shipped_manifests", "shipped_manifest_path"]

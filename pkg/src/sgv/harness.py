"""Running identity cases over structures and assembling reports."""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

from .errors import SGVError
from .geometry import GeometryKind, JacobiResult, StructureTensor
from .grassmann import Chart, SuperPoly, all_monomials, monomial_poly
from .groupoid import GroupoidArrow
from .laplace import VolumeForm
from .supermatrix import CoordinateChange

DEFAULT_MAX_DEGREE = 3
PAIR_DEGREE = 2


def default_max_degree() -> int:
    raw = os.environ.get("SGV_MAX_DEGREE")
    if raw is None or raw == "":
        return DEFAULT_MAX_DEGREE
    try:
        value = int(raw)
    except ValueError:
        raise SGVError(f"SGV_MAX_DEGREE must be a nonnegative integer, got {raw!r}") from None
    if value < 0:
        raise SGVError(f"SGV_MAX_DEGREE must be a nonnegative integer, got {raw!r}")
    return value


def probe_basis(chart: Chart, max_degree: int) -> list[SuperPoly]:
    """Monomials of total degree <= max_degree (odd exponents <= 1).

    Ordered by degree, then by exponent vector in decreasing order, so
    ``(x, theta)`` at degree 2 gives ``[1, x, theta, x^2, x*theta]``.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be nonnegative")
    return [monomial_poly(chart, m) for m in all_monomials(chart, max_degree)]


@dataclass(frozen=True)
class Structure:
    """One geometry of a manifest with everything the cases may use."""

    id: str
    tensor: StructureTensor
    pairs: tuple[tuple[str, str], ...] = ()
    volumes: Mapping[str, VolumeForm] = field(default_factory=dict)
    changes: Mapping[str, CoordinateChange] = field(default_factory=dict)
    arrows: Mapping[str, GroupoidArrow] = field(default_factory=dict)

    @property
    def chart(self) -> Chart:
        return self.tensor.chart

    @property
    def kind(self) -> GeometryKind:
        return self.tensor.kind


def structures_of(manifest) -> list[Structure]:
    out = []
    for gname, T in manifest.geometries.items():
        arrows = {a: arr for a, arr in manifest.arrows.items() if arr.tensor is T}
        out.append(Structure(f"{manifest.name}:{gname}", T, manifest.darboux, dict(manifest.volumes),
                             dict(manifest.changes), arrows))
    return out


class Context:
    """Per-structure caches shared by the cases."""

    def __init__(self, structure: Structure, max_degree: int):
        self.structure = structure
        self.max_degree = max_degree
        self.cache: dict = {}

    @property
    def T(self) -> StructureTensor:
        return self.structure.tensor

    @property
    def chart(self) -> Chart:
        return self.structure.chart

    @property
    def kind(self) -> GeometryKind:
        return self.structure.kind

    @cached_property
    def probes(self) -> list[SuperPoly]:
        return probe_basis(self.chart, self.max_degree)

    @cached_property
    def pair_probes(self) -> list[SuperPoly]:
        return probe_basis(self.chart, min(PAIR_DEGREE, self.max_degree))

    @cached_property
    def jacobi(self) -> JacobiResult:
        return self.T.jacobi

    @cached_property
    def volume_items(self) -> list[tuple[str, VolumeForm]]:
        return list(self.structure.volumes.items())

    def volume_pairs(self) -> list[tuple[str, VolumeForm, str, VolumeForm]]:
        items = self.volume_items
        return [(n1, v1, n2, v2) for (n1, v1) in items for (n2, v2) in items if n1 != n2]

    def nilpotent_volume_pairs(self):
        return [p for p in self.volume_pairs() if (p[3].sigma - p[1].sigma).is_nilpotent()]


@dataclass(frozen=True)
class Witness:
    probe: str
    lhs: str
    rhs: str

    def to_json(self) -> dict:
        return {"probe": self.probe, "lhs": self.lhs, "rhs": self.rhs}


@dataclass(frozen=True)
class Skip:
    reason: str


@dataclass(frozen=True)
class IdentityCase:
    id: str
    equation_ref: str
    applicable_kinds: frozenset
    checker: Callable[[Context], object]
    needs_jacobi: bool = False

    def run(self, ctx: Context) -> "IdentityReport":
        sid = ctx.structure.id
        if ctx.kind not in self.applicable_kinds:
            return IdentityReport(self.id, sid, "skipped", None, self.equation_ref,
                                  f"not applicable to kind {ctx.kind.value}")
        if self.needs_jacobi and ctx.kind.is_poisson and not ctx.jacobi.ok:
            return IdentityReport(self.id, sid, "skipped", None, self.equation_ref,
                                  "precondition unmet: the structure fails the Jacobi identity")
        out = self.checker(ctx)
        if out is None:
            return IdentityReport(self.id, sid, "pass", None, self.equation_ref, None)
        if isinstance(out, Skip):
            return IdentityReport(self.id, sid, "skipped", None, self.equation_ref, out.reason)
        if isinstance(out, Witness):
            return IdentityReport(self.id, sid, "fail", out, self.equation_ref, None)
        raise TypeError(f"checker for {self.id} returned {out!r}")


@dataclass(frozen=True)
class IdentityReport:
    case: str
    structure: str
    status: str
    witness: Witness | None
    equation_ref: str
    reason: str | None = None

    def __post_init__(self):
        if self.status == "fail" and self.witness is None:
            raise ValueError("a failing report needs a witness")
        if self.status == "skipped" and not self.reason:
            raise ValueError("a skipped report needs a reason")

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "structure": self.structure,
            "status": self.status,
            "witness": self.witness.to_json() if self.witness else None,
            "equation_ref": self.equation_ref,
            "reason": self.reason,
        }


def select_cases(catalog: Sequence[IdentityCase], selection: Iterable[str]) -> list[IdentityCase]:
    sel = list(selection)
    if "all" in sel:
        return list(catalog)
    known = {c.id: c for c in catalog}
    unknown = [s for s in sel if s not in known]
    if unknown:
        raise SGVError(f"unknown suite ids {unknown}; see `sgv check --list`")
    return [known[s] for s in dict.fromkeys(sel)]


def run_suite(
    structures: Sequence[Structure],
    selection: Iterable[str],
    *,
    catalog: Sequence[IdentityCase] | None = None,
    max_degree: int | None = None,
    schedule: str = "catalog",
) -> list[IdentityReport]:
    """Run the selected cases on every structure; reports sorted by (case, structure).

    ``schedule="permuted"`` executes the same work in a shuffled order (fixed
    seed); the sorted result must not change.
    """
    if catalog is None:
        from .catalog import CATALOG as catalog
    cases = select_cases(catalog, selection)
    degree = default_max_degree() if max_degree is None else max_degree
    contexts = [Context(s, degree) for s in structures]
    jobs = [(c, ctx) for ctx in contexts for c in cases]
    if schedule == "permuted":
        random.Random(20240611).shuffle(jobs)
    elif schedule != "catalog":
        raise SGVError(f"unknown schedule {schedule!r}")
    reports = [case.run(ctx) for case, ctx in jobs]
    reports.sort(key=lambda r: (r.case, r.structure))
    return reports


def summarize(reports: Sequence[IdentityReport], expect: Mapping | None = None) -> dict:
    """Status counts; ``unexpected`` counts failures not declared in ``expect``
    and declared outcomes that did not happen.

    ``expect`` maps a case id, or a (structure id, case id) pair, to a status.
    """
    expect = expect or {}
    counts = {"pass": 0, "fail": 0, "skipped": 0}
    unexpected = 0
    for r in reports:
        counts[r.status] += 1
        want = expect.get((r.structure, r.case), expect.get(r.case))
        if (want is not None and r.status != want) or (want is None and r.status == "fail"):
            unexpected += 1
    return {**counts, "total": len(reports), "unexpected": unexpected}


def report_json(reports: Sequence[IdentityReport], expect: Mapping | None = None) -> str:
    doc = {"reports": [r.to_json() for r in reports], "summary": summarize(reports, expect)}
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def report_text(reports: Sequence[IdentityReport], expect: Mapping | None = None) -> str:
    lines = []
    for r in reports:
        lines.append(f"case: {r.case}")
        lines.append(f"structure: {r.structure}")
        lines.append(f"status: {r.status}")
        if r.witness:
            lines.append(f"witness.probe: {r.witness.probe}")
            lines.append(f"witness.lhs: {r.witness.lhs}")
            lines.append(f"witness.rhs: {r.witness.rhs}")
        lines.append(f"equation_ref: {r.equation_ref}")
        if r.reason:
            lines.append(f"reason: {r.reason}")
        lines.append("")
    s = summarize(reports, expect)
    lines.append("summary: " + " ".join(f"{k}={v}" for k, v in s.items()))
    return "\n".join(lines) + "\n"


__all__ = [
    "DEFAULT_MAX_DEGREE",
    "probe_basis",
    "Structure",
    "structures_of",
    "Context",
    "Witness",
    "Skip",
    "IdentityCase",
    "IdentityReport",
    "select_cases",
    "run_suite",
    "summarize",
    "report_json",
    "report_text",
    "default_max_degree",
]

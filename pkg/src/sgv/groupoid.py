"""Arrows between volume forms: rho -> e^sigma rho with H(e^sigma rho, rho) = 0."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import SGVError
from .geometry import GeometryKind, StructureTensor, bracket, is_casimir
from .grassmann import SuperPoly
from .laplace import Density, VolumeForm, cocycle_H, laplace_density, laplace_fn, modular_field


@dataclass(frozen=True)
class GroupoidArrow:
    tensor: StructureTensor
    source: VolumeForm
    shift: SuperPoly

    def __post_init__(self):
        # VolumeForm validates parity and chart of the shift
        VolumeForm(self.source.chart, self.shift)
        if self.source.chart != self.tensor.chart:
            raise SGVError("arrow source is over a different chart than the tensor")

    @property
    def target(self) -> VolumeForm:
        return self.source.shifted(self.shift)

    def residual(self) -> SuperPoly:
        return cocycle_H(self.tensor, self.target, self.source)


def arrow_valid(a: GroupoidArrow) -> tuple[bool, SuperPoly]:
    """(valid, H(target, source)); the residual is zero exactly for arrows."""
    if a.tensor.kind.is_poisson and not a.tensor.jacobi:
        raise SGVError("arrow validity needs a tensor satisfying the Jacobi identity")
    r = a.residual()
    return (not r), r


def _require_valid(a: GroupoidArrow, what: str) -> None:
    ok, r = arrow_valid(a)
    if not ok:
        raise SGVError(f"{what} is not a valid arrow: H(target, source) = {r}")


def compose(a1: GroupoidArrow, a2: GroupoidArrow) -> GroupoidArrow:
    """a1 then a2: source of a1, shift sigma1 + sigma2."""
    if a1.tensor != a2.tensor:
        raise SGVError("arrows over different structures do not compose")
    if a2.source != a1.target:
        raise SGVError("arrows are not composable: the second source is not the first target")
    _require_valid(a1, "first arrow")
    _require_valid(a2, "second arrow")
    out = GroupoidArrow(a1.tensor, a1.source, a1.shift + a2.shift)
    _require_valid(out, "composite")
    return out


def invert(a: GroupoidArrow) -> GroupoidArrow:
    _require_valid(a, "arrow")
    out = GroupoidArrow(a.tensor, a.target, -a.shift)
    _require_valid(out, "inverse")
    return out


def identity_arrow(T: StructureTensor, rho: VolumeForm) -> GroupoidArrow:
    return GroupoidArrow(T, rho, T.chart.zero())


@dataclass(frozen=True)
class Assertion:
    name: str
    ok: bool | None  # None: not applicable to this kind
    witness: str | None = None


@dataclass(frozen=True)
class OrbitReport:
    assertions: tuple[Assertion, ...]
    cocycle: SuperPoly

    @property
    def ok(self) -> bool:
        return all(a.ok is not False for a in self.assertions)

    def get(self, name: str) -> Assertion:
        for a in self.assertions:
            if a.name == name:
                return a
        raise KeyError(name)


def orbit_invariant_check(T: StructureTensor, a: GroupoidArrow, probes: Sequence[SuperPoly]) -> OrbitReport:
    """Compare source and target of a (possibly invalid) arrow.

    ``modular_fields_equal``: the modular fields agree component-wise.
    ``half_density_laplacians_equal``: both half-density Laplacians agree on the probes.
    ``cocycle_is_casimir``: H(target, source) has zero Hamiltonian field.
    """
    src, tgt = a.source, a.target
    H = cocycle_H(T, tgt, src)
    out = []
    if T.kind is GeometryKind.ODD_POISSON:
        Ys, Yt = modular_field(T, src), modular_field(T, tgt)
        wit = None
        if Ys != Yt:
            diff = Yt - Ys
            wit = f"Y_target - Y_source = {diff}"
        out.append(Assertion("modular_fields_equal", Ys == Yt, wit))
    else:
        out.append(Assertion("modular_fields_equal", None, f"no modular field for {T.kind.value}"))
    half = Fraction(1, 2)
    wit = None
    for p in probes:
        d = Density(half, p, src)
        lhs = laplace_density(T, tgt, d).coefficient
        rhs = laplace_density(T, src, d).coefficient
        if lhs != rhs:
            wit = f"probe {p}: target - source = {lhs - rhs}"
            break
    out.append(Assertion("half_density_laplacians_equal", wit is None, wit))
    if T.kind.is_poisson:
        cas = is_casimir(T, H)
        out.append(Assertion("cocycle_is_casimir", cas, None if cas else f"H = {H} has a nonzero Hamiltonian field"))
    else:
        out.append(Assertion("cocycle_is_casimir", None, f"no Casimirs for {T.kind.value}"))
    return OrbitReport(tuple(out), H)


def lambda_residual(T: StructureTensor, rho: VolumeForm, sigma: SuperPoly, lam: Fraction) -> SuperPoly:
    """Delta_rho sigma - lam {sigma, sigma}; zero iff Delta_rho e^(lam sigma) = 0."""
    return laplace_fn(T, rho, sigma) - bracket(T, sigma, sigma).scale(lam)


@dataclass(frozen=True)
class LambdaCounterexample:
    lam: Fraction
    sigma: SuperPoly
    tau: SuperPoly
    residual: SuperPoly


def lambda_counterexample(
    T: StructureTensor,
    rho: VolumeForm,
    lam,
    basis: Sequence[SuperPoly],
    coefficients: Iterable = (0, Fraction(1, 4), Fraction(-1, 4), Fraction(1, 2), Fraction(-1, 2), 1, -1, 2, -2),
) -> LambdaCounterexample | None:
    """Search shifts sigma, tau in span(basis) such that e^(lam sigma) and e^(lam tau)
    solve the lam-condition at rho and e^sigma rho, but sigma + tau does not at rho.

    Deterministic: candidates are enumerated in lexicographic coefficient order.
    """
    lam = Fraction(lam)
    coefficients = [Fraction(c) for c in coefficients]
    zero = T.chart.zero()
    cands = []
    for cs in itertools.product(coefficients, repeat=len(basis)):
        cands.append(sum((b.scale(c) for b, c in zip(basis, cs)), zero))
    valid_at = lambda r, s: not lambda_residual(T, r, s, lam)
    for sigma in cands:
        if not sigma or not valid_at(rho, sigma):
            continue
        mid = rho.shifted(sigma)
        for tau in cands:
            if not tau or not valid_at(mid, tau):
                continue
            res = lambda_residual(T, rho, sigma + tau, lam)
            if res:
                return LambdaCounterexample(lam, sigma, tau, res)
    return None


__all__ = [
    "GroupoidArrow",
    "arrow_valid",
    "compose",
    "invert",
    "identity_arrow",
    "is_casimir",
    "orbit_invariant_check",
    "OrbitReport",
    "Assertion",
    "lambda_residual",
    "lambda_counterexample",
    "LambdaCounterexample",
]

"""Divergence, Laplacians on functions and densities, modular fields, the cocycle H.

A volume form is stored as its even logarithm ``sigma`` relative to the
coordinate volume ``Dx``; the exponential is never formed.  A density of weight
``w`` is a coefficient together with the reference volume it is measured
against: ``s * rho_ref^w``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ChartMismatchError, InternalCheckError, NotNilpotentError, ParityError, SGVError
from .geometry import GeometryKind, StructureTensor, VectorField, apply_field, bracket, hamiltonian_field
from .grassmann import Chart, SuperPoly, exp_nilpotent


@dataclass(frozen=True)
class VolumeForm:
    chart: Chart
    sigma: SuperPoly

    def __post_init__(self):
        if self.sigma.chart != self.chart:
            raise ChartMismatchError("log-density is not over the volume form's chart")
        if self.sigma and (not self.sigma.is_homogeneous() or self.sigma.parity != 0):
            raise ParityError(f"volume log-density must be even, got {self.sigma}")

    @classmethod
    def coordinate(cls, chart: Chart) -> "VolumeForm":
        return cls(chart, chart.zero())

    def shifted(self, sigma: SuperPoly) -> "VolumeForm":
        """e^sigma * self."""
        return VolumeForm(self.chart, self.sigma + sigma)

    def shift_to(self, other: "VolumeForm") -> SuperPoly:
        """The sigma with other = e^sigma * self."""
        if other.chart != self.chart:
            raise ChartMismatchError("volume forms over different charts")
        return other.sigma - self.sigma


@dataclass(frozen=True)
class Density:
    """``coefficient * reference^weight``."""

    weight: Fraction
    coefficient: SuperPoly
    reference: VolumeForm

    def __post_init__(self):
        object.__setattr__(self, "weight", Fraction(self.weight))
        if self.coefficient.chart != self.reference.chart:
            raise ChartMismatchError("density coefficient and reference live on different charts")

    @property
    def chart(self) -> Chart:
        return self.reference.chart

    def rebase(self, new_ref: VolumeForm) -> "Density":
        """Same density, coefficient measured against ``new_ref``.

        With new_ref = e^tau ref the coefficient picks up e^(-w tau), which is a
        polynomial only when w*tau is nilpotent.
        """
        tau = self.reference.shift_to(new_ref)
        u = tau.scale(-self.weight)
        if not u:
            return Density(self.weight, self.coefficient, new_ref)
        try:
            factor = exp_nilpotent(u)
        except NotNilpotentError:
            raise SGVError(
                f"cannot rebase a weight-{self.weight} density: w*(sigma_new - sigma_old) = {-u} has nonzero body"
            ) from None
        return Density(self.weight, factor * self.coefficient, new_ref)

    def same_as(self, other: "Density") -> bool:
        """Equality as geometric objects (rebasing ``other`` onto our reference)."""
        if self.weight != other.weight:
            return False
        return other.rebase(self.reference).coefficient == self.coefficient


def _check(T: StructureTensor, rho: VolumeForm) -> None:
    if rho.chart != T.chart:
        raise ChartMismatchError("volume form and tensor live on different charts")


def divergence(rho: VolumeForm, X: VectorField) -> SuperPoly:
    """div_rho X = sum_a (-1)^(a(X+1)) (d_a X^a + d_a sigma * X^a)."""
    if X.chart != rho.chart:
        raise ChartMismatchError("vector field and volume form live on different charts")
    xp = int(X.parity)
    out = rho.chart.zero()
    for a, comp in enumerate(X.components):
        if not comp:
            continue
        term = comp.diff(a) + rho.sigma.diff(a) * comp
        out = out - term if (rho.chart.parities[a] * (xp + 1)) % 2 else out + term
    return out


def laplace_fn(T: StructureTensor, rho: VolumeForm, f: SuperPoly) -> SuperPoly:
    """Delta_rho f = div_rho X_f (grad f for the Riemannian kinds)."""
    _check(T, rho)
    return divergence(rho, hamiltonian_field(T, f))


def laplace_fn_coordinates(T: StructureTensor, rho: VolumeForm, f: SuperPoly) -> SuperPoly:
    """Odd Poisson only: sum_a [d_a(S^ab d_b f) + d_a sigma S^ab d_b f], no extra signs."""
    if T.kind is not GeometryKind.ODD_POISSON:
        raise SGVError("the coordinate formula is stated for odd Poisson structures")
    out = T.chart.zero()
    for a, row in T.rows.items():
        inner = T.chart.zero()
        for b, e in row:
            inner = inner + e * f.diff(b)
        if inner:
            out = out + inner.diff(a) + rho.sigma.diff(a) * inner
    return out


def darboux_pairs_valid(chart: Chart, pairs: Sequence[tuple[str, str]]) -> None:
    seen = set()
    for x, t in pairs:
        if chart.parities[chart.index(x)] != 0 or chart.parities[chart.index(t)] != 1:
            raise SGVError(f"Darboux pair ({x}, {t}) must be (even, odd)")
        if x in seen or t in seen:
            raise SGVError(f"variable reused in Darboux pairing: ({x}, {t})")
        seen.update((x, t))
    if not pairs:
        raise SGVError("no Darboux pairs declared")


def coordinate_delta0(chart: Chart, pairs: Sequence[tuple[str, str]], f: SuperPoly) -> SuperPoly:
    """Delta_0 f = 2 sum_i d^2 f / dx^i dtheta_i.

    Unpaired variables are treated as parameters (e.g. odd constants).
    """
    darboux_pairs_valid(chart, pairs)
    if f.chart != chart:
        raise ChartMismatchError("function is not over the Darboux chart")
    out = chart.zero()
    for x, t in pairs:
        out = out + f.diff(t).diff(x)
    return out.scale(2)


def cocycle_H(T: StructureTensor, rho_new: VolumeForm, rho_old: VolumeForm) -> SuperPoly:
    """H(rho', rho) = Delta_rho sigma + c/2 B(sigma, sigma) = 2 e^(-sigma/2) Delta_rho e^(sigma/2).

    ``c`` is -1 for odd Poisson and +1 for even Riemannian.
    """
    _check(T, rho_old)
    if T.kind.exp_sign == 0:
        raise SGVError(f"no cocycle H for kind {T.kind.value}")
    sigma = rho_old.shift_to(rho_new)
    return laplace_fn(T, rho_old, sigma) + bracket(T, sigma, sigma).scale(Fraction(T.kind.exp_sign, 2))


def laplace_density(T: StructureTensor, rho: VolumeForm, d: Density) -> Density:
    """(Delta_rho s) rho^w for d = s rho^w.

    Half-densities given against another reference rho0 are handled
    polynomially: the coefficient becomes Delta_rho0 s - 1/2 H(rho, rho0) s,
    still measured against rho0.  Other weights are first rebased onto rho.
    """
    _check(T, rho)
    if d.chart != T.chart:
        raise ChartMismatchError("density and tensor live on different charts")
    if d.weight == 0 or d.reference == rho:
        return Density(d.weight, laplace_fn(T, rho, d.coefficient), d.reference)
    if d.weight == Fraction(1, 2) and T.kind.exp_sign != 0:
        s = d.coefficient
        h = cocycle_H(T, rho, d.reference)
        return Density(d.weight, laplace_fn(T, d.reference, s) - (h * s).scale(Fraction(1, 2)), d.reference)
    return laplace_density(T, rho, d.rebase(rho))


def lie_derivative_density(X: VectorField, d: Density) -> Density:
    """L_X (s rho^w) = (X s + w div_rho(X) s) rho^w."""
    s = d.coefficient
    coeff = apply_field(X, s)
    if d.weight:
        coeff = coeff + (divergence(d.reference, X) * s).scale(d.weight)
    return Density(d.weight, coeff, d.reference)


def _derivation_from_values(T: StructureTensor, op, name: str) -> VectorField:
    chart = T.chart
    coords = chart.coords()
    comps = tuple(op(x) for x in coords)
    parities = {int(c.parity) ^ chart.parities[a] for a, c in enumerate(comps) if c}
    if len(parities) > 1:
        raise InternalCheckError(f"{name}: components do not have a common field parity")
    field = VectorField(chart, comps, parities.pop() if parities else 0)
    for i, j in itertools.combinations_with_replacement(range(len(chart)), 2):
        probe = coords[i] * coords[j]
        if not probe:
            continue
        if op(probe) != apply_field(field, probe):
            raise InternalCheckError(f"{name} is not a derivation on the probe {probe}")
    return field


def modular_field(T: StructureTensor, rho: VolumeForm) -> VectorField:
    """Odd Poisson: Y^a = Delta_rho^2 (x^a).  Even Poisson: Delta_rho itself.

    The result is checked to act as a derivation on every quadratic probe;
    a failure raises InternalCheckError.
    """
    _check(T, rho)
    if T.kind is GeometryKind.ODD_POISSON:
        op = lambda f: laplace_fn(T, rho, laplace_fn(T, rho, f))
    elif T.kind is GeometryKind.EVEN_POISSON:
        op = lambda f: laplace_fn(T, rho, f)
    else:
        raise SGVError(f"no modular field for kind {T.kind.value}")
    return _derivation_from_values(T, op, "modular field")


def density_commutator(T: StructureTensor, rho: VolumeForm, w, f: SuperPoly, s: SuperPoly) -> SuperPoly:
    """Coefficient of ([Delta_rho, f] - 2 L_{X_f}) applied to s rho^w."""
    d = Density(w, s, rho)
    lap = lambda c: laplace_density(T, rho, Density(w, c, rho)).coefficient
    sign = -1 if (int(f.parity) * T.parity) % 2 else 1
    comm = lap(f * s) - (f * lap(s)).scale(sign)
    lie = lie_derivative_density(hamiltonian_field(T, f), d).coefficient
    return comm - lie.scale(2)


def commutator_defect(T: StructureTensor, rho: VolumeForm, w, f: SuperPoly, probes: Iterable[SuperPoly]) -> SuperPoly:
    """The function m with [Delta_rho, f] - 2 L_{X_f} = m on every probe.

    Raises InternalCheckError when the residual is not a multiplication
    operator.  Expected value: (1 - 2w) Delta_rho f.
    """
    if T.kind.operator_order != 2:
        raise SGVError(f"the commutator law is stated for second-order Laplacians, not {T.kind.value}")
    m = density_commutator(T, rho, w, f, T.chart.one())
    for p in probes:
        got = density_commutator(T, rho, w, f, p)
        if got != m * p:
            raise InternalCheckError(f"commutator residual on probe {p} is {got}, not a multiple of {m}")
    return m


def half_density_log_laplacian(T: StructureTensor, rho: VolumeForm, rho0: VolumeForm) -> SuperPoly:
    """rho^(-1/2) Delta(rho^(1/2)) for the half-density operator of rho0; equals 1/2 H(rho, rho0) - 1/2 H(rho0, rho0)."""
    sigma = rho0.shift_to(rho)
    factor = exp_nilpotent(sigma.scale(Fraction(1, 2)))
    out = laplace_density(T, rho0, Density(Fraction(1, 2), factor, rho0)).coefficient
    return exp_nilpotent(sigma.scale(Fraction(-1, 2))) * out


__all__ = [
    "VolumeForm",
    "Density",
    "divergence",
    "laplace_fn",
    "laplace_fn_coordinates",
    "coordinate_delta0",
    "darboux_pairs_valid",
    "cocycle_H",
    "laplace_density",
    "lie_derivative_density",
    "modular_field",
    "density_commutator",
    "commutator_defect",
    "half_density_log_laplacian",
]

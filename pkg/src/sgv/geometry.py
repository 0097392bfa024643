"""The four geometries controlled by a rank-2 tensor T^{ab}.

=================  ==========================  =============  ============
kind               symmetry  T^{ab} = s T^{ba}   entry parity   lifted to
=================  ==========================  =============  ============
odd_poisson        s = (-1)^(a b)               a + b + 1      T*M
even_poisson       s = (-1)^((a+1)(b+1))        a + b          Pi T*M
even_riemannian    s = (-1)^(a b)               a + b          T*M
odd_riemannian     s = (-1)^((a+1)(b+1))        a + b + 1      Pi T*M
=================  ==========================  =============  ============

The bracket (or scalar product of gradients) is given directly by

    B(f, g) = kappa(f, a) T^{ab} d_b f d_a g

with a kind-dependent sign ``kappa``.  Up to ``GeometryKind.lift_sign`` this is
the double canonical bracket ``(f, (T, g))`` of the lifted tensor;
``tests/test_lifted.py`` pins the equality for every kind.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from .errors import ChartMismatchError, ParityError, SGVError
from .grassmann import Chart, Parity, SuperPoly, all_monomials, monomial_poly
from .lifted import LiftedChart, canonical_bracket, lift_tensor


class GeometryKind(str, enum.Enum):
    ODD_POISSON = "odd_poisson"
    EVEN_POISSON = "even_poisson"
    EVEN_RIEMANNIAN = "even_riemannian"
    ODD_RIEMANNIAN = "odd_riemannian"

    @property
    def parity(self) -> int:
        return 1 if self in (GeometryKind.ODD_POISSON, GeometryKind.ODD_RIEMANNIAN) else 0

    @property
    def shifted_lift(self) -> bool:
        return self in (GeometryKind.EVEN_POISSON, GeometryKind.ODD_RIEMANNIAN)

    @property
    def is_poisson(self) -> bool:
        return self in (GeometryKind.ODD_POISSON, GeometryKind.EVEN_POISSON)

    @property
    def is_riemannian(self) -> bool:
        return not self.is_poisson

    def symmetry_sign(self, pa: int, pb: int) -> int:
        if self.shifted_lift:
            return -1 if ((pa + 1) * (pb + 1)) % 2 else 1
        return -1 if (pa * pb) % 2 else 1

    def entry_parity(self, pa: int, pb: int) -> int:
        return (pa + pb + self.parity) % 2

    def kappa(self, pf: int, pa: int) -> int:
        """Sign in front of T^{ab} d_b f d_a g in the direct bracket formula."""
        if self is GeometryKind.ODD_POISSON:
            e = 1 + pf * (pa + 1)
        elif self is GeometryKind.EVEN_POISSON:
            e = 1 + pa * (pf + 1)
        elif self is GeometryKind.EVEN_RIEMANNIAN:
            e = pf * pa
        else:
            e = 1 + (pf + 1) * (pa + 1)
        return -1 if e % 2 else 1

    def bracket_symmetry(self, pf: int, pg: int) -> int:
        """B(f, g) = bracket_symmetry * B(g, f)."""
        e = (pf + self.parity) * (pg + self.parity) + (1 if self.is_poisson else 0)
        return -1 if e % 2 else 1

    @property
    def lift_sign(self) -> int:
        """B(f, g) = lift_sign * (f, (T, g)); -1 only for even Riemannian, where
        the scalar product of gradients is kept positive on even coordinates."""
        return -1 if self is GeometryKind.EVEN_RIEMANNIAN else 1

    def field_sign(self, pf: int) -> int:
        """X_f = field_sign * B(f, .): (-1)^(f+1) for odd Poisson, +1 otherwise."""
        if self is GeometryKind.ODD_POISSON:
            return 1 if pf % 2 else -1
        return 1

    @property
    def operator_order(self) -> int:
        """Order of the Laplacian on functions (2 for odd Poisson / even Riemannian)."""
        return 2 if self in (GeometryKind.ODD_POISSON, GeometryKind.EVEN_RIEMANNIAN) else 1

    @property
    def exp_sign(self) -> int:
        """c in  Delta e^{kf} = k (Delta f + c k B(f, f)) e^{kf}; 0 for the first-order kinds."""
        if self is GeometryKind.ODD_POISSON:
            return -1
        return 1 if self is GeometryKind.EVEN_RIEMANNIAN else 0


@dataclass(frozen=True)
class StructureTensor:
    """A rank-2 tensor of a given kind; absent entries are zero.

    ``entries`` is keyed by index pairs ``(a, b)``.  Build from names with
    :meth:`from_named`, which also fills symmetric partners.
    """

    chart: Chart
    kind: GeometryKind
    entries: Mapping[tuple[int, int], SuperPoly]

    def __post_init__(self):
        kind = GeometryKind(self.kind)
        object.__setattr__(self, "kind", kind)
        clean = {}
        par = self.chart.parities
        for (a, b), e in self.entries.items():
            if e.chart != self.chart:
                raise ChartMismatchError(f"tensor entry ({a},{b}) is over a foreign chart")
            if not e:
                continue
            want = kind.entry_parity(par[a], par[b])
            if not e.is_homogeneous() or e.parity != want:
                raise ParityError(
                    f"tensor entry ({self.chart.names[a]},{self.chart.names[b]}) parity mismatch "
                    f"for kind {kind.value}: need {Parity(want).name.lower()}, got {e}"
                )
            clean[(a, b)] = e
        for (a, b), e in clean.items():
            partner = clean.get((b, a), self.chart.zero())
            if partner != e.scale(kind.symmetry_sign(par[a], par[b])):
                raise SGVError(
                    f"tensor entries ({self.chart.names[a]},{self.chart.names[b]}) and "
                    f"({self.chart.names[b]},{self.chart.names[a]}) violate the {kind.value} symmetry rule"
                )
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    @classmethod
    def from_named(cls, chart: Chart, kind, entries: Mapping[tuple[str, str], SuperPoly],
                   complete: bool = True) -> "StructureTensor":
        kind = GeometryKind(kind)
        out: dict[tuple[int, int], SuperPoly] = {}
        par = chart.parities
        for (na, nb), e in entries.items():
            a, b = chart.index(na), chart.index(nb)
            if (a, b) in out and out[(a, b)] != e:
                raise SGVError(f"conflicting values for tensor entry ({na},{nb})")
            out[(a, b)] = e
        if complete:
            for (a, b), e in list(out.items()):
                want = e.scale(kind.symmetry_sign(par[a], par[b]))
                if (b, a) in out:
                    if out[(b, a)] != want:
                        raise SGVError(
                            f"conflicting explicit partner for tensor entry ({chart.names[a]},{chart.names[b]}): "
                            f"symmetry rule of {kind.value} requires ({chart.names[b]},{chart.names[a]}) = {want}"
                        )
                else:
                    out[(b, a)] = want
        return cls(chart, kind, out)

    @classmethod
    def darboux(cls, chart: Chart, pairs: Sequence[tuple[str, str]]) -> "StructureTensor":
        """Odd Poisson tensor with {theta_i, x^i} = 1 for each (x, theta) pair."""
        one = chart.one()
        return cls.from_named(chart, GeometryKind.ODD_POISSON, {(x, t): one for x, t in pairs})

    @property
    def parity(self) -> int:
        return self.kind.parity

    def entry(self, a: int, b: int) -> SuperPoly:
        return self.entries.get((a, b), self.chart.zero())

    @cached_property
    def lifted_chart(self) -> LiftedChart:
        return LiftedChart(self.chart, self.kind.shifted_lift)

    @cached_property
    def lifted(self) -> SuperPoly:
        return lift_tensor(self)

    @cached_property
    def rows(self) -> dict[int, list[tuple[int, SuperPoly]]]:
        out: dict[int, list[tuple[int, SuperPoly]]] = {}
        for (a, b), e in self.entries.items():
            out.setdefault(a, []).append((b, e))
        return out

    def is_zero(self) -> bool:
        return not self.entries

    @cached_property
    def jacobi(self) -> "JacobiResult":
        """Memoized :func:`check_jacobi`."""
        return check_jacobi(self)


@dataclass(frozen=True)
class VectorField:
    """``sum_a X^a d_a`` with left derivatives; components in chart order."""

    chart: Chart
    components: tuple[SuperPoly, ...]
    parity: Parity

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "parity", Parity.parse(self.parity))
        if len(comps) != len(self.chart):
            raise ValueError("one component per chart variable")
        for a, c in enumerate(comps):
            if c.chart != self.chart:
                raise ChartMismatchError("vector field component over a foreign chart")
            if c and (not c.is_homogeneous() or c.parity != (int(self.parity) + self.chart.parities[a]) % 2):
                raise ParityError(f"component {self.chart.names[a]} = {c} has the wrong parity")

    @classmethod
    def zero(cls, chart: Chart, parity=Parity.EVEN) -> "VectorField":
        return cls(chart, (chart.zero(),) * len(chart), parity)

    @classmethod
    def from_named(cls, chart: Chart, comps: Mapping[str, SuperPoly], parity) -> "VectorField":
        arr = [chart.zero()] * len(chart)
        for name, c in comps.items():
            arr[chart.index(name)] = c
        return cls(chart, tuple(arr), parity)

    def __call__(self, f: SuperPoly) -> SuperPoly:
        return apply_field(self, f)

    def is_zero(self) -> bool:
        return not any(self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.chart == other.chart and self.components == other.components and (
            self.parity == other.parity or self.is_zero()
        )

    def __hash__(self) -> int:
        return hash((self.chart, self.components))

    def __add__(self, other: "VectorField") -> "VectorField":
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        return VectorField(self.chart, tuple(a + b for a, b in zip(self.components, other.components)), self.parity)

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, tuple(-c for c in self.components), self.parity)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def scale(self, c) -> "VectorField":
        return VectorField(self.chart, tuple(x.scale(c) for x in self.components), self.parity)

    def times(self, f: SuperPoly) -> "VectorField":
        """The field f X (multiplication on the left)."""
        return VectorField(self.chart, tuple(f * c for c in self.components), self.parity + f.parity)

    def named(self) -> dict[str, SuperPoly]:
        return {n: c for n, c in zip(self.chart.names, self.components) if c}

    def __str__(self) -> str:
        parts = [f"({c})*d_{n}" for n, c in zip(self.chart.names, self.components) if c]
        return " + ".join(parts) if parts else "0"


def apply_field(X: VectorField, f: SuperPoly) -> SuperPoly:
    if f.chart != X.chart:
        raise ChartMismatchError("field and function live on different charts")
    out = f.chart.zero()
    for a, comp in enumerate(X.components):
        if comp:
            d = f.diff(a)
            if d:
                out = out + comp * d
    return out


def field_commutator(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y] = XY - (-1)^(X Y) YX as a vector field."""
    sign = -1 if (int(X.parity) * int(Y.parity)) % 2 else 1
    comps = tuple(apply_field(X, y) - apply_field(Y, x).scale(sign) for x, y in zip(X.components, Y.components))
    return VectorField(X.chart, comps, X.parity + Y.parity)


def _require_homogeneous(*fs: SuperPoly) -> None:
    for f in fs:
        if not f.is_homogeneous():
            raise ParityError(f"non-homogeneous input {f}; split it into even and odd parts")


def _check_chart(T: StructureTensor, *fs: SuperPoly) -> None:
    for f in fs:
        if f.chart != T.chart:
            raise ChartMismatchError(f"{f} is not over the tensor's chart {T.chart.names}")


def bracket(T: StructureTensor, f: SuperPoly, g: SuperPoly) -> SuperPoly:
    """Odd/even Poisson bracket or scalar product of gradients, per kind."""
    _check_chart(T, f, g)
    _require_homogeneous(f, g)
    return apply_field(hamiltonian_field(T, f), g).scale(T.kind.field_sign(int(f.parity)))


def bracket_direct(T: StructureTensor, f: SuperPoly, g: SuperPoly) -> SuperPoly:
    """The tensor formula summed over (a, b) without going through X_f."""
    _check_chart(T, f, g)
    _require_homogeneous(f, g)
    pf = int(f.parity)
    par = T.chart.parities
    out = T.chart.zero()
    for (a, b), e in T.entries.items():
        db, da = f.diff(b), g.diff(a)
        if db and da:
            out = out + (e * db * da).scale(T.kind.kappa(pf, par[a]))
    return out


def bracket_lifted(T: StructureTensor, f: SuperPoly, g: SuperPoly) -> SuperPoly:
    """(f, (T, g)) on T*M or [[f, [[T, g]]]] on Pi T*M, restricted back to M."""
    lc = T.lifted_chart
    F, G = lc.embed(f), lc.embed(g)
    inner = canonical_bracket(lc, T.lifted, G)
    return canonical_bracket(lc, F, inner).restrict(T.chart).scale(T.kind.lift_sign)


def hamiltonian_field(T: StructureTensor, f: SuperPoly) -> VectorField:
    """X_f for Poisson kinds, grad f for Riemannian kinds."""
    _check_chart(T, f)
    _require_homogeneous(f)
    pf = int(f.parity)
    par = T.chart.parities
    sign_f = T.kind.field_sign(pf)
    comps = [T.chart.zero()] * len(T.chart)
    grads = {}
    for a, row in T.rows.items():
        acc = T.chart.zero()
        for b, e in row:
            if b not in grads:
                grads[b] = f.diff(b)
            if grads[b]:
                acc = acc + e * grads[b]
        if acc:
            comps[a] = acc.scale(sign_f * T.kind.kappa(pf, par[a]))
    return VectorField(T.chart, tuple(comps), Parity((pf + T.parity) % 2))


def jacobiator(T: StructureTensor, f: SuperPoly, g: SuperPoly, h: SuperPoly) -> SuperPoly:
    """{f,{g,h}} - {{f,g},h} - (-1)^((f+e)(g+e)) {g,{f,h}} with e the bracket parity."""
    if not T.kind.is_poisson:
        raise SGVError(f"Jacobi identity is not defined for kind {T.kind.value}")
    e = T.parity
    pf, pg = int(f.parity), int(g.parity)
    sign = -1 if ((pf + e) * (pg + e)) % 2 else 1
    return (
        bracket(T, f, bracket(T, g, h))
        - bracket(T, bracket(T, f, g), h)
        - bracket(T, g, bracket(T, f, h)).scale(sign)
    )


@dataclass(frozen=True)
class JacobiResult:
    ok: bool
    scan_ok: bool
    lifted_ok: bool
    witness: tuple[str, str, str] | None = None
    value: SuperPoly | None = None
    self_bracket: SuperPoly | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_jacobi(T: StructureTensor) -> JacobiResult:
    """Coordinate-triple Jacobiator scan and lifted self-bracket, both required to agree.

    A Jacobiator of a biderivation is a triderivation, so vanishing on
    coordinate triples implies vanishing everywhere.
    """
    if not T.kind.is_poisson:
        return JacobiResult(True, True, True)
    names = T.chart.names
    coords = T.chart.coords()
    witness = value = None
    for i, j, k in itertools.product(range(len(coords)), repeat=3):
        v = jacobiator(T, coords[i], coords[j], coords[k])
        if v:
            witness, value = (names[i], names[j], names[k]), v
            break
    lc = T.lifted_chart
    sb = canonical_bracket(lc, T.lifted, T.lifted)
    scan_ok, lifted_ok = witness is None, not sb
    return JacobiResult(scan_ok and lifted_ok, scan_ok, lifted_ok, witness, value, sb)


def lie_derivative(X: VectorField, f: SuperPoly) -> SuperPoly:
    return apply_field(X, f)


def is_casimir(T: StructureTensor, f: SuperPoly) -> bool:
    return hamiltonian_field(T, f).is_zero()


def _solve(columns: Sequence[dict], target: dict) -> list[Fraction] | None:
    """One solution of sum_j c_j columns[j] = target (sparse, exact), free unknowns set to 0."""
    keys = sorted(set(target).union(*columns))
    rows = [[col.get(k, Fraction(0)) for col in columns] + [target.get(k, Fraction(0))] for k in keys]
    n = len(columns)
    pivots = []
    r = 0
    for j in range(n):
        i = next((i for i in range(r, len(rows)) if rows[i][j]), None)
        if i is None:
            continue
        rows[r], rows[i] = rows[i], rows[r]
        lead = rows[r][j]
        rows[r] = [v / lead for v in rows[r]]
        for i2 in range(len(rows)):
            if i2 != r and rows[i2][j]:
                factor = rows[i2][j]
                rows[i2] = [a - factor * b for a, b in zip(rows[i2], rows[r])]
        pivots.append(j)
        r += 1
    if any(row[n] for row in rows[r:]):
        return None
    out = [Fraction(0)] * n
    for i, j in enumerate(pivots):
        out[j] = rows[i][n]
    return out


def hamiltonian_potential(T: StructureTensor, Y: VectorField, max_degree: int) -> SuperPoly | None:
    """Some f of degree <= max_degree with X_f = Y, or None if there is none.

    f is determined up to Casimirs. A None answer is a bounded-degree
    statement only: a potential of higher degree may still exist.
    """
    if Y.chart != T.chart:
        raise ChartMismatchError("field and tensor live on different charts")
    if Y.is_zero():
        return T.chart.zero()
    parity = (int(Y.parity) + T.parity) % 2
    basis = [monomial_poly(T.chart, m) for m in all_monomials(T.chart, max_degree)]
    basis = [b for b in basis if int(b.parity) == parity]

    def flat(X: VectorField) -> dict:
        return {(a, m): c for a, comp in enumerate(X.components) for m, c in comp.terms.items()}

    coeffs = _solve([flat(hamiltonian_field(T, b)) for b in basis], flat(Y))
    if coeffs is None:
        return None
    return sum((b.scale(c) for b, c in zip(basis, coeffs) if c), T.chart.zero())

"""Supermatrices, coordinate changes and the Berezinian."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ChartMismatchError, NotInvertibleError, ParityError
from .grassmann import Chart, SuperPoly, invert


@dataclass(frozen=True)
class SuperMatrix:
    """Square matrix of SuperPolys with parity-labelled rows and columns.

    Entry ``(i, j)`` must have parity ``row_parity[i] + col_parity[j]`` (an
    even supermatrix).  Blocks are read off by parity, so rows and columns need
    not be sorted.
    """

    chart: Chart
    row_parity: tuple[int, ...]
    col_parity: tuple[int, ...]
    entries: tuple[tuple[SuperPoly, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(tuple(r) for r in self.entries))
        n, m = len(self.row_parity), len(self.col_parity)
        if len(self.entries) != n or any(len(r) != m for r in self.entries):
            raise ValueError("entry array does not match the parity labels")
        for i, j in itertools.product(range(n), range(m)):
            e = self.entries[i][j]
            if e.chart != self.chart:
                raise ChartMismatchError("supermatrix entry over a foreign chart")
            if e and e.parity != (self.row_parity[i] + self.col_parity[j]) % 2:
                raise ParityError(f"entry ({i},{j}) = {e} breaks the block parity rule")

    @classmethod
    def identity(cls, chart: Chart, parities: Sequence[int]) -> "SuperMatrix":
        n = len(parities)
        rows = [[chart.one() if i == j else chart.zero() for j in range(n)] for i in range(n)]
        return cls(chart, tuple(parities), tuple(parities), rows)

    def __matmul__(self, other: "SuperMatrix") -> "SuperMatrix":
        if self.col_parity != other.row_parity:
            raise ValueError("inner parity labels differ")
        n, k, m = len(self.row_parity), len(self.col_parity), len(other.col_parity)
        zero = self.chart.zero()
        rows = []
        for i in range(n):
            row = []
            for j in range(m):
                acc = zero
                for t in range(k):
                    acc = acc + self.entries[i][t] * other.entries[t][j]
                row.append(acc)
            rows.append(row)
        return SuperMatrix(self.chart, self.row_parity, other.col_parity, rows)

    def block(self, row_par: int, col_par: int) -> list[list[SuperPoly]]:
        ri = [i for i, p in enumerate(self.row_parity) if p == row_par]
        ci = [j for j, p in enumerate(self.col_parity) if p == col_par]
        return [[self.entries[i][j] for j in ci] for i in ri]


def _matmul(a, b, zero):
    return [[sum((a[i][t] * b[t][j] for t in range(len(b))), zero) for j in range(len(b[0]) if b else 0)]
            for i in range(len(a))]


def det_even(rows: list[list[SuperPoly]], chart: Chart) -> SuperPoly:
    """Determinant of a matrix of even entries (a commutative ring), Leibniz expansion."""
    n = len(rows)
    if n == 0:
        return chart.one()
    total = chart.zero()
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = chart.one()
        for i in range(n):
            term = term * rows[i][perm[i]]
            if not term:
                break
        if term:
            total = total - term if inv % 2 else total + term
    return total


def inverse_even(rows: list[list[SuperPoly]], chart: Chart) -> list[list[SuperPoly]]:
    """Inverse of an even-entry matrix via the adjugate; det must have invertible body."""
    n = len(rows)
    if n == 0:
        return []
    d = det_even(rows, chart)
    try:
        dinv = invert(d)
    except NotInvertibleError as exc:
        raise NotInvertibleError(f"determinant {d} is not invertible: {exc}") from None
    adj = [[chart.zero()] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[rows[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            cof = det_even(minor, chart)
            adj[j][i] = -cof if (i + j) % 2 else cof
    return [[adj[i][j] * dinv for j in range(n)] for i in range(n)]


def berezinian(J: SuperMatrix) -> SuperPoly:
    """Ber J = det(A - B D^-1 C) / det(D) with terminating inverses."""
    chart = J.chart
    if sorted(J.row_parity) != sorted(J.col_parity):
        raise ValueError("Berezinian needs matching even|odd dimensions")
    A, B = J.block(0, 0), J.block(0, 1)
    C, D = J.block(1, 0), J.block(1, 1)
    zero = chart.zero()
    try:
        Dinv = inverse_even(D, chart)
    except NotInvertibleError as exc:
        raise NotInvertibleError(f"odd-odd block: {exc}") from None
    if A:
        BDC = _matmul(_matmul(B, Dinv, zero), C, zero) if D else [[zero] * len(A) for _ in A]
        schur = [[A[i][j] - BDC[i][j] for j in range(len(A))] for i in range(len(A))]
    else:
        schur = []
    ds = det_even(schur, chart)
    body = ds.body()
    if not body.is_constant() or body.is_zero():
        raise NotInvertibleError(f"Schur complement determinant {ds} has non-invertible body {body}")
    return ds * invert(det_even(D, chart))


@dataclass(frozen=True)
class CoordinateChange:
    """New coordinates expressed as SuperPolys over the old chart.

    ``images`` maps each target-chart variable name to its expression over
    ``source``.  Applying the change to a function of the new coordinates is
    :func:`substitute`.
    """

    source: Chart
    target: Chart
    images: Mapping[str, SuperPoly]

    def __post_init__(self):
        imgs = dict(self.images)
        missing = set(self.target.names) - set(imgs)
        if missing:
            raise ValueError(f"coordinate change lacks images for {sorted(missing)}")
        for v in self.target:
            img = imgs[v.name]
            if img.chart != self.source:
                raise ChartMismatchError(f"image of {v.name} is not over the source chart")
            if img and (not img.is_homogeneous() or img.parity != v.parity):
                raise ParityError(f"image of {v.name} = {img} does not have parity {v.parity.name.lower()}")
        object.__setattr__(self, "images", {n: imgs[n] for n in self.target.names})

    @classmethod
    def identity(cls, chart: Chart) -> "CoordinateChange":
        return cls(chart, chart, {n: chart.var(n) for n in chart.names})

    def jacobian(self) -> SuperMatrix:
        """Matrix of left derivatives d x'^a / d x^b, row b (old), column a (new).

        With left derivatives the chain rule reads d_b = sum_a (d_b x'^a) d'_a,
        so this arrangement composes by plain matrix multiplication.
        """
        rows = [[self.images[t].diff(s) for t in self.target.names] for s in self.source.names]
        return SuperMatrix(self.source, self.source.parities, self.target.parities, rows)

    def berezinian(self) -> SuperPoly:
        return berezinian(self.jacobian())

    def then(self, other: "CoordinateChange") -> "CoordinateChange":
        """Apply ``self`` first, then ``other`` (whose source is our target)."""
        if other.source != self.target:
            raise ChartMismatchError("changes are not composable")
        return CoordinateChange(
            self.source, other.target, {n: substitute(img, self) for n, img in other.images.items()}
        )


def substitute(f: SuperPoly, change: CoordinateChange) -> SuperPoly:
    """f(x'(x)): rewrite a function of the new coordinates over the old chart."""
    if f.chart != change.target:
        raise ChartMismatchError("function is not over the change's target chart")
    src = change.source
    imgs = [change.images[n] for n in change.target.names]
    # normal order is the product of factors in chart order, which the
    # homomorphism preserves term by term
    out = src.zero()
    power_cache: dict[tuple[int, int], SuperPoly] = {}
    for mono, c in f.terms.items():
        term = SuperPoly.constant(src, c)
        for i, e in enumerate(mono):
            if not e:
                continue
            key = (i, e)
            if key not in power_cache:
                power_cache[key] = imgs[i] ** e
            term = term * power_cache[key]
            if not term:
                break
        out = out + term
    return out


__all__ = [
    "SuperMatrix",
    "CoordinateChange",
    "berezinian",
    "det_even",
    "inverse_even",
    "substitute",
]

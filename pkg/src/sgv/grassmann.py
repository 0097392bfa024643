"""Exact supercommutative polynomials over the rationals.

A :class:`Chart` is an ordered list of even and odd variables.  A monomial is
stored as a tuple of exponents in chart order and *means* the ordered product
of its even powers followed by its odd factors in ascending chart order; odd
exponents are 0 or 1.  Because the stored form is canonical, structural
equality of term maps is semantic equality.

Derivatives are left derivatives: to differentiate by an odd variable it is
first anticommuted to the leftmost slot, then deleted.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Union

from .errors import (
    ChartMismatchError,
    NotNilpotentError,
    ParityError,
    UnknownVariableError,
)

Scalar = Union[int, Fraction]
Monomial = tuple


class Parity(enum.IntEnum):
    EVEN = 0
    ODD = 1

    def __add__(self, other):
        return Parity((int(self) + int(other)) % 2)

    __radd__ = __add__

    @classmethod
    def parse(cls, value) -> "Parity":
        if isinstance(value, Parity):
            return value
        if value in (0, 1):
            return cls(value)
        try:
            return cls[str(value).upper()]
        except KeyError:
            raise ParityError(f"unknown parity {value!r}") from None


@dataclass(frozen=True)
class Variable:
    name: str
    parity: Parity

    def __post_init__(self):
        object.__setattr__(self, "parity", Parity.parse(self.parity))

    @property
    def is_odd(self) -> bool:
        return self.parity is Parity.ODD


@dataclass(frozen=True)
class Chart:
    """An ordered coordinate system; the order fixes the monomial normal form."""

    variables: tuple[Variable, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if not self.variables:
            raise ValueError("a chart needs at least one variable")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in chart: {names}")

    @classmethod
    def from_spec(cls, spec: Iterable[tuple[str, object]]) -> "Chart":
        """Build from ``[(name, parity), ...]`` pairs."""
        return cls(tuple(Variable(n, Parity.parse(p)) for n, p in spec))

    def __len__(self) -> int:
        return len(self.variables)

    def __iter__(self) -> Iterator[Variable]:
        return iter(self.variables)

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @cached_property
    def parities(self) -> tuple[int, ...]:
        return tuple(int(v.parity) for v in self.variables)

    @cached_property
    def odd_positions(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.parities) if p)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {v.name: i for i, v in enumerate(self.variables)}

    def index(self, var: Union[str, Variable, int]) -> int:
        if isinstance(var, int):
            if 0 <= var < len(self.variables):
                return var
            raise UnknownVariableError(f"variable index {var} out of range")
        name = var.name if isinstance(var, Variable) else var
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariableError(f"unknown variable {name!r} for chart {self.names}") from None

    def var(self, name: str) -> "SuperPoly":
        """The coordinate function of the named variable."""
        i = self.index(name)
        mono = tuple(1 if j == i else 0 for j in range(len(self)))
        return SuperPoly._raw(self, {mono: Fraction(1)})

    def coords(self) -> list["SuperPoly"]:
        return [self.var(n) for n in self.names]

    def one(self) -> "SuperPoly":
        return SuperPoly.constant(self, 1)

    def zero(self) -> "SuperPoly":
        return SuperPoly._raw(self, {})

    @cached_property
    def unit_monomial(self) -> Monomial:
        return (0,) * len(self.variables)

    def extend(self, extra: Iterable[Variable]) -> "Chart":
        return Chart(self.variables + tuple(extra))


def monomial_parity(chart: Chart, mono: Monomial) -> int:
    return sum(mono[i] for i in chart.odd_positions) % 2


def _mono_mul(chart: Chart, m1: Monomial, m2: Monomial):
    """Product of two normal-ordered monomials as ``(sign, monomial)`` or None."""
    odd = chart.odd_positions
    inversions = 0
    seen_after = 0
    # walk odd slots right to left, counting m1 factors that m2 factors must pass
    for i in reversed(odd):
        a, b = m1[i], m2[i]
        if a and b:
            return None
        if b:
            inversions += seen_after
        if a:
            seen_after += 1
    mono = tuple(x + y for x, y in zip(m1, m2))
    return (-1 if inversions % 2 else 1), mono


def _coerce_scalar(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int) and not isinstance(c, bool):
        return Fraction(c)
    raise TypeError(f"expected an exact rational, got {type(c).__name__}")


class SuperPoly:
    """Immutable polynomial in even and odd variables with rational coefficients."""

    __slots__ = ("chart", "terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping[Monomial, Scalar] | None = None):
        clean: dict[Monomial, Fraction] = {}
        n = len(chart)
        for mono, c in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != n or any(e < 0 for e in mono):
                raise ValueError(f"bad monomial {mono} for chart {chart.names}")
            if any(mono[i] > 1 for i in chart.odd_positions):
                continue  # odd squares vanish
            c = _coerce_scalar(c)
            if c:
                clean[mono] = clean.get(mono, Fraction(0)) + c
        self.chart = chart
        self.terms = {m: c for m, c in clean.items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, chart: Chart, terms: dict) -> "SuperPoly":
        obj = cls.__new__(cls)
        obj.chart = chart
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, chart: Chart, c: Scalar) -> "SuperPoly":
        c = _coerce_scalar(c)
        return cls._raw(chart, {chart.unit_monomial: c} if c else {})

    # -- structure -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def parities(self) -> set[int]:
        return {monomial_parity(self.chart, m) for m in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.parities()) <= 1

    @property
    def parity(self) -> Parity:
        """Parity of a homogeneous polynomial; zero counts as even."""
        ps = self.parities()
        if len(ps) > 1:
            raise ParityError(f"polynomial {self} has no definite parity")
        return Parity(ps.pop() if ps else 0)

    def body(self) -> "SuperPoly":
        """The part free of odd variables."""
        odd = self.chart.odd_positions
        return SuperPoly._raw(
            self.chart, {m: c for m, c in self.terms.items() if not any(m[i] for i in odd)}
        )

    def soul(self) -> "SuperPoly":
        return self - self.body()

    def is_nilpotent(self) -> bool:
        return self.body().is_zero()

    def constant_term(self) -> Fraction:
        return self.terms.get(self.chart.unit_monomial, Fraction(0))

    def is_constant(self) -> bool:
        return all(m == self.chart.unit_monomial for m in self.terms)

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def depends_on(self, var) -> bool:
        i = self.chart.index(var)
        return any(m[i] for m in self.terms)

    # -- arithmetic ------------------------------------------------------
    def _check(self, other: "SuperPoly") -> None:
        if other.chart != self.chart:
            raise ChartMismatchError(f"charts differ: {self.chart.names} vs {other.chart.names}")

    def _lift(self, other) -> "SuperPoly":
        if isinstance(other, SuperPoly):
            self._check(other)
            return other
        return SuperPoly.constant(self.chart, _coerce_scalar(other))

    def __add__(self, other) -> "SuperPoly":
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        terms = dict(self.terms)
        for m, c in other.terms.items():
            s = terms.get(m, 0) + c
            if s:
                terms[m] = s
            else:
                terms.pop(m, None)
        return SuperPoly._raw(self.chart, terms)

    __radd__ = __add__

    def __neg__(self) -> "SuperPoly":
        return SuperPoly._raw(self.chart, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "SuperPoly":
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "SuperPoly":
        return (-self) + other

    def scale(self, c: Scalar) -> "SuperPoly":
        c = _coerce_scalar(c)
        if not c:
            return self.chart.zero()
        return SuperPoly._raw(self.chart, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other) -> "SuperPoly":
        if not isinstance(other, SuperPoly):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        self._check(other)
        chart = self.chart
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                r = _mono_mul(chart, m1, m2)
                if r is None:
                    continue
                sign, m = r
                v = out.get(m, 0) + (c1 * c2 if sign > 0 else -c1 * c2)
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return SuperPoly._raw(chart, out)

    def __rmul__(self, other) -> "SuperPoly":
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __truediv__(self, other) -> "SuperPoly":
        if isinstance(other, SuperPoly):
            if not other.is_constant() or other.is_zero():
                raise TypeError("division only by nonzero rational constants")
            other = other.constant_term()
        return self.scale(1 / _coerce_scalar(other))

    def __pow__(self, n: int) -> "SuperPoly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        result = self.chart.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, SuperPoly):
            return self.chart == other.chart and self.terms == other.terms
        try:
            c = _coerce_scalar(other)
        except TypeError:
            return NotImplemented
        return self.terms == ({self.chart.unit_monomial: c} if c else {})

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.chart, frozenset(self.terms.items())))
        return self._hash

    # -- calculus --------------------------------------------------------
    def diff(self, var) -> "SuperPoly":
        """Left partial derivative by ``var`` (name, Variable or index)."""
        chart = self.chart
        i = chart.index(var)
        out: dict[Monomial, Fraction] = {}
        if chart.parities[i]:
            odd_before = [j for j in chart.odd_positions if j < i]
            for m, c in self.terms.items():
                if not m[i]:
                    continue
                sign = sum(m[j] for j in odd_before) % 2
                nm = m[:i] + (0,) + m[i + 1:]
                out[nm] = -c if sign else c
        else:
            for m, c in self.terms.items():
                e = m[i]
                if not e:
                    continue
                nm = m[:i] + (e - 1,) + m[i + 1:]
                out[nm] = c * e
        return SuperPoly._raw(chart, out)

    def embed(self, chart: Chart) -> "SuperPoly":
        """Re-express over a chart whose leading variables are this chart's."""
        if chart.variables[: len(self.chart)] != self.chart.variables:
            raise ChartMismatchError(f"{chart.names} does not extend {self.chart.names}")
        pad = (0,) * (len(chart) - len(self.chart))
        return SuperPoly._raw(chart, {m + pad: c for m, c in self.terms.items()})

    def restrict(self, chart: Chart) -> "SuperPoly":
        """Inverse of :meth:`embed`; fails if a dropped variable occurs."""
        n = len(chart)
        if self.chart.variables[:n] != chart.variables:
            raise ChartMismatchError(f"{self.chart.names} does not extend {chart.names}")
        out = {}
        for m, c in self.terms.items():
            if any(m[n:]):
                raise ChartMismatchError(f"{self} depends on variables outside {chart.names}")
            out[m[:n]] = c
        return SuperPoly._raw(chart, out)

    # -- display ---------------------------------------------------------
    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), tuple(-e for e in t[0])))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = self.chart.names
        pieces = []
        for mono, c in self.sorted_terms():
            factors = []
            for name, e in zip(names, mono):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mag = abs(c)
            if not factors:
                body = _fmt_fraction(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = _fmt_fraction(mag) + "*" + "*".join(factors)
            pieces.append(("-" if c < 0 else "+", body))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"SuperPoly({self})"


def _fmt_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def all_monomials(chart: Chart, max_degree: int) -> list[Monomial]:
    """Normal-ordered monomials of total degree <= max_degree, deterministic order."""
    n = len(chart)
    odd = set(chart.odd_positions)
    out: list[Monomial] = []

    def rec(i: int, left: int, acc: list[int]):
        if i == n:
            out.append(tuple(acc))
            return
        top = min(left, 1) if i in odd else left
        for e in range(top + 1):
            acc.append(e)
            rec(i + 1, left - e, acc)
            acc.pop()

    rec(0, max_degree, [])
    out.sort(key=lambda m: (sum(m), tuple(-e for e in m)))
    return out


def monomial_poly(chart: Chart, mono: Monomial, coeff: Scalar = 1) -> SuperPoly:
    return SuperPoly._raw(chart, {tuple(mono): _coerce_scalar(coeff)})


# -- terminating series on nilpotent elements --------------------------------

def _series(u: SuperPoly, coeffs) -> SuperPoly:
    if not u.is_nilpotent():
        raise NotNilpotentError(f"series needs an element with zero body, got {u}")
    result = u.chart.zero()
    power = u.chart.one()
    k = 0
    while power:
        result = result + power.scale(coeffs(k))
        power = power * u
        k += 1
    return result


def exp_nilpotent(u: SuperPoly) -> SuperPoly:
    return _series(u, lambda k: Fraction(1, math.factorial(k)))


def log_one_plus(u: SuperPoly) -> SuperPoly:
    """log(1 + u) for nilpotent u."""
    return _series(u, lambda k: Fraction(0) if k == 0 else Fraction((-1) ** (k + 1), k))


def binomial(r: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for j in range(k):
        out *= (r - j) / (j + 1)
    return out


def power_one_plus(u: SuperPoly, r: Scalar) -> SuperPoly:
    """(1 + u)**r for nilpotent u and rational r."""
    r = _coerce_scalar(r)
    return _series(u, lambda k: binomial(r, k))


def sqrt_one_plus(u: SuperPoly) -> SuperPoly:
    return power_one_plus(u, Fraction(1, 2))


def inverse_one_plus(u: SuperPoly) -> SuperPoly:
    return _series(u, lambda k: Fraction((-1) ** k))


def rational_sqrt(c: Fraction) -> Fraction | None:
    c = Fraction(c)
    if c < 0:
        return None
    p, q = math.isqrt(c.numerator), math.isqrt(c.denominator)
    if p * p == c.numerator and q * q == c.denominator:
        return Fraction(p, q)
    return None


def invert(u: SuperPoly) -> SuperPoly:
    """Inverse of ``c + nilpotent`` with c a nonzero rational constant."""
    from .errors import NotInvertibleError

    body = u.body()
    if not body.is_constant() or body.is_zero():
        raise NotInvertibleError(f"{u} has body {body}, which is not a nonzero constant")
    c = body.constant_term()
    return inverse_one_plus(u.scale(1 / c) - 1).scale(1 / c)

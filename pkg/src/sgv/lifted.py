"""Functions on T*M and Pi T*M: canonical brackets and the Schouten-Lichnerowicz differential.

Base coordinates ``x^a`` are followed by one fibre coordinate per base
variable.  On ``T*M`` (``shift=False``) the momentum ``p_a`` has the parity of
``x^a`` and the canonical bracket is even; on ``Pi T*M`` (``shift=True``) the
antimomentum ``x*_a`` has the opposite parity and the canonical bracket is odd.

With left derivatives, ``q_a`` the fibre coordinate and ``e`` the bracket
parity (0 on ``T*M``, 1 on ``Pi T*M``)::

    (F, G) = sum_a (-1)^((a+e)(F+1)) dF/dq_a dG/dx^a - (-1)^(a(F+e)) dF/dx^a dG/dq_a

This is graded antisymmetric and satisfies the graded Jacobi identity for
both values of ``e``; ``(p_x, x) = 1`` for an even ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import ChartMismatchError, JacobiError
from .grassmann import Chart, Parity, SuperPoly, Variable


@dataclass(frozen=True)
class LiftedChart:
    base: Chart
    shift: bool

    @cached_property
    def fiber_variables(self) -> tuple[Variable, ...]:
        if self.shift:
            return tuple(Variable(f"{v.name}*", v.parity + 1) for v in self.base)
        return tuple(Variable(f"p_{v.name}", v.parity) for v in self.base)

    @cached_property
    def chart(self) -> Chart:
        return self.base.extend(self.fiber_variables)

    @property
    def bracket_parity(self) -> int:
        return 1 if self.shift else 0

    def fiber(self, a: int) -> SuperPoly:
        return self.chart.var(self.fiber_variables[a].name)

    def embed(self, f: SuperPoly) -> SuperPoly:
        return f.embed(self.chart)

    def momentum_degree(self, F: SuperPoly) -> int:
        """Total fibre degree; -1 for zero, raises if terms disagree."""
        n = len(self.base)
        degs = {sum(m[n:]) for m in F.terms}
        if len(degs) > 1:
            raise ValueError(f"{F} mixes momentum degrees {sorted(degs)}")
        return degs.pop() if degs else -1


def canonical_bracket(lc: LiftedChart, F: SuperPoly, G: SuperPoly) -> SuperPoly:
    if F.chart != lc.chart or G.chart != lc.chart:
        raise ChartMismatchError("canonical bracket needs functions on the lifted chart")
    if not F or not G:
        return lc.chart.zero()
    fp = int(F.parity)
    eps = lc.bracket_parity
    n = len(lc.base)
    names = lc.chart.names
    out = lc.chart.zero()
    for a, pa in enumerate(lc.base.parities):
        qa, xa = names[n + a], names[a]
        dFq = F.diff(qa)
        if dFq:
            t = dFq * G.diff(xa)
            out = out - t if ((pa + eps) * (fp + 1)) % 2 else out + t
        dGq = G.diff(qa)
        if dGq:
            t = F.diff(xa) * dGq
            out = out + t if (pa * (fp + eps)) % 2 else out - t
    return out


def lift_tensor(T) -> SuperPoly:
    """Quadratic Hamiltonian 1/2 T^{ab} q_b q_a over the kind's lifted chart."""
    lc = T.lifted_chart
    out = lc.chart.zero()
    half = Fraction(1, 2)
    for (a, b), entry in T.entries.items():
        out = out + lc.embed(entry) * lc.fiber(b) * lc.fiber(a)
    return out.scale(half)


def lift_vector_field(lc: LiftedChart, Y) -> SuperPoly:
    """The fibrewise-linear function Y^a q_a of a vector field."""
    out = lc.chart.zero()
    for a, comp in enumerate(Y.components):
        if comp:
            out = out + lc.embed(comp) * lc.fiber(a)
    return out


def sl_differential(lc: LiftedChart, S: SuperPoly, F: SuperPoly, check: bool = True) -> SuperPoly:
    """D(F) = (S, F); refuses an S with (S, S) != 0."""
    if check and canonical_bracket(lc, S, S):
        raise JacobiError("(S, S) != 0: the differential would not square to zero")
    return canonical_bracket(lc, S, F)


def is_poisson_field(T, Y) -> bool:
    """True iff D(Y^a q_a) = 0, i.e. Y differentiates the bracket."""
    lc = T.lifted_chart
    return not sl_differential(lc, lift_tensor(T), lift_vector_field(lc, Y), check=False)


def derivation_defect(T, Y, f: SuperPoly, g: SuperPoly) -> SuperPoly:
    """Y{f,g} - {Yf,g} - (-1)^(Y(f+eps)) {f,Yg}; zero for every pair iff Y is Poisson."""
    from .geometry import apply_field, bracket

    eps = T.parity
    yp = int(Y.parity)
    sign = -1 if (yp * (int(f.parity) + eps)) % 2 else 1
    lhs = apply_field(Y, bracket(T, f, g))
    rhs = bracket(T, apply_field(Y, f), g) + bracket(T, f, apply_field(Y, g)).scale(sign)
    return lhs - rhs


def is_poisson_field_direct(T, Y) -> tuple[bool, tuple[SuperPoly, SuperPoly] | None]:
    coords = T.chart.coords()
    for f in coords:
        for g in coords:
            if derivation_defect(T, Y, f, g):
                return False, (f, g)
    return True, None


__all__ = [
    "LiftedChart",
    "Parity",
    "canonical_bracket",
    "lift_tensor",
    "lift_vector_field",
    "sl_differential",
    "is_poisson_field",
    "is_poisson_field_direct",
    "derivation_defect",
]

"""The identity catalog: one case per identity, each an exact check on probes.

Every checker returns ``None`` (pass), a :class:`Witness` (fail) or a
:class:`Skip`.  Operators are compared on the probe basis; a differential
operator of order k with polynomial coefficients is determined by its values
on monomials of degree <= k, so degree 3 covers every second-order identity.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable

from .bv import bv_lemma
from .errors import SGVError
from .geometry import (
    GeometryKind,
    StructureTensor,
    VectorField,
    apply_field,
    bracket,
    bracket_lifted,
    field_commutator,
    hamiltonian_field,
    is_casimir,
)
from .grassmann import SuperPoly, Variable, exp_nilpotent
from .groupoid import (
    GroupoidArrow,
    arrow_valid,
    compose,
    invert,
    lambda_counterexample,
    orbit_invariant_check,
)
from .harness import Context, IdentityCase, Skip, Witness, probe_basis
from .laplace import (
    Density,
    VolumeForm,
    cocycle_H,
    commutator_defect,
    coordinate_delta0,
    divergence,
    laplace_density,
    laplace_fn,
    laplace_fn_coordinates,
    lie_derivative_density,
    modular_field,
)
from .lifted import (
    canonical_bracket,
    is_poisson_field,
    is_poisson_field_direct,
    lift_vector_field,
    sl_differential,
)

K = GeometryKind
ALL = frozenset(K)
POISSON = frozenset({K.ODD_POISSON, K.EVEN_POISSON})
ODD_POISSON = frozenset({K.ODD_POISSON})
SECOND_ORDER = frozenset({K.ODD_POISSON, K.EVEN_RIEMANNIAN})
RIEMANNIAN = frozenset({K.EVEN_RIEMANNIAN, K.ODD_RIEMANNIAN})
EVEN_RIEMANNIAN = frozenset({K.EVEN_RIEMANNIAN})

HALF = Fraction(1, 2)
WEIGHTS = (Fraction(0), HALF, Fraction(1), Fraction(2))
EXP_FACTORS = (Fraction(1), HALF, Fraction(2))


def sgn(e: int) -> int:
    return -1 if e % 2 else 1


def first_mismatch(items: Iterable[tuple[object, object, object]]) -> Witness | None:
    for probe, lhs, rhs in items:
        if lhs != rhs:
            return Witness(str(probe), str(lhs), str(rhs))
    return None


def par(f: SuperPoly) -> int:
    return int(f.parity)


# -- shared setups ------------------------------------------------------------


class Extended:
    """The structure over its chart plus four odd constants eps_1..eps_4.

    Products such as eps_1*eps_2*x are even and nilpotent on any chart, which
    gives exponential and finite-shift identities something to bite on even
    when the chart itself has too few odd variables.
    """

    def __init__(self, ctx: Context):
        base = ctx.chart
        names = []
        i = 1
        while len(names) < 4:
            n = f"eps_{i}"
            if n not in base.names:
                names.append(n)
            i += 1
        self.chart = base.extend(Variable(n, 1) for n in names)
        T = ctx.T
        self.T = StructureTensor(self.chart, T.kind, {k: v.embed(self.chart) for k, v in T.entries.items()})
        self.eps = [self.chart.var(n) for n in names]
        self.coordinate = VolumeForm.coordinate(self.chart)
        self.volumes = [(n, VolumeForm(self.chart, v.sigma.embed(self.chart))) for n, v in ctx.volume_items]
        self.pair_probes = [p.embed(self.chart) for p in ctx.pair_probes]
        self.probes = [p.embed(self.chart) for p in ctx.probes]
        e1, e2, e3, e4 = self.eps
        evens = [p for p in self.pair_probes if par(p) == 0 and not p.is_constant()]
        odds = [p for p in self.pair_probes if par(p) == 1]
        nil = [p for p in self.pair_probes if par(p) == 0 and p and p.is_nilpotent()]
        nil += [e1 * e2 * p for p in evens[:3]]
        if len(evens) >= 2:
            nil.append(e1 * e2 * evens[0] + e3 * e4 * evens[1])
        elif evens:
            nil.append(e1 * e2 * evens[0] + e3 * e4 * evens[0] * evens[0])
        if odds:
            nil.append(e1 * odds[0] + e3 * e4)
        seen = []
        for p in nil:
            if p and p not in seen:
                seen.append(p)
        self.nilpotent_evens = seen

    def nilpotent_volume_pairs(self):
        """(rho, rho') with nilpotent log-ratio: declared pairs plus shifted copies."""
        out = []
        vols = self.volumes or [("Dx", self.coordinate)]
        for (n1, v1), (n2, v2) in itertools.permutations(vols, 2):
            if (v2.sigma - v1.sigma).is_nilpotent():
                out.append((n1, v1, n2, v2))
        for (n, v), u in itertools.product(vols[:2], self.nilpotent_evens[:4]):
            out.append((n, v, f"{n}*exp({u})", v.shifted(u)))
        return out


def extended(ctx: Context) -> Extended:
    if "extended" not in ctx.cache:
        ctx.cache["extended"] = Extended(ctx)
    return ctx.cache["extended"]


def darboux_skip(ctx: Context) -> Skip | None:
    pairs = ctx.structure.pairs
    if not pairs:
        return Skip("precondition unmet: no Darboux pairs declared")
    if ctx.T != StructureTensor.darboux(ctx.chart, pairs):
        return Skip("precondition unmet: the tensor is not the Darboux tensor of the declared pairs")
    return None


def volumes_or_coordinate(ctx: Context) -> list[tuple[str, VolumeForm]]:
    return ctx.volume_items or [("Dx", VolumeForm.coordinate(ctx.chart))]


# -- lifting and brackets -----------------------------------------------------


def check_lift_quadratic(ctx: Context):
    T = ctx.T
    lifted = T.lifted
    if not T.entries:
        return first_mismatch([("lift", lifted, T.lifted_chart.chart.zero())])
    lc = T.lifted_chart
    if par(lifted) != T.parity or lc.momentum_degree(lifted) != 2:
        return Witness("lift", f"parity {par(lifted)}, momentum degree {lc.momentum_degree(lifted)}",
                       f"parity {T.parity}, momentum degree 2")
    half = lc.chart.zero()
    for (a, b), e in T.entries.items():
        if a < b:
            half = half + lc.embed(e) * lc.fiber(b) * lc.fiber(a)
        elif a == b:
            half = half + (lc.embed(e) * lc.fiber(a) * lc.fiber(a)).scale(HALF)
    return first_mismatch([("upper triangle of the lift", lifted, half)])


def check_bracket_lift(ctx: Context):
    T = ctx.T
    lc = T.lifted_chart
    s = T.kind.lift_sign

    def items():
        for f, g in itertools.product(ctx.pair_probes, repeat=2):
            direct = bracket(T, f, g)
            yield f"f={f}, g={g}", direct, bracket_lifted(T, f, g)
            if T.kind.is_poisson:
                F, G = lc.embed(f), lc.embed(g)
                outer = canonical_bracket(lc, canonical_bracket(lc, F, T.lifted), G).restrict(T.chart)
                yield f"f={f}, g={g} (left nesting)", direct, outer.scale(s)

    return first_mismatch(items())


def check_hamiltonian_field(ctx: Context):
    T = ctx.T

    def items():
        for f in ctx.pair_probes:
            X = hamiltonian_field(T, f)
            if X and int(X.parity) != (par(f) + T.parity) % 2:
                yield f"X_f parity, f={f}", int(X.parity), (par(f) + T.parity) % 2
            for g in ctx.pair_probes:
                want = bracket_lifted(T, f, g).scale(T.kind.field_sign(par(f)))
                yield f"f={f}, g={g}", apply_field(X, g), want

    return first_mismatch(items())


def check_field_of_bracket(ctx: Context):
    T = ctx.T

    def items():
        for f, g in itertools.product(ctx.pair_probes, repeat=2):
            lhs = hamiltonian_field(T, bracket(T, f, g))
            rhs = field_commutator(hamiltonian_field(T, f), hamiltonian_field(T, g))
            yield f"f={f}, g={g}", lhs, rhs

    return first_mismatch(items())


def check_field_of_product(ctx: Context):
    T = ctx.T
    e = T.parity

    def items():
        for f, g in itertools.product(ctx.pair_probes, repeat=2):
            pf, pg = par(f), par(g)
            lhs = hamiltonian_field(T, f * g)
            rhs = hamiltonian_field(T, g).times(f).scale(sgn(e * pf)) + hamiltonian_field(T, f).times(g).scale(
                sgn(e * pg + pf * pg)
            )
            yield f"f={f}, g={g}", lhs, rhs

    return first_mismatch(items())


def check_lie_on_functions(ctx: Context):
    T = ctx.T

    def items():
        for f in ctx.pair_probes:
            X = hamiltonian_field(T, f)
            xp = int(X.parity)
            for g in ctx.pair_probes:
                Xg = apply_field(X, g)
                yield f"f={f}, g={g}", Xg, bracket(T, f, g).scale(T.kind.field_sign(par(f)))
                for h in ctx.pair_probes:
                    lhs = apply_field(X, g * h) - (g * apply_field(X, h)).scale(sgn(xp * par(g)))
                    yield f"f={f}, g={g}, h={h}", lhs, Xg * h

    return first_mismatch(items())


def check_lie_commutator(ctx: Context):
    T = ctx.T

    def items():
        pp = ctx.pair_probes
        fields = {str(f): hamiltonian_field(T, f) for f in pp}
        for f, g in itertools.product(pp, repeat=2):
            Xf, Xg = fields[str(f)], fields[str(g)]
            Xfg = hamiltonian_field(T, bracket(T, f, g))
            s = sgn(int(Xf.parity) * int(Xg.parity))
            for h in ctx.probes[: len(pp)]:
                lhs = apply_field(Xf, apply_field(Xg, h)) - apply_field(Xg, apply_field(Xf, h)).scale(s)
                yield f"f={f}, g={g}, h={h}", lhs, apply_field(Xfg, h)

    return first_mismatch(items())


# -- Laplacians on functions ------------------------------------------------


def first_principles_divergence(rho: VolumeForm, X: VectorField) -> SuperPoly:
    """rho^-1 sum (-1)^(a(X+1)) d_a(rho X^a) with rho = e^sigma formed explicitly (nilpotent sigma)."""
    rho_fn = exp_nilpotent(rho.sigma)
    out = rho.chart.zero()
    for a, comp in enumerate(X.components):
        term = (rho_fn * comp).diff(a)
        out = out + term.scale(sgn(rho.chart.parities[a] * (int(X.parity) + 1)))
    return exp_nilpotent(-rho.sigma) * out


def check_laplace_divergence(ctx: Context):
    ext = extended(ctx)
    T = ext.T
    vols = [ext.coordinate] + [v for _, v in ext.volumes if v.sigma.is_nilpotent()]
    vols += [ext.coordinate.shifted(u) for u in ext.nilpotent_evens[:3]]

    def items():
        for rho in vols:
            for f in ext.pair_probes:
                X = hamiltonian_field(T, f)
                lap = laplace_fn(T, rho, f)
                yield f"f={f}, sigma={rho.sigma}", lap, first_principles_divergence(rho, X)
                unit = Density(1, T.chart.one(), rho)
                yield f"f={f}, sigma={rho.sigma} (L_X rho / rho)", lap, lie_derivative_density(X, unit).coefficient

    return first_mismatch(items())


def check_divergence_product(ctx: Context):
    T = ctx.T

    def items():
        for _, rho in volumes_or_coordinate(ctx):
            for f, g in itertools.product(ctx.pair_probes, repeat=2):
                X = hamiltonian_field(T, f)
                lhs = divergence(rho, X.times(g))
                rhs = g * divergence(rho, X) + apply_field(X, g).scale(sgn(int(X.parity) * par(g)))
                yield f"X=X_({f}), f={g}, sigma={rho.sigma}", lhs, rhs

    return first_mismatch(items())


def check_laplace_coordinates(ctx: Context):
    T = ctx.T

    def items():
        for _, rho in volumes_or_coordinate(ctx):
            for f in ctx.probes:
                yield f"f={f}, sigma={rho.sigma}", laplace_fn(T, rho, f), laplace_fn_coordinates(T, rho, f)

    return first_mismatch(items())


def check_bracket_derivation(ctx: Context):
    T = ctx.T

    def items():
        for _, rho in volumes_or_coordinate(ctx):
            L = lambda u: laplace_fn(T, rho, u)
            for f, g in itertools.product(ctx.pair_probes, repeat=2):
                lhs = L(bracket(T, f, g))
                rhs = bracket(T, L(f), g) + bracket(T, f, L(g)).scale(sgn(par(f) + 1))
                yield f"f={f}, g={g}, sigma={rho.sigma}", lhs, rhs

    return first_mismatch(items())


def check_laplace_field_commutator(ctx: Context):
    T = ctx.T

    def items():
        for _, rho in volumes_or_coordinate(ctx):
            L = lambda u: laplace_fn(T, rho, u)
            for f in ctx.pair_probes:
                X = hamiltonian_field(T, f)
                XL = hamiltonian_field(T, L(f))
                for h in ctx.probes:
                    lhs = L(apply_field(X, h)) - apply_field(X, L(h)).scale(sgn(int(X.parity)))
                    yield f"f={f}, h={h}, sigma={rho.sigma}", lhs, -apply_field(XL, h)

    return first_mismatch(items())


def check_product_rule(ctx: Context):
    T = ctx.T

    def items():
        for _, rho in volumes_or_coordinate(ctx):
            L = lambda u: laplace_fn(T, rho, u)
            for f, g in itertools.product(ctx.pair_probes, repeat=2):
                rhs = L(f) * g + (f * L(g)).scale(sgn(par(f))) + bracket(T, f, g).scale(2 * sgn(par(f) + 1))
                yield f"f={f}, g={g}, sigma={rho.sigma}", L(f * g), rhs

    return first_mismatch(items())


def check_function_commutator(ctx: Context):
    T = ctx.T

    def items():
        for _, rho in volumes_or_coordinate(ctx):
            L = lambda u: laplace_fn(T, rho, u)
            for f in ctx.pair_probes:
                X = hamiltonian_field(T, f)
                Lf = L(f)
                for h in ctx.probes:
                    lhs = L(f * h) - (f * L(h)).scale(sgn(par(f)))
                    yield f"f={f}, h={h}, sigma={rho.sigma}", lhs, apply_field(X, h).scale(2) + Lf * h

    return first_mismatch(items())


def check_power_rule(ctx: Context):
    T = ctx.T
    evens = [p for p in ctx.pair_probes if par(p) == 0 and not p.is_constant()]
    if len(evens) >= 2:
        evens.append(evens[0] + evens[-1])

    def items():
        for _, rho in volumes_or_coordinate(ctx):
            L = lambda u: laplace_fn(T, rho, u)
            for f in evens:
                Lf, ff = L(f), bracket(T, f, f)
                for n in range(1, 5):
                    rhs = (f ** (n - 1) * Lf).scale(n)
                    if n >= 2:
                        rhs = rhs - (f ** (n - 2) * ff).scale(n * (n - 1))
                    yield f"f={f}, n={n}, sigma={rho.sigma}", L(f ** n), rhs

    return first_mismatch(items())


def _exp_rule_items(ctx: Context):
    ext = extended(ctx)
    T = ext.T
    c = T.kind.exp_sign
    vols = [ext.coordinate] + [v for _, v in ext.volumes]
    for rho in vols:
        L = lambda u: laplace_fn(T, rho, u)
        for f in ext.nilpotent_evens:
            for k in EXP_FACTORS:
                e = exp_nilpotent(f.scale(k))
                rhs = ((L(f) + bracket(T, f, f).scale(c * k)) * e).scale(k)
                yield f"f={f}, k={k}, sigma={rho.sigma}", L(e), rhs


def check_exponential_rule(ctx: Context):
    return first_mismatch(_exp_rule_items(ctx))


def check_volume_change(ctx: Context):
    T = ctx.T

    def items():
        for n1, r1, n2, r2 in ctx.volume_pairs() or []:
            sigma = r1.shift_to(r2)
            Xs = hamiltonian_field(T, sigma)
            for h in ctx.probes:
                yield f"h={h}, rho={n1}, rho'={n2}", laplace_fn(T, r2, h), laplace_fn(T, r1, h) + apply_field(Xs, h)

    if len(volumes_or_coordinate(ctx)) < 2:
        return _volume_change_fallback(ctx)
    return first_mismatch(items())


def _volume_change_fallback(ctx: Context):
    T = ctx.T
    rho = volumes_or_coordinate(ctx)[0][1]

    def items():
        for sigma in [p for p in ctx.pair_probes if par(p) == 0 and not p.is_constant()][:3]:
            Xs = hamiltonian_field(T, sigma)
            for h in ctx.probes:
                yield f"h={h}, sigma={sigma}", laplace_fn(T, rho.shifted(sigma), h), laplace_fn(T, rho, h) + apply_field(Xs, h)

    return first_mismatch(items())


# -- Darboux structures and half-densities ------------------------------------


def check_darboux_decomposition(ctx: Context):
    skip = darboux_skip(ctx)
    if skip:
        return skip
    T, pairs = ctx.T, ctx.structure.pairs

    def items():
        for _, rho in volumes_or_coordinate(ctx):
            X = hamiltonian_field(T, rho.sigma)
            for h in ctx.probes:
                rhs = coordinate_delta0(ctx.chart, pairs, h) + apply_field(X, h)
                yield f"h={h}, sigma={rho.sigma}", laplace_fn(T, rho, h), rhs

    return first_mismatch(items())


def check_canonical_half_density(ctx: Context):
    skip = darboux_skip(ctx)
    if skip:
        return skip
    T, pairs = ctx.T, ctx.structure.pairs
    dx = VolumeForm.coordinate(ctx.chart)
    vols = [dx] + [v for _, v in ctx.volume_items if not cocycle_H(T, v, dx)]

    def items():
        for rho in vols:
            for s in ctx.probes:
                got = laplace_density(T, rho, Density(HALF, s, dx)).coefficient
                yield f"s={s}, sigma={rho.sigma}", got, coordinate_delta0(ctx.chart, pairs, s)

    return first_mismatch(items())


def check_bv_lemma(ctx: Context):
    skip = darboux_skip(ctx)
    if skip:
        return skip
    changes = ctx.structure.changes
    if not changes:
        return Skip("precondition unmet: no coordinate changes declared")
    T, pairs = ctx.T, ctx.structure.pairs
    dx = VolumeForm.coordinate(ctx.chart)
    for name, change in changes.items():
        r = bv_lemma(T, pairs, change)
        if r.defect is not None:
            a, b, d = r.defect
            return Witness(f"change {name}: bracket of new ({a}, {b})", str(d), "0")
        if r.residual:
            return Witness(f"change {name}: Delta_0 Ber^(1/2)", str(r.residual), "0")
        ok, res = arrow_valid(GroupoidArrow(T, dx, r.shift))
        if not ok:
            return Witness(f"change {name}: H(e^(log Ber) Dx, Dx)", str(res), "0")
    return None


def check_half_density_product(ctx: Context):
    skip = darboux_skip(ctx)
    if skip:
        return skip
    ext = extended(ctx)
    T, pairs = ext.T, ctx.structure.pairs
    D0 = lambda u: coordinate_delta0(ext.chart, pairs, u)

    def items():
        for u in [ext.chart.zero()] + ext.nilpotent_evens:
            s = exp_nilpotent(u)
            square = VolumeForm(ext.chart, u.scale(2))
            Ds = D0(s)
            for f in ext.pair_probes:
                rhs = laplace_fn(T, square, f) * s + (f * Ds).scale(sgn(par(f)))
                yield f"f={f}, s=exp({u})", D0(f * s), rhs

    return first_mismatch(items())


def check_modular_hamiltonian(ctx: Context):
    skip = darboux_skip(ctx)
    if skip:
        return skip
    ext = extended(ctx)
    T, pairs = ext.T, ctx.structure.pairs
    vols = [v for _, v in ext.volumes if v.sigma.is_nilpotent()]
    vols += [ext.coordinate.shifted(u) for u in ext.nilpotent_evens]

    def items():
        for rho in vols:
            half = rho.sigma.scale(HALF)
            phi = exp_nilpotent(-half) * coordinate_delta0(ext.chart, pairs, exp_nilpotent(half))
            for f in ext.pair_probes:
                lhs = laplace_fn(T, rho, laplace_fn(T, rho, f))
                yield f"f={f}, sigma={rho.sigma}", lhs, bracket(T, phi, f).scale(-2)

    return first_mismatch(items())


def check_half_density_lie(ctx: Context):
    skip = darboux_skip(ctx)
    if skip:
        return skip
    T, pairs = ctx.T, ctx.structure.pairs
    dx = VolumeForm.coordinate(ctx.chart)
    D0 = lambda u: coordinate_delta0(ctx.chart, pairs, u)

    def items():
        for f in ctx.pair_probes:
            X = hamiltonian_field(T, f)
            for s in ctx.probes:
                lie = lie_derivative_density(X, Density(HALF, s, dx)).coefficient
                rhs = lie.scale(2) + (f * D0(s)).scale(sgn(par(f)))
                yield f"f={f}, s={s}", D0(f * s), rhs

    return first_mismatch(items())


def check_half_density_commutator(ctx: Context):
    skip = darboux_skip(ctx)
    if skip:
        return skip
    T = ctx.T
    dx = VolumeForm.coordinate(ctx.chart)
    zero = ctx.chart.zero()
    return first_mismatch(
        (f"f={f}", commutator_defect(T, dx, HALF, f, ctx.probes), zero) for f in ctx.pair_probes
    )


def check_half_density_commutator_poisson(ctx: Context):
    T = ctx.T
    zero = ctx.chart.zero()
    return first_mismatch(
        (f"f={f}, sigma={rho.sigma}", commutator_defect(T, rho, HALF, f, ctx.probes), zero)
        for _, rho in volumes_or_coordinate(ctx)
        for f in ctx.pair_probes
    )


def check_half_density_normalization(ctx: Context):
    ext = extended(ctx)
    T = ext.T
    vols = [v for _, v in ext.volumes] + [ext.coordinate.shifted(u) for u in ext.nilpotent_evens[:3]]

    def items():
        for rho in vols:
            zero = ext.chart.zero()
            yield f"rho^(1/2), sigma={rho.sigma}", laplace_density(T, rho, Density(HALF, ext.chart.one(), rho)).coefficient, zero
            for other in vols:
                sigma = other.shift_to(rho)
                if other == rho or not sigma.is_nilpotent():
                    continue
                d = Density(HALF, exp_nilpotent(sigma.scale(HALF)), other)
                got = laplace_density(T, rho, d).coefficient
                yield f"rho^(1/2) against sigma={other.sigma}, sigma={rho.sigma}", got, zero

    return first_mismatch(items())


def _half_shift_items(ctx: Context):
    ext = extended(ctx)
    T = ext.T
    for n1, r1, n2, r2 in ext.nilpotent_volume_pairs():
        sigma = r1.shift_to(r2)
        conj = exp_nilpotent(sigma.scale(-HALF)) * laplace_fn(T, r1, exp_nilpotent(sigma.scale(HALF)))
        for s in ext.probes:
            d = Density(HALF, s, r1)
            moved = d.rebase(r2)
            via_rebase = Density(HALF, laplace_fn(T, r2, moved.coefficient), r2).rebase(r1).coefficient
            formula = laplace_fn(T, r1, s) - conj * s
            probe = f"s={s}, rho={n1}, rho'={n2}"
            yield probe, via_rebase, formula
            yield probe + " (library)", laplace_density(T, r2, d).coefficient, formula


def check_half_density_shift(ctx: Context):
    return first_mismatch(_half_shift_items(ctx))


# -- modular field and the Schouten-Lichnerowicz differential ----------------


def _modular_operator(T: StructureTensor, rho: VolumeForm):
    if T.kind is K.ODD_POISSON:
        return lambda u: laplace_fn(T, rho, laplace_fn(T, rho, u))
    return lambda u: laplace_fn(T, rho, u)


def check_modular_derivation(ctx: Context):
    T = ctx.T

    def items():
        for _, rho in volumes_or_coordinate(ctx):
            Y = modular_field(T, rho)
            op = _modular_operator(T, rho)
            for h in ctx.probes:
                yield f"h={h}, sigma={rho.sigma}", op(h), apply_field(Y, h)
            for f, g in itertools.product(ctx.pair_probes, repeat=2):
                yield f"f={f}, g={g}, sigma={rho.sigma}", op(f * g), op(f) * g + f * op(g)

    return first_mismatch(items())


def check_modular_shift(ctx: Context):
    T = ctx.T
    pairs = ctx.volume_pairs()
    if not pairs:
        rho = volumes_or_coordinate(ctx)[0][1]
        pairs = [("rho", rho, f"rho*exp({s})", rho.shifted(s))
                 for s in [p for p in ctx.pair_probes if par(p) == 0 and not p.is_constant()][:3]]

    def items():
        for n1, r1, n2, r2 in pairs:
            H = cocycle_H(T, r2, r1)
            yield f"rho={n1}, rho'={n2}", modular_field(T, r2), modular_field(T, r1) - hamiltonian_field(T, H)

    return first_mismatch(items())


def check_modular_field_properties(ctx: Context):
    T = ctx.T
    darboux = darboux_skip(ctx) is None

    def items():
        for name, rho in volumes_or_coordinate(ctx):
            Y = modular_field(T, rho)
            yield f"div_rho Y, rho={name}", divergence(rho, Y), ctx.chart.zero()
            yield f"Y Poisson (D(Y^a q_a) = 0), rho={name}", is_poisson_field(T, Y), True
            yield f"Y Poisson (derivation law), rho={name}", is_poisson_field_direct(T, Y)[0], True
            if darboux and not rho.sigma:
                yield f"Y at the coordinate volume, rho={name}", str(Y), "0"

    return first_mismatch(items())


def check_jacobi(ctx: Context):
    r = ctx.jacobi
    if r.scan_ok != r.lifted_ok:
        return Witness("coordinate scan vs lifted self-bracket",
                       f"scan {'ok' if r.scan_ok else 'fails'}", f"lifted {'ok' if r.lifted_ok else 'fails'} ({r.self_bracket})")
    if not r.ok:
        return Witness("(" + ", ".join(r.witness) + ")", str(r.value), "0")
    return None


def check_sl_differential(ctx: Context):
    T = ctx.T
    lc = T.lifted_chart
    S = T.lifted

    def items():
        for F in probe_basis(lc.chart, 2):
            yield f"F={F}", sl_differential(lc, S, sl_differential(lc, S, F)), lc.chart.zero()
        for f in ctx.pair_probes:
            X = hamiltonian_field(T, f)
            yield f"X_f Poisson, f={f}", is_poisson_field(T, X), True
            yield f"X_f Poisson (derivation law), f={f}", is_poisson_field_direct(T, X)[0], True
            yield f"D(lift X_f) = 0, f={f}", sl_differential(lc, S, lift_vector_field(lc, X)), lc.chart.zero()

    return first_mismatch(items())


# -- cocycle and groupoid -----------------------------------------------------


def _sample_volumes(ctx: Context) -> list[tuple[str, VolumeForm]]:
    vols = list(volumes_or_coordinate(ctx))
    base = vols[0][1]
    evens = [p for p in ctx.pair_probes if par(p) == 0 and not p.is_constant()]
    for s in evens[:3]:
        vols.append((f"{vols[0][0]}*exp({s})", base.shifted(s)))
    return vols


def check_cocycle_definition(ctx: Context):
    ext = extended(ctx)
    T = ext.T

    def items():
        for n1, r1, n2, r2 in ext.nilpotent_volume_pairs():
            sigma = r1.shift_to(r2)
            half = sigma.scale(HALF)
            rhs = (exp_nilpotent(-half) * laplace_fn(T, r1, exp_nilpotent(half))).scale(2)
            yield f"rho={n1}, rho'={n2}", cocycle_H(T, r2, r1), rhs

    return first_mismatch(items())


def check_cocycle_identity(ctx: Context):
    T = ctx.T
    return first_mismatch((f"rho={n}", cocycle_H(T, r, r), ctx.chart.zero()) for n, r in _sample_volumes(ctx))


def check_cocycle_antisymmetry(ctx: Context):
    T = ctx.T
    vols = _sample_volumes(ctx)
    return first_mismatch(
        (f"rho={n1}, rho'={n2}", cocycle_H(T, r1, r2), -cocycle_H(T, r2, r1))
        for (n1, r1), (n2, r2) in itertools.permutations(vols, 2)
    )


def check_cocycle_additivity(ctx: Context):
    T = ctx.T
    vols = _sample_volumes(ctx)
    return first_mismatch(
        (f"rho={n1}, rho'={n2}, rho''={n3}", cocycle_H(T, r3, r1), cocycle_H(T, r3, r2) + cocycle_H(T, r2, r1))
        for (n1, r1), (n2, r2), (n3, r3) in itertools.permutations(vols, 3)
    )


def generated_arrows(ctx: Context) -> list[tuple[str, GroupoidArrow]]:
    """Declared valid arrows plus valid one-step shifts by even probes from every volume."""
    if "arrows" in ctx.cache:
        return ctx.cache["arrows"]
    T = ctx.T
    out = [(n, a) for n, a in ctx.structure.arrows.items() if arrow_valid(a)[0]]
    cands = [p for p in ctx.pair_probes if par(p) == 0 and not p.is_constant()]
    cands += [p.scale(-2) for p in cands[:2]]
    for name, rho in volumes_or_coordinate(ctx):
        for s in cands:
            a = GroupoidArrow(T, rho, s)
            if arrow_valid(a)[0]:
                out.append((f"{name}->exp({s})", a))
    ctx.cache["arrows"] = out
    return out


def _groupoid_items(ctx: Context):
    T = ctx.T
    arrows = generated_arrows(ctx)
    zero = ctx.chart.zero()
    for n, a in arrows:
        inv = invert(a)
        yield f"invert({n}) valid", arrow_valid(inv)[0], True
        yield f"invert(invert({n}))", invert(inv), a
        yield f"compose({n}, invert({n})) shift", compose(a, inv).shift, zero
    # chains: a then b where b starts at a's target
    singles = arrows[:6]
    for (n1, a1), (n2, s2) in itertools.product(singles, [(n, a.shift) for n, a in arrows]):
        b = GroupoidArrow(T, a1.target, s2)
        if not arrow_valid(b)[0]:
            continue
        ab = compose(a1, b)
        yield f"compose({n1}, {n2}') valid", arrow_valid(ab)[0], True
        for n3, s3 in [(n, a.shift) for n, a in singles][:3]:
            c = GroupoidArrow(T, b.target, s3)
            if not arrow_valid(c)[0]:
                continue
            left = compose(ab, c)
            right = compose(a1, compose(b, c))
            yield f"associativity ({n1}, {n2}', {n3}')", left, right


def check_master_groupoid(ctx: Context):
    if not generated_arrows(ctx):
        return Skip("precondition unmet: no valid arrows available")
    return first_mismatch(_groupoid_items(ctx))


def check_lambda_exceptional(ctx: Context):
    skip = darboux_skip(ctx)
    if skip:
        return skip
    pairs = ctx.structure.pairs
    if len(pairs) < 2:
        return Skip("precondition unmet: the search needs at least two Darboux pairs")
    T = ctx.T
    c = ctx.chart
    basis = [c.var(pairs[0][0]), c.var(pairs[0][1]) * c.var(pairs[1][1])]
    rho = VolumeForm.coordinate(c)
    for lam in (Fraction(1, 4), Fraction(1), Fraction(2)):
        cex = lambda_counterexample(T, rho, lam, basis)
        if cex is None:
            return Witness(f"lambda={lam}", "no counterexample found", "a counterexample")
        expected = bracket(T, cex.sigma, cex.tau).scale(1 - 2 * lam)
        if cex.residual != expected:
            return Witness(f"lambda={lam}, sigma={cex.sigma}, tau={cex.tau}", str(cex.residual), str(expected))
    cex = lambda_counterexample(T, rho, HALF, basis)
    if cex is not None:
        return Witness(f"lambda=1/2, sigma={cex.sigma}, tau={cex.tau}", str(cex.residual), "0")
    return None


def check_orbit_invariants(ctx: Context):
    T = ctx.T
    arrows = list(ctx.structure.arrows.items()) + generated_arrows(ctx)[:4]
    if not arrows:
        return Skip("precondition unmet: no arrows declared or generated")
    one = ctx.chart.one()
    seen = set()
    for name, a in arrows:
        if name in seen:
            continue
        seen.add(name)
        rep = orbit_invariant_check(T, a, ctx.probes)
        H = rep.cocycle
        got = tuple(x.ok for x in rep.assertions)
        if not H:
            want = (True, True, True)
        elif is_casimir(T, H):
            want = (True, False, True)
            d = Density(HALF, one, a.source)
            diff = laplace_density(T, a.target, d).coefficient - laplace_density(T, a.source, d).coefficient
            if diff != H.scale(-HALF):
                return Witness(f"arrow {name}: half-density residual on 1", str(diff), str(H.scale(-HALF)))
        else:
            want = (False, got[1], False)
        if got != want:
            return Witness(f"arrow {name}", str(got), str(want))
    return None


# -- weight-w densities -------------------------------------------------------


def check_weight_density_laplacian(ctx: Context):
    ext = extended(ctx)
    T = ext.T

    def items():
        for n1, r1, n2, r2 in ext.nilpotent_volume_pairs():
            for w in WEIGHTS:
                for s in ext.pair_probes:
                    d = Density(w, s, r2)
                    a = laplace_density(T, r1, d)
                    b = laplace_density(T, r1, d.rebase(r1))
                    yield f"w={w}, s={s}, rho={n1}, reference={n2}", a.rebase(r1).coefficient, b.rebase(r1).coefficient

    return first_mismatch(items())


def _weight_commutator(ctx: Context):
    T = ctx.T
    for _, rho in volumes_or_coordinate(ctx):
        nonzero = {w: False for w in WEIGHTS}
        for f in ctx.pair_probes:
            Lf = laplace_fn(T, rho, f)
            for w in WEIGHTS:
                m = commutator_defect(T, rho, w, f, ctx.pair_probes)
                nonzero[w] = nonzero[w] or bool(m)
                yield f"w={w}, f={f}, sigma={rho.sigma}", m, Lf.scale(1 - 2 * w)
        has_laplacian = any(laplace_fn(T, rho, f) for f in ctx.pair_probes)
        for w in WEIGHTS:
            if has_laplacian:
                yield f"w={w}: some probe has a nonzero defect, sigma={rho.sigma}", nonzero[w], w != HALF


def check_weight_commutator(ctx: Context):
    return first_mismatch(_weight_commutator(ctx))


def _transformation_items(ctx: Context):
    ext = extended(ctx)
    T = ext.T
    pairs = ext.nilpotent_volume_pairs()
    for n1, r1, n2, r2 in pairs:
        sigma = r1.shift_to(r2)
        Xs = hamiltonian_field(T, sigma)
        H = cocycle_H(T, r2, r1)
        for w in WEIGHTS:
            for s in ext.pair_probes:
                d = Density(w, s, r1)
                lhs = laplace_density(T, r2, d).rebase(r1).coefficient
                rhs = (laplace_density(T, r1, d).coefficient
                       + lie_derivative_density(Xs, d).coefficient.scale(1 - 2 * w)
                       - (H * s).scale(2 * w * (1 - w)))
                yield f"w={w}, s={s}, rho={n1}, rho'={n2}", lhs, rhs


def check_weight_volume_change(ctx: Context):
    return first_mismatch(_transformation_items(ctx))


# -- Riemannian column --------------------------------------------------------


def check_riemann_laplace(ctx: Context):
    ext = extended(ctx)
    T = ext.T
    even_chart = not ctx.chart.odd_positions

    def items():
        for rho in [ext.coordinate] + [v for _, v in ext.volumes]:
            for f in ext.probes:
                lap = laplace_fn(T, rho, f)
                if rho.sigma.is_nilpotent():
                    yield f"f={f}, sigma={rho.sigma}", lap, first_principles_divergence(rho, hamiltonian_field(T, f))
                if even_chart:
                    classic = ext.chart.zero()
                    for (a, b), e in T.entries.items():
                        inner = e * f.diff(b)
                        classic = classic + inner.diff(a) + rho.sigma.diff(a) * inner
                    yield f"f={f}, sigma={rho.sigma} (classical form)", lap, classic

    return first_mismatch(items())


def check_riemann_product(ctx: Context):
    T = ctx.T

    def items():
        for _, rho in volumes_or_coordinate(ctx):
            L = lambda u: laplace_fn(T, rho, u)
            for f, g in itertools.product(ctx.pair_probes, repeat=2):
                yield f"f={f}, g={g}, sigma={rho.sigma}", L(f * g), L(f) * g + f * L(g) + bracket(T, f, g).scale(2)

    return first_mismatch(items())


def check_riemann_volume_change(ctx: Context):
    return check_volume_change(ctx)


def check_riemann_weight(ctx: Context):
    return first_mismatch(itertools.chain(_weight_commutator(ctx), _transformation_items(ctx)))


def check_riemann_half_commutator(ctx: Context):
    T = ctx.T
    zero = ctx.chart.zero()
    return first_mismatch(
        (f"f={f}, sigma={rho.sigma}", commutator_defect(T, rho, HALF, f, ctx.probes), zero)
        for _, rho in volumes_or_coordinate(ctx)
        for f in ctx.pair_probes
    )


def check_riemann_groupoid(ctx: Context):
    T = ctx.T
    arrows = generated_arrows(ctx)
    if not arrows:
        return Skip("precondition unmet: no valid arrows available")

    def items():
        zero = ctx.chart.zero()
        for n1, a in arrows:
            for n2, b0 in arrows:
                b = GroupoidArrow(T, a.target, b0.shift)
                if not arrow_valid(b)[0]:
                    continue
                ab = compose(a, b)
                d = Density(HALF, ctx.chart.one(), ab.target)
                got = laplace_density(T, ab.source, d).coefficient
                yield f"Delta(rho''^(1/2)) for {n1} then {n2}'", got, zero
                if ab.shift.is_nilpotent():
                    e = Density(HALF, exp_nilpotent(ab.shift.scale(HALF)), ab.source)
                    yield f"Delta(rho''^(1/2)) for {n1} then {n2}' (explicit)", laplace_density(T, ab.source, e).coefficient, zero

    return first_mismatch(items())


# -- the four-geometry table --------------------------------------------------


def check_geometry_table(ctx: Context):
    T = ctx.T
    kind = T.kind

    def items():
        StructureTensor(T.chart, kind, dict(T.entries))
        yield "lifted phase space is parity-reversed", T.lifted_chart.shift, kind.shifted_lift
        if T.entries:
            yield "parity of the lifted tensor", par(T.lifted), kind.parity
        for f, g in itertools.product(ctx.pair_probes, repeat=2):
            yield f"symmetry f={f}, g={g}", bracket(T, f, g), bracket(T, g, f).scale(kind.bracket_symmetry(par(f), par(g)))
        for _, rho in volumes_or_coordinate(ctx):
            for f in ctx.pair_probes:
                Lf = laplace_fn(T, rho, f)
                if Lf:
                    yield f"parity of Delta f, f={f}", par(Lf), (par(f) + kind.parity) % 2
            if kind.operator_order == 1:
                for f, g in itertools.product(ctx.pair_probes, repeat=2):
                    L = lambda u: laplace_fn(T, rho, u)
                    yield (f"first-order Delta, f={f}, g={g}", L(f * g),
                           L(f) * g + (f * L(g)).scale(sgn(par(f) * kind.parity)))

    return first_mismatch(items())


def _case(id, ref, kinds, checker, needs_jacobi=False) -> IdentityCase:
    return IdentityCase(id, ref, frozenset(kinds), checker, needs_jacobi)


CATALOG: tuple[IdentityCase, ...] = (
    _case("LIFT_QUADRATIC", "T = 1/2 T^{ab}(x) q_b q_a", ALL, check_lift_quadratic),
    _case("BRACKET_LIFT", "{f,g} = (f,(T,g)) = ((f,T),g)", ALL, check_bracket_lift),
    _case("HAMILTONIAN_FIELD", "X_f = (-1)^(f+1) {f, .} = (-1)^(af) S^{ab} d_b f d_a", ALL, check_hamiltonian_field),
    _case("FIELD_OF_BRACKET", "X_{f,g} = [X_f, X_g]", POISSON, check_field_of_bracket, True),
    _case("FIELD_OF_PRODUCT", "X_{fg} = (-1)^f f X_g + (-1)^(g+fg) g X_f", POISSON | EVEN_RIEMANNIAN, check_field_of_product),
    _case("LIE_ON_FUNCTIONS", "[L_f, g] = (-1)^(f+1) {f,g} = X_f g", POISSON | EVEN_RIEMANNIAN, check_lie_on_functions),
    _case("LIE_COMMUTATOR", "[L_f, L_g] = L_{f,g}", POISSON, check_lie_commutator, True),
    _case("LAPLACE_DIVERGENCE", "Delta_rho f = div_rho X_f = L_f rho / rho", ALL, check_laplace_divergence),
    _case("DIVERGENCE_PRODUCT", "div_rho(f X) = f div_rho X + (-1)^(X f) X f", ALL, check_divergence_product),
    _case("LAPLACE_COORDINATES", "Delta_rho f = rho^-1 d_a(rho S^{ab} d_b f)", ODD_POISSON, check_laplace_coordinates),
    _case("BRACKET_DERIVATION", "Delta_rho{f,g} = {Delta_rho f, g} + (-1)^(f+1) {f, Delta_rho g}", ODD_POISSON,
          check_bracket_derivation, True),
    _case("LAPLACE_FIELD_COMMUTATOR", "[Delta_rho, X_f] = -X_{Delta_rho f}", ODD_POISSON,
          check_laplace_field_commutator, True),
    _case("PRODUCT_RULE", "Delta_rho(fg) = (Delta_rho f) g + (-1)^f f Delta_rho g + (-1)^(f+1) 2{f,g}", ODD_POISSON,
          check_product_rule),
    _case("FUNCTION_COMMUTATOR", "[Delta_rho, f] = 2 X_f + Delta_rho f", ODD_POISSON, check_function_commutator),
    _case("POWER_RULE", "Delta_rho(f^n) = n f^(n-1) Delta_rho f - n(n-1) f^(n-2) {f,f}", ODD_POISSON, check_power_rule),
    _case("EXPONENTIAL_RULE", "Delta_rho e^(kf) = k (Delta_rho f - k {f,f}) e^(kf)", ODD_POISSON, check_exponential_rule),
    _case("VOLUME_CHANGE", "Delta_rho' = Delta_rho + X_sigma, rho' = e^sigma rho", ODD_POISSON,
          check_volume_change),
    _case("DARBOUX_DECOMPOSITION", "Delta_rho = Delta_0 + X_(ln rho), Delta_0 = 2 d^2/dx^i dtheta_i", ODD_POISSON,
          check_darboux_decomposition),
    _case("CANONICAL_HALF_DENSITY", "Delta s = (2 d^2 s/dx^i dtheta_i) D(x,theta)^(1/2)", ODD_POISSON,
          check_canonical_half_density),
    _case("BV_LEMMA", "Delta_0 (Ber dx'/dx)^(1/2) = 0", ODD_POISSON, check_bv_lemma),
    _case("HALF_DENSITY_PRODUCT", "Delta(f s) = (Delta_(s^2) f) s + (-1)^f f Delta s", ODD_POISSON,
          check_half_density_product),
    _case("MODULAR_HAMILTONIAN", "Delta_rho^2 f = -2 {rho^(-1/2) Delta(rho^(1/2)), f}", ODD_POISSON,
          check_modular_hamiltonian, True),
    _case("HALF_DENSITY_LIE", "Delta(f s) = 2 L_f s + (-1)^f f Delta s", ODD_POISSON, check_half_density_lie),
    _case("HALF_DENSITY_COMMUTATOR", "[Delta, f] = 2 L_f on half-densities (Darboux)", ODD_POISSON,
          check_half_density_commutator),
    _case("MODULAR_DERIVATION", "Delta_rho^2 (fg) = (Delta_rho^2 f) g + f Delta_rho^2 g", POISSON,
          check_modular_derivation, True),
    _case("MODULAR_SHIFT", "Delta_rho'^2 = Delta_rho^2 - X_H(rho', rho)", ODD_POISSON, check_modular_shift, True),
    _case("MODULAR_FIELD_PROPERTIES", "div_rho Delta_rho^2 = 0, Delta_rho^2 Poisson, zero for Darboux Dx", POISSON,
          check_modular_field_properties, True),
    _case("JACOBI", "Jacobi for {,} iff (T,T) = 0", POISSON, check_jacobi),
    _case("SL_DIFFERENTIAL", "D = (T, .), D^2 = 0, Hamiltonian fields are Poisson", POISSON, check_sl_differential, True),
    _case("COCYCLE_DEFINITION", "H(rho', rho) = Delta_rho sigma - 1/2 {sigma,sigma} = 2 e^(-sigma/2) Delta_rho e^(sigma/2)",
          SECOND_ORDER, check_cocycle_definition),
    _case("COCYCLE_IDENTITY", "H(rho, rho) = 0", SECOND_ORDER, check_cocycle_identity),
    _case("COCYCLE_ANTISYMMETRY", "H(rho, rho') = -H(rho', rho)", SECOND_ORDER, check_cocycle_antisymmetry),
    _case("COCYCLE_ADDITIVITY", "H(rho'', rho) = H(rho'', rho') + H(rho', rho)", SECOND_ORDER, check_cocycle_additivity),
    _case("MASTER_GROUPOID", "Delta_rho e^(sigma/2) = 0 solutions form a groupoid", ODD_POISSON, check_master_groupoid,
          True),
    _case("LAMBDA_EXCEPTIONAL", "no groupoid for Delta_rho e^(lambda sigma) = 0 unless lambda = 1/2", ODD_POISSON,
          check_lambda_exceptional, True),
    _case("HALF_DENSITY_COMMUTATOR_POISSON", "[Delta, f] = 2 L_f on half-densities", ODD_POISSON,
          check_half_density_commutator_poisson),
    _case("HALF_DENSITY_NORMALIZATION", "Delta(rho^(1/2)) = 0, Delta s = rho^(1/2) Delta_rho(s rho^(-1/2))",
          SECOND_ORDER, check_half_density_normalization),
    _case("HALF_DENSITY_SHIFT", "Delta' = Delta - e^(-sigma/2) Delta_rho e^(sigma/2)", ODD_POISSON,
          check_half_density_shift),
    _case("ORBIT_INVARIANTS", "Delta_rho^2 and Delta are constant on orbits; H Casimir iff Delta_rho^2 unchanged",
          ODD_POISSON, check_orbit_invariants, True),
    _case("WEIGHT_DENSITY_LAPLACIAN", "Delta_rho s = (Delta_rho s) rho^w", ODD_POISSON, check_weight_density_laplacian),
    _case("WEIGHT_COMMUTATOR", "[Delta_rho, f] = 2 L_f + (1 - 2w) Delta_rho f", ODD_POISSON, check_weight_commutator),
    _case("WEIGHT_VOLUME_CHANGE", "Delta_rho' = Delta_rho + (1 - 2w) L_sigma - 2w(1 - w) H(rho', rho)", ODD_POISSON,
          check_weight_volume_change),
    _case("RIEMANN_LAPLACE", "Delta_rho f = div_rho grad f = rho^-1 d_a(rho g^{ab} d_b f)", RIEMANNIAN,
          check_riemann_laplace),
    _case("RIEMANN_PRODUCT", "Delta_rho(fg) = (Delta_rho f) g + f Delta_rho g + 2<f,g>", EVEN_RIEMANNIAN,
          check_riemann_product),
    _case("RIEMANN_EXPONENTIAL", "Delta_rho e^(kf) = k (Delta_rho f + k <f,f>) e^(kf)", EVEN_RIEMANNIAN,
          check_exponential_rule),
    _case("RIEMANN_VOLUME_CHANGE", "Delta_rho' = Delta_rho + grad sigma", RIEMANNIAN, check_riemann_volume_change),
    _case("RIEMANN_WEIGHT", "Delta_rho s = (Delta_rho s) rho^w with commutator and change laws", EVEN_RIEMANNIAN,
          check_riemann_weight),
    _case("RIEMANN_HALF_COMMUTATOR", "[Delta, f] = 2 L_(grad f) on half-densities", EVEN_RIEMANNIAN,
          check_riemann_half_commutator),
    _case("RIEMANN_HALF_SHIFT", "Delta' = Delta - e^(-sigma/2) Delta_rho e^(sigma/2)", EVEN_RIEMANNIAN,
          check_half_density_shift),
    _case("RIEMANN_GROUPOID", "Delta(rho'^(1/2)) = 0 solutions compose", EVEN_RIEMANNIAN, check_riemann_groupoid),
    _case("GEOMETRY_TABLE", "symmetry, parity, lift and operator order of T^{ab} per geometry", ALL,
          check_geometry_table),
)

CASE_IDS = tuple(c.id for c in CATALOG)

if len(set(CASE_IDS)) != len(CASE_IDS):  # pragma: no cover - guards edits to the table above
    raise SGVError("duplicate case ids in the catalog")


__all__ = ["CATALOG", "CASE_IDS", "first_principles_divergence", "generated_arrows"]

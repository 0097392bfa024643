"""Darboux-to-Darboux changes: canonicity, the Berezinian and its square root."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import NotInvertibleError, SGVError
from .geometry import StructureTensor, bracket
from .grassmann import SuperPoly, log_one_plus, sqrt_one_plus
from .laplace import coordinate_delta0
from .supermatrix import CoordinateChange, substitute


def canonicity_defect(T: StructureTensor, change: CoordinateChange) -> tuple[str, str, SuperPoly] | None:
    """First pair of new coordinates whose bracket, computed in the old chart, differs
    from the structure's bracket rewritten in the new coordinates; ``None`` if canonical."""
    if change.source != T.chart or change.target != T.chart:
        raise SGVError("canonicity is checked for changes of a chart into itself")
    names = T.chart.names
    coords = T.chart.coords()
    imgs = [change.images[n] for n in names]
    for i, fi in enumerate(imgs):
        for j, gj in enumerate(imgs):
            want = substitute(bracket(T, coords[i], coords[j]), change)
            got = bracket(T, fi, gj)
            if got != want:
                return names[i], names[j], got - want
    return None


@dataclass(frozen=True)
class BVResult:
    ber: SuperPoly
    scale: SuperPoly  # body constant of Ber, dropped from the square root
    sqrt_ber: SuperPoly  # (Ber / scale)^(1/2)
    residual: SuperPoly  # Delta_0 of sqrt_ber
    shift: SuperPoly  # log(Ber / scale)
    defect: tuple[str, str, SuperPoly] | None  # first non-canonical bracket, if any


def bv_lemma(T: StructureTensor, pairs: Sequence[tuple[str, str]], change: CoordinateChange) -> BVResult:
    """Compute Ber(dx'/dx), its normalized square root and Delta_0 of it."""
    ber = change.berezinian()
    body = ber.body()
    if not body.is_constant() or not body:
        raise NotInvertibleError(f"Berezinian {ber} needs a nonzero constant body")
    c = body.constant_term()
    u = ber.scale(1 / c) - T.chart.one()
    root = sqrt_one_plus(u)
    return BVResult(
        ber=ber,
        scale=body,
        sqrt_ber=root,
        residual=coordinate_delta0(T.chart, pairs, root),
        shift=log_one_plus(u),
        defect=canonicity_defect(T, change),
    )


__all__ = ["BVResult", "bv_lemma", "canonicity_defect"]

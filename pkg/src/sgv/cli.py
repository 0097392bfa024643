"""Command-line interface: ``sgv check | eval | groupoid | bvlemma | probe``.

Exit codes: 0 when everything holds, 1 when a check fails (unexpectedly, for
``check``), 2 for unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .bv import bv_lemma
from .errors import SGVError
from .expr import evaluate
from .geometry import VectorField, bracket, hamiltonian_field, hamiltonian_potential
from .grassmann import Chart, Parity, SuperPoly
from .groupoid import GroupoidArrow, arrow_valid, compose, invert
from .harness import (
    default_max_degree,
    probe_basis,
    report_json,
    report_text,
    run_suite,
    structures_of,
    summarize,
)
from .laplace import VolumeForm, cocycle_H, coordinate_delta0, divergence, laplace_fn, modular_field
from .manifest import Manifest, parse_manifest, shipped_manifests

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sgv", description="Exact checks of Laplacian identities on supermanifolds.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="run identity suites over manifests")
    c.add_argument("--manifest", action="append", metavar="PATH",
                   help="manifest file or shipped name (repeatable; default: every shipped manifest)")
    c.add_argument("--suite", nargs="*", metavar="ID", help="case ids or 'all' (default: the manifest's suites)")
    c.add_argument("--report", metavar="PATH", help="write the report here instead of stdout")
    c.add_argument("--format", choices=("json", "text"), default="json")
    c.add_argument("--schedule", choices=("catalog", "permuted"), default="catalog",
                   help="execution order; the report does not depend on it")
    c.add_argument("--max-degree", type=int, metavar="N", help="probe degree (default: $SGV_MAX_DEGREE or 3)")
    c.add_argument("--list", action="store_true", help="list case ids and exit")

    e = sub.add_parser("eval", help="evaluate an expression against a manifest")
    e.add_argument("--manifest", required=True, metavar="PATH")
    e.add_argument("--geometry", metavar="NAME", help="geometry to use (default: the first)")
    e.add_argument("--expr", required=True, metavar="STRING")

    g = sub.add_parser("groupoid", help="validate, compose or invert named arrows")
    g.add_argument("--manifest", required=True, metavar="PATH")
    g.add_argument("action", choices=("validate", "compose", "invert"))
    g.add_argument("arrows", nargs="*", metavar="ARROW")

    b = sub.add_parser("bvlemma", help="Berezinian square root of a coordinate change under Delta_0")
    b.add_argument("--manifest", required=True, metavar="PATH")
    b.add_argument("--change", action="append", metavar="NAME", help="change name (repeatable; default: all)")

    q = sub.add_parser("probe", help="print the probe basis of a chart")
    src = q.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", metavar="PATH")
    src.add_argument("--chart", metavar="SPEC", help="e.g. 'x:even,theta:odd'")
    q.add_argument("--degree", type=int, metavar="N", help="maximal degree (default: $SGV_MAX_DEGREE or 3)")
    return p


def _parse_chart(spec: str) -> Chart:
    items = []
    for part in spec.split(","):
        name, sep, parity = part.strip().partition(":")
        if not sep or not name.isidentifier():
            raise SGVError(f"chart spec items look like name:even or name:odd, got {part!r}")
        items.append((name, Parity.parse(parity)))
    return Chart.from_spec(items)


# -- check ---------------------------------------------------------------------


def cmd_check(args, out) -> int:
    if args.list:
        from .catalog import CATALOG

        for case in CATALOG:
            kinds = ",".join(sorted(k.value for k in case.applicable_kinds))
            out.write(f"{case.id}\t{kinds}\t{case.equation_ref}\n")
        return EXIT_OK
    paths = args.manifest or [str(p) for p in shipped_manifests()]
    manifests = [parse_manifest(p) for p in paths]  # every input error surfaces before any case runs
    degree = default_max_degree() if args.max_degree is None else args.max_degree
    if degree < 0:
        raise SGVError("--max-degree must be nonnegative")
    reports, expect = [], {}
    for m in manifests:
        selection = m.suites if args.suite is None else args.suite
        structures = structures_of(m)
        for s in structures:
            for case, status in m.expect.items():
                expect[(s.id, case)] = status
        reports.extend(run_suite(structures, selection, max_degree=degree, schedule=args.schedule))
    reports.sort(key=lambda r: (r.case, r.structure))
    text = report_json(reports, expect) if args.format == "json" else report_text(reports, expect)
    summary = summarize(reports, expect)
    if args.report:
        Path(args.report).write_text(text)
        out.write("summary: " + " ".join(f"{k}={v}" for k, v in summary.items()) + "\n")
    else:
        out.write(text)
    return EXIT_FAIL if summary["unexpected"] else EXIT_OK


# -- eval ----------------------------------------------------------------------


def _eval_functions(m: Manifest, geometry: str | None):
    T = m.geometry(geometry)

    def need(value, cls, what):
        if not isinstance(value, cls):
            raise SGVError(f"{what} expects a {cls.__name__}, got {type(value).__name__}")
        return value

    def poly(v):
        if isinstance(v, SuperPoly):
            return v
        return need(v, SuperPoly, "argument")

    def field(f):
        return hamiltonian_field(T, poly(f))

    def div(rho, X):
        X = field(X) if isinstance(X, SuperPoly) else need(X, VectorField, "divergence")
        return divergence(need(rho, VolumeForm, "divergence"), X)

    def delta0(f):
        if not m.darboux:
            raise SGVError("Delta0 needs Darboux pairs in the manifest")
        return coordinate_delta0(m.chart, m.darboux, poly(f))

    def potential(X):
        # bounded search: "none" only means no potential up to the probe degree
        X = field(X) if isinstance(X, SuperPoly) else need(X, VectorField, "potential")
        return hamiltonian_potential(T, X, default_max_degree())

    return {
        "bracket": lambda f, g: bracket(T, poly(f), poly(g)),
        "laplacian": lambda rho, f: laplace_fn(T, need(rho, VolumeForm, "laplacian"), poly(f)),
        "divergence": div,
        "field": field,
        "H": lambda r1, r0: cocycle_H(T, need(r1, VolumeForm, "H"), need(r0, VolumeForm, "H")),
        "modular": lambda rho: modular_field(T, need(rho, VolumeForm, "modular")),
        "Delta0": delta0,
        "potential": potential,
    }


def cmd_eval(args, out) -> int:
    m = parse_manifest(args.manifest)
    env: dict[str, object] = {}
    env.update(m.functions)
    env.update(m.volumes)
    value = evaluate(args.expr, m.chart, env, _eval_functions(m, args.geometry))
    if isinstance(value, VolumeForm):
        value = value.sigma
    if value is None:
        value = "none"
    out.write(f"{value}\n")
    return EXIT_OK


# -- groupoid ------------------------------------------------------------------


def _arrow(m: Manifest, name: str) -> GroupoidArrow:
    try:
        return m.arrows[name]
    except KeyError:
        raise SGVError(f"unknown arrow {name!r}; have {sorted(m.arrows)}") from None


def _describe(name: str, a: GroupoidArrow) -> str:
    ok, res = arrow_valid(a)
    status = "valid" if ok else f"invalid, H(target, source) = {res}"
    return f"{name}: shift {a.shift}: {status}"


def cmd_groupoid(args, out) -> int:
    m = parse_manifest(args.manifest)
    if args.action == "validate":
        names = args.arrows or list(m.arrows)
        failed = False
        for n in names:
            a = _arrow(m, n)
            failed |= not arrow_valid(a)[0]
            out.write(_describe(n, a) + "\n")
        return EXIT_FAIL if failed else EXIT_OK
    if args.action == "invert":
        if len(args.arrows) != 1:
            raise SGVError("invert takes exactly one arrow")
        a = _arrow(m, args.arrows[0])
        if not arrow_valid(a)[0]:
            out.write(_describe(args.arrows[0], a) + "\n")
            return EXIT_FAIL
        out.write(_describe(f"invert({args.arrows[0]})", invert(a)) + "\n")
        return EXIT_OK
    if len(args.arrows) < 2:
        raise SGVError("compose takes at least two arrows")
    arrows = [(n, _arrow(m, n)) for n in args.arrows]
    bad = [(n, a) for n, a in arrows if not arrow_valid(a)[0]]
    if bad:
        for n, a in bad:
            out.write(_describe(n, a) + "\n")
        return EXIT_FAIL
    acc = arrows[0][1]
    for _, a in arrows[1:]:
        acc = compose(acc, a)
    out.write(_describe("compose(" + ", ".join(args.arrows) + ")", acc) + "\n")
    return EXIT_OK


# -- bvlemma and probe -----------------------------------------------------------


def cmd_bvlemma(args, out) -> int:
    m = parse_manifest(args.manifest)
    if not m.darboux:
        raise SGVError("the manifest declares no Darboux pairs")
    names = args.change or list(m.changes)
    if not names:
        raise SGVError("the manifest declares no coordinate changes")
    T = m.geometry()
    failed = False
    for n in names:
        if n not in m.changes:
            raise SGVError(f"unknown change {n!r}; have {sorted(m.changes)}")
        r = bv_lemma(T, m.darboux, m.changes[n])
        valid = arrow_valid(GroupoidArrow(T, VolumeForm.coordinate(m.chart), r.shift))[0]
        canonical = r.defect is None
        failed |= bool(r.residual) or not canonical or not valid
        out.write(f"change: {n}\n")
        out.write(f"  canonical: {'yes' if canonical else 'no, bracket of new (%s, %s) off by %s' % r.defect}\n")
        out.write(f"  ber: {r.ber}\n")
        out.write(f"  sqrt_ber: {r.sqrt_ber}" + (f" (constant factor {r.scale} dropped)\n" if r.scale != m.chart.one() else "\n"))
        out.write(f"  residual: {r.residual}\n")
        out.write(f"  log_ber: {r.shift}\n")
        out.write(f"  arrow_valid: {'yes' if valid else 'no'}\n")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_probe(args, out) -> int:
    chart = parse_manifest(args.manifest).chart if args.manifest else _parse_chart(args.chart)
    degree = default_max_degree() if args.degree is None else args.degree
    if degree < 0:
        raise SGVError("--degree must be nonnegative")
    for p in probe_basis(chart, degree):
        out.write(f"{p}\n")
    return EXIT_OK


COMMANDS = {"check": cmd_check, "eval": cmd_eval, "groupoid": cmd_groupoid, "bvlemma": cmd_bvlemma, "probe": cmd_probe}


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except SGVError as exc:
        sys.stderr.write(f"sgv: error: {exc}\n")
        return EXIT_INPUT
    except OSError as exc:
        sys.stderr.write(f"sgv: error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

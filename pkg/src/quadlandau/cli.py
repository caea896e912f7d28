"""Command-line interface.

Exit codes: 0 success, 2 parse/validation error, 3 precondition violation,
4 no witness found by ``landau member --expect member``.
"""
from __future__ import annotations

import argparse
import hashlib
import io as _io
import json
import math
import os
import sys
from contextlib import redirect_stdout
from typing import Sequence

from . import __version__
from .graph import (
    FeynmanGraph,
    GraphError,
    build_routing,
    enumerate_1pi_subgraphs,
    omega,
    symanzik_determinant,
    symanzik_first,
)
from .io import InputError, Loaded, RunManifest, fixture_document, fixture_names, integral_of, load_input
from .io import parse_grid, parse_point, parse_value
from .landau import CHARTS, LandauError, LandauSystem, Witness, generate_landau_system, is_physical
from .quadform import QuadFormError
from .regularize import RegularizationError, regularize_integral
from .renorm import (
    Birkhoff,
    Character,
    LaurentSeries,
    MinimalSubtraction,
    MomentumSubtraction,
    RenormError,
    antipode,
    canonical_graph,
    closure,
    coproduct,
    physical_limit,
)
from .solver import SolveConfig, format_scan_table, membership_test, scan, verify_witness

DEFAULT_SEED = 0


class PreconditionError(Exception):
    """Input is well formed but the operation does not apply (exit code 3)."""


# --- helpers -----------------------------------------------------------------


def _cfmt(z: complex) -> str:
    z = complex(z)
    re = 0.0 if z.real == 0 else z.real
    im = 0.0 if z.imag == 0 else z.imag
    return f"{re:.12g}{im:+.12g}i"


def _vec(zs) -> str:
    return "(" + ", ".join(_cfmt(z) for z in zs) + ")"


def _manifest(args, inputs: Sequence[Loaded], seed=None, config=None) -> RunManifest:
    return RunManifest(list(args.manifest_argv), {x.source: x.digest for x in inputs}, seed, config or {})


def _emit(args, text: str):
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _graph(loaded: Loaded) -> FeynmanGraph:
    if loaded.graph is None:
        raise InputError(f"{loaded.source}: expected a graph description, got a {loaded.kind} file")
    return loaded.graph


def _config(args) -> SolveConfig:
    try:
        return SolveConfig(starts=args.starts, max_iterations=args.max_iterations, tau=args.tau, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _config_dict(cfg: SolveConfig) -> dict:
    return {"starts": cfg.starts, "max_iterations": cfg.max_iterations, "residual_target": cfg.residual_target,
            "tau": cfg.tau, "max_halvings": cfg.max_halvings, "cluster_radius": cfg.cluster_radius,
            "chart_redraws": cfg.chart_redraws}


def _system(loaded: Loaded, chart: str | None) -> LandauSystem:
    if loaded.system is not None:
        if chart is not None and chart != loaded.system.chart:
            raise InputError(f"{loaded.source} is a {loaded.system.chart}-chart system; --chart {chart} conflicts")
        return loaded.system
    return generate_landau_system(integral_of(loaded), chart or "projective")


def _lin(names, coeffs) -> str:
    parts = []
    for n, c in zip(names, coeffs):
        if c:
            mag = "" if abs(c) == 1 else f"{abs(c)}*"
            parts.append(("-" if c < 0 else "+", mag + n))
    if not parts:
        return "0"
    s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    return s + "".join(f" {sg} {b}" for sg, b in parts[1:])


# --- commands ----------------------------------------------------------------


def cmd_route(args):
    src = load_input(args.graph)
    g = _graph(src)
    try:
        r = build_routing(g, args.base)
    except GraphError as exc:
        raise InputError(str(exc)) from None
    lines = [
        f"base vertex: {r.base}",
        f"loop momenta: {', '.join(r.loop_names) or '-'}",
        f"external momenta: {', '.join(f'{n}@{v}' for n, v in zip(r.external_names, r.external_vertices)) or '-'}",
        "edge\tends\tchord\tK_e\tP_e",
    ]
    for e in g.edges:
        a, b = e.ends
        lines.append(
            f"{e.id}\t{a}->{b}\t{'yes' if e.id in r.chords else 'no'}\t"
            f"{_lin(r.loop_names, r.loop[e.id])}\t{_lin(r.external_names, r.ext[e.id])}"
        )
    _emit(args, _manifest(args, [src]).header() + "\n".join(lines) + "\n")
    return 0


def cmd_symanzik(args):
    src = load_input(args.graph)
    g = _graph(src)
    u = symanzik_first(g)
    d = symanzik_determinant(g)
    verdict = "PASS" if u == d else "FAIL"
    _emit(args, _manifest(args, [src]).header() + f"U = {u}\ndeterminant check: {verdict}\n")
    return 0


def cmd_power_count(args):
    src = load_input(args.graph)
    g = _graph(src)
    if args.dimension is not None:
        g = FeynmanGraph(g.vertices, g.edges, g.external, args.dimension, g.weights)
    if g.h1 < 1:
        raise PreconditionError("power counting needs a graph with at least one loop")
    ids = [e.id for e in g.edges]
    w = omega(g, ids)
    sup = "convergent (superficial)" if w.re > 0 else "not convergent (superficial)"
    lines = [f"D = {g.dimension}", f"omega(G) = {w}: {sup}", "subgraph\th1\tomega\tstatus"]
    subs = enumerate_1pi_subgraphs(g)
    bad = 0
    for s in subs:
        ws = omega(g, s)
        status = "convergent" if ws.re > 0 else "divergent"
        bad += ws.re <= 0
        touched = {v for eid in s for v in g.edge(eid).ends}
        h1 = len(s) - len(touched) + len(g.components(s, list(touched)))
        lines.append(f"{{{','.join(s)}}}\t{h1}\t{ws}\t{status}")
    if not g.is_1pi():
        lines.append("note: G itself is not 1PI")
    verdict = "convergent" if bad == 0 else f"divergent ({bad} subgraph(s) with omega <= 0)"
    lines.append(f"Weinberg: {verdict}")
    _emit(args, _manifest(args, [src]).header() + "\n".join(lines) + "\n")
    return 0


def cmd_landau_gen(args):
    src = load_input(args.input)
    sysm = _system(src, args.chart)
    d = json.loads(sysm.dumps(args.seed))
    d["manifest"] = _manifest(args, [src], args.seed).to_dict()
    _emit(args, json.dumps(d, indent=1, sort_keys=True) + "\n")
    return 0


def _load_witness(path: str) -> Witness:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if isinstance(doc, dict) and "verdict" in doc:
        doc = doc.get("witness")
        if doc is None:
            raise InputError(f"{path}: the report has no witness")
    try:
        return Witness.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed witness ({exc})") from None


def cmd_landau_verify(args):
    src = load_input(args.system)
    sysm = _system(src, None)
    w = _load_witness(args.witness)
    try:
        rep = verify_witness(sysm, w, args.tau)
    except LandauError as exc:
        raise PreconditionError(str(exc)) from None
    lines = [
        f"system: {sysm.name or '-'} ({sysm.chart} chart)",
        f"residual: {rep['residual']:.6e} (tau {args.tau:g}): {'ACCEPTED' if rep['accepted'] else 'REJECTED'}",
        "form\tdisjunct\t|Q|\tresidual",
    ]
    for i in range(sysm.N):
        lines.append(f"{i + 1}\t{rep['disjunct'][i]}\t{rep['onshell'][i]:.6e}\t{rep['per_form'][i]:.6e}")
    for name, val in zip(sysm.gradient_coords, rep["gradients"]):
        lines.append(f"gradient {name}\t{val:.6e}")
    for val in rep["omitted"]:
        lines.append(f"omitted u-row (Euler)\t{val:.6e}")
    if sysm.is_feynman():
        lines.append(f"physical: {'yes' if is_physical(sysm, w) else 'no'}")
    _emit(args, _manifest(args, [src]).header() + "\n".join(lines) + "\n")
    return 0


def cmd_landau_member(args):
    src = load_input(args.input)
    sysm = _system(src, args.chart)
    point = parse_point(args.at, sysm.parameters, sysm.layout)
    cfg = _config(args)
    rep = membership_test(sysm, point, cfg)
    man = _manifest(args, [src], cfg.seed, _config_dict(cfg))
    if args.json:
        d = rep.to_dict()
        d["witnesses"] = [w.to_dict() for w in rep.witnesses]
        d["manifest"] = man.to_dict()
        text = json.dumps(d, indent=1, sort_keys=True) + "\n"
    else:
        lines = [
            "point: " + "; ".join(f"{k}={_cfmt(v)}" for k, v in rep.point.items()),
            f"chart: {sysm.chart}",
            f"verdict: {rep.verdict}",
        ]
        if rep.witness is not None:
            w = rep.witness
            lines += _witness_lines("witness", w)
            if sysm.is_feynman():
                phys = [x for x in rep.witnesses if is_physical(sysm, x)]
                lines.append(f"physical witnesses: {len(phys)} of {len(rep.witnesses)}")
                if phys and phys[0] is not w:
                    lines += _witness_lines("physical witness", phys[0])
        lines.append("branch\tstarts\tconverged\tbest_residual\twitnesses")
        for b in rep.branches:
            best = b["best_residual"]
            lines.append(f"{b['branch']}\t{b['starts']}\t{b['converged']}\t"
                         f"{'-' if not math.isfinite(best) else format(best, '.3e')}\t{b['witnesses']}")
        text = man.header() + "\n".join(lines) + "\n"
    _emit(args, text)
    if args.expect == "member" and not rep.member:
        return 4
    return 0


def _witness_lines(title, w):
    return [f"{title}: branch {w.branch}, residual {w.residual:.3e}", f"  alpha = {_vec(w.alpha)}",
            f"  coords = {_vec(w.coords)}"]


def cmd_landau_scan(args):
    src = load_input(args.input)
    sysm = _system(src, args.chart)
    base = parse_point(args.at, sysm.parameters, sysm.layout, require_all=False) if args.at else {}
    grid = parse_grid(args.grid, sysm.parameters, sysm.layout, base)
    cfg = _config(args)
    reports = scan(sysm, grid, cfg)
    man = _manifest(args, [src], cfg.seed, _config_dict(cfg))
    if args.json:
        text = json.dumps({"manifest": man.to_dict(), "reports": [r.to_dict() for r in reports]},
                          indent=1, sort_keys=True) + "\n"
    else:
        text = man.header() + format_scan_table(sysm, reports)
    _emit(args, text)
    return 0


def cmd_regularize(args):
    src = load_input(args.input)
    I = integral_of(src)
    point = parse_point(args.at, I.parameters, _layout_of(I), require_all=True) if args.at else None
    try:
        out, regs = regularize_integral(I, point, args.epsilon)
    except RegularizationError as exc:
        raise PreconditionError(str(exc)) from None
    lines = [f"coordinates: {', '.join(I.coordinates)}"]
    for i, (reg, f) in enumerate(zip(regs, out.forms)):
        d = reg.diagonalization
        lines.append(f"form {i + 1}:")
        lines.append("  T =")
        lines += ["    [" + ", ".join(str(x) for x in row) + "]" for row in d.T.entries]
        lines.append("  diagonal = [" + ", ".join(str(x) for x in d.diagonal) + "]")
        lines.append("  exceptional = [" + ", ".join(str(x) for x in d.exceptional) + "]")
        lines.append(f"  rank profile = {reg.rank_profile}; regulated indices = {list(reg.regulated)}")
        lines.append("  A =")
        lines += ["    [" + ", ".join(str(x) for x in row) + "]" for row in reg.A.entries]
        lines.append(f"  regularized form = {f.polynomial()}")
        if point is not None:
            ok, why = reg.positive_definite_at(point)
            lines.append(f"  positive definite at point for all {args.epsilon} > 0: {'yes' if ok else 'no'} ({why})")
    _emit(args, _manifest(args, [src]).header() + "\n".join(lines) + "\n")
    return 0


def _layout_of(I):
    if I.routing is None:
        return None
    r = I.routing
    return {
        "external": {p: tuple(f"{p}_{mu}" for mu in range(r.dimension)) for p in r.external_names},
        "masses": tuple(dict.fromkeys(e.mass for e in r.graph.edges)),
    }


def cmd_hopf(args):
    src = load_input(args.graph)
    g = _graph(src)
    try:
        body = coproduct(g).format() if args.operation == "coproduct" else antipode(g).format()
    except RenormError as exc:
        raise PreconditionError(str(exc)) from None
    _emit(args, _manifest(args, [src]).header() + body + "\n")
    return 0


def _read_json(path: str, what: str) -> tuple[dict, Loaded]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"{what} {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    digest = hashlib.sha256(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()).hexdigest()
    return doc, Loaded(what, doc, digest, path)


def _scheme(doc: dict):
    extra = set(doc) - {"scheme", "window", "reference"}
    if extra:
        raise InputError(f"unknown field(s) in scheme file: {sorted(extra)}")
    name = doc.get("scheme")
    window = doc.get("window", [-3, 3])
    if not (isinstance(window, list) and len(window) == 2 and all(isinstance(x, int) for x in window)):
        raise InputError("scheme window must be [lo, hi] integers")
    if name == "min":
        return MinimalSubtraction(), tuple(window)
    if name == "MOM":
        ref = doc.get("reference")
        if not isinstance(ref, dict):
            raise InputError("MOM scheme needs a 'reference' table {legs: {symbol: value}}")
        try:
            table = {int(n): {k: parse_value(str(v)) for k, v in mu.items()} for n, mu in ref.items()}
        except (ValueError, AttributeError) as exc:
            raise InputError(f"bad reference table: {exc}") from None
        return MomentumSubtraction(table), tuple(window)
    raise InputError(f"unknown scheme {name!r}; use 'min' or 'MOM'")


def _graph_entry(spec, where: str) -> FeynmanGraph:
    if isinstance(spec, str):
        if spec not in fixture_names():
            raise InputError(f"{where}: unknown graph name {spec!r}")
        spec = fixture_document(spec)
    try:
        return FeynmanGraph.from_dict(spec)
    except (GraphError, TypeError, AttributeError) as exc:
        raise InputError(f"{where}: {exc}") from None


def _character(doc: dict) -> Character:
    extra = set(doc) - {"values"}
    if extra:
        raise InputError(f"unknown field(s) in character file: {sorted(extra)}")
    values = {}
    for i, entry in enumerate(doc.get("values", [])):
        where = f"values[{i}]"
        if not isinstance(entry, dict) or set(entry) - {"graph", "series"} or "graph" not in entry:
            raise InputError(f"{where}: expected {{'graph': ..., 'series': ...}}")
        g = _graph_entry(entry["graph"], where)
        try:
            values[g] = LaurentSeries.from_dict(entry.get("series", {}))
        except (ValueError, TypeError, KeyError) as exc:
            raise InputError(f"{where}.series: {exc}") from None
    return Character(values)


def _series_text(s: LaurentSeries, window) -> str:
    lo, hi = window
    hi = min(hi, s.hi)
    if hi < lo:
        return "(outside window)"
    parts = []
    for k in range(lo, int(hi) + 1):
        c = s.coefficient(k) if k >= s.lo else None
        if c is None or c.is_zero():
            continue
        parts.append(f"({c})" + ("" if k == 0 else f"*eps^{k}"))
    body = " + ".join(parts) or "0"
    return f"{body} + O(eps^{int(hi) + 1})"


def cmd_renorm(args):
    src = load_input(args.graph)
    g = _graph(src)
    if args.template:
        try:
            keys = closure([g])
        except RenormError as exc:
            raise PreconditionError(str(exc)) from None
        entries = []
        for k in keys:
            cg = canonical_graph(k)
            entries.append({"graph": cg.to_dict(), "series": {"lo": -cg.h1, "hi": 3, "coefficients": {}}})
        _emit(args, json.dumps({"values": entries}, indent=1, sort_keys=True) + "\n")
        return 0
    if not args.character or not args.scheme:
        raise InputError("renorm needs --character and --scheme (or --template)")
    cdoc, csrc = _read_json(args.character, "character")
    sdoc, ssrc = _read_json(args.scheme, "scheme")
    phi = _character(cdoc)
    scheme, window = _scheme(sdoc)
    try:
        b = Birkhoff(phi, scheme)
        minus, plus = b.minus(g), b.plus(g)
    except RenormError as exc:
        raise PreconditionError(str(exc)) from None
    lines = [f"scheme: {scheme.name}", f"window: [{window[0]}, {window[1]}]",
             f"phi_minus = {_series_text(minus, window)}", f"phi_plus = {_series_text(plus, window)}"]
    try:
        lines.append(f"physical limit = {physical_limit(plus)}")
    except RenormError as exc:
        lines.append(f"physical limit: {exc}")
    _emit(args, _manifest(args, [src, csrc, ssrc]).header() + "\n".join(lines) + "\n")
    return 0


def cmd_examples(args):
    if args.name == "list":
        _emit(args, "\n".join(fixture_names()) + "\n")
        return 0
    doc = fixture_document(args.name)
    _emit(args, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return 0


def cmd_replay(args):
    try:
        with open(args.report, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{args.report}: {exc}") from None
    man = RunManifest.from_report(text)
    for source, digest in man.inputs.items():
        missing = source not in fixture_names() and not os.path.exists(source)
        if missing or _digest_of(source) != digest:
            raise PreconditionError(f"input {source} changed or is missing since the report was made")
    buf = _io.StringIO()
    with redirect_stdout(buf):
        code = main(man.command)
    out = buf.getvalue()
    if args.check:
        if out != text:
            sys.stdout.write("replay differs from the report\n")
            return 3
        sys.stdout.write("replay identical\n")
        return code
    sys.stdout.write(out)
    return code


def _digest_of(source: str) -> str:
    try:
        return load_input(source).digest
    except InputError:
        # character and scheme files are not graph/system inputs
        return _read_json(source, "input")[1].digest


# --- parser ------------------------------------------------------------------


def _solver_flags(p):
    p.add_argument("--starts", type=int, default=8, help="random starts per branch (default 8)")
    p.add_argument("--max-iterations", type=int, default=100, help="Newton iterations per start")
    p.add_argument("--tau", type=float, default=1e-9, help="witness acceptance threshold")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
    p.add_argument("--chart", choices=CHARTS, default=None, help="chart for graph/quadric inputs (default projective)")
    p.add_argument("--json", action="store_true", help="machine-readable JSON output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quadlandau", description="Landau singularities of quadratic integrals.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        p.add_argument("-o", "--output", help="write the report to a file instead of stdout")
        return p

    p = add("route", cmd_route, "momentum routing table of a graph")
    p.add_argument("graph")
    p.add_argument("--base", help="base vertex (default: last vertex with external legs)")
    p = add("symanzik", cmd_symanzik, "first Symanzik polynomial with determinant cross-check")
    p.add_argument("graph")
    p = add("power-count", cmd_power_count, "superficial degree of divergence of G and its 1PI subgraphs")
    p.add_argument("graph")
    p.add_argument("--dimension", type=int, help="override the space-time dimension")

    lp = sub.add_parser("landau", help="Landau systems: gen, verify, member, scan")
    lsub = lp.add_subparsers(dest="landau_command", required=True)

    def ladd(name, fn, help_):
        q = lsub.add_parser(name, help=help_)
        q.set_defaults(func=fn)
        q.add_argument("-o", "--output", help="write the result to a file instead of stdout")
        return q

    q = ladd("gen", cmd_landau_gen, "emit the Landau system of a graph or quadric family")
    q.add_argument("input")
    q.add_argument("--chart", choices=CHARTS, default="projective")
    q.add_argument("--seed", type=int, default=DEFAULT_SEED)
    q = ladd("verify", cmd_landau_verify, "residual report of a witness")
    q.add_argument("system")
    q.add_argument("witness")
    q.add_argument("--tau", type=float, default=1e-9)
    q = ladd("member", cmd_landau_member, "membership test at a parameter point")
    q.add_argument("input")
    q.add_argument("--at", required=True, help='point, e.g. "p=(3i,0,0,0);m=(1,2)"')
    q.add_argument("--expect", choices=["member"], help="exit with code 4 if no witness is found")
    _solver_flags(q)
    q = ladd("scan", cmd_landau_scan, "membership tests over a parameter grid")
    q.add_argument("input")
    q.add_argument("--grid", required=True, help='axes, e.g. "t.re=-2:2:41;t.im=-2:2:41" or "t=0,1,2"')
    q.add_argument("--at", help="values of parameters not on the grid")
    _solver_flags(q)

    p = add("regularize", cmd_regularize, "diagonalizing basis and regulator of every form")
    p.add_argument("input")
    p.add_argument("--at", help="quasi-regular point at which to certify positivity")
    p.add_argument("--epsilon", default="eps", help="name of the regulator symbol")

    p = add("hopf", cmd_hopf, "coproduct or antipode of a 1PI graph")
    p.add_argument("operation", choices=["coproduct", "antipode"])
    p.add_argument("graph")

    p = add("renorm", cmd_renorm, "Birkhoff decomposition of a character on a graph")
    p.add_argument("graph")
    p.add_argument("--character", help="character file {values: [{graph, series}]}")
    p.add_argument("--scheme", help='scheme file {"scheme": "min"|"MOM", "window": [lo, hi], "reference": {...}}')
    p.add_argument("--template", action="store_true", help="print a character file skeleton for the graph")

    p = add("examples", cmd_examples, "print a fixture as an input file ('list' to enumerate)")
    p.add_argument("name")

    p = add("replay", cmd_replay, "re-run the command recorded in a report's manifest")
    p.add_argument("report")
    p.add_argument("--check", action="store_true", help="compare with the report byte for byte")
    return ap


def _strip_output(argv: list[str]) -> list[str]:
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a in ("-o", "--output"):
            skip = True
            continue
        if a.startswith("--output="):
            continue
        out.append(a)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    args.manifest_argv = _strip_output(argv)
    try:
        return args.func(args)
    except (InputError, GraphError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (PreconditionError, RegularizationError, RenormError, QuadFormError, LandauError) as exc:
        sys.stderr.write(f"precondition violated: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())

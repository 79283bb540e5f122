"""Command line front end.

Exit codes: 0 success, 1 input error, 2 a reproduce check failed.
Reports are JSON (sorted keys, no timestamps) so identical configs give
identical bytes; run metadata goes to a ``.meta.json`` sidecar next to ``--out``.
"""

from __future__ import annotations

import argparse
import csv
import inspect
import io
import json
import logging
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from kissmax import __version__
from kissmax.besicovitch import depth, greedy_select, validate_family
from kissmax.codes import CodeSearchBudget, STRICT_MARGIN, asymptotic_bounds, canonical_code, code_search
from kissmax.errors import InputError
from kissmax.geometry import DEFAULT_TOL, INF, Kind, NormedSpace
from kissmax.maxop import RadiusWindow, SearchBudget, maximal_value, weak_constant_search
from kissmax.schemas import family_to_json, load_json, parse_code, parse_family, parse_measure
from kissmax.witnesses import attainment_measure, witness_weak11, witness_weakpp

log = logging.getLogger("kissmax")

CANONICAL = ["PENTAGON", "HEXAGON", "ICOSAHEDRON", "SEGMENT", "HYPERCUBE"]


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _norm(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return INF
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"norm must be a number >= 1 or 'inf', got {text!r}") from exc


def _bound(text: str) -> float:
    return INF if text.lower() in ("inf", "infinity") else float(text)


def _common(p: argparse.ArgumentParser, needs_input: bool = False):
    p.add_argument("--in", dest="input", required=needs_input, help="input JSON file")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--exhaustive-threshold", type=int, default=12)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kissmax", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    mx = sub.add_parser("maxop", help="maximal operator").add_subparsers(dest="action", required=True)
    ev = mx.add_parser("eval", help="M f at a point; atoms carry the function in 'value'")
    _common(ev, needs_input=True)
    ev.add_argument("--point", type=_floats, required=True)
    ev.add_argument("--lower", type=float, default=0.0, help="radius window lower end s")
    ev.add_argument("--upper", type=_bound, default=INF, help="radius window upper end S")
    ev.add_argument("--kind", choices=["open", "closed"], default="closed")

    wt = sub.add_parser("weaktype", help="weak-type constants").add_subparsers(dest="action", required=True)
    ws = wt.add_parser("search", help="lower bound on the weak (p,p) norm of M_mu")
    _common(ws, needs_input=True)
    ws.add_argument("--p", type=float, default=1.0)
    ws.add_argument("--max-iterations", type=int, default=200)

    bz = sub.add_parser("besicovitch", help="ball families").add_subparsers(dest="action", required=True)
    for name in ("validate", "greedy", "depth"):
        _common(bz.add_parser(name), needs_input=True)

    cd = sub.add_parser("code", help="spherical codes").add_subparsers(dest="action", required=True)
    cs = cd.add_parser("search", help="max-min separation search")
    _common(cs)
    cs.add_argument("--dimension", "--d", type=int, required=True)
    cs.add_argument("--norm", type=_norm, default=2.0)
    cs.add_argument("--n", type=int, required=True)
    cs.add_argument("--iterations", type=int, default=CodeSearchBudget.iterations)
    cs.add_argument("--margin", type=float, default=STRICT_MARGIN)
    cc = cd.add_parser("canon", help="canonical codes")
    _common(cc)
    cc.add_argument("--name", type=str.upper, choices=CANONICAL, required=True)
    cc.add_argument("--d", type=int, default=None)

    wn = sub.add_parser("witness", help="extremal witness measures").add_subparsers(dest="action", required=True)
    for name in ("weak11", "weakpp", "attain"):
        w = wn.add_parser(name)
        _common(w)
        w.add_argument("--code", type=str.upper, choices=CANONICAL, help="canonical code (or --in code.json)")
        w.add_argument("--d", type=int, default=None, help="dimension for HYPERCUBE")
        w.add_argument("--margin", type=float, default=STRICT_MARGIN)
        if name == "weak11":
            w.add_argument("--c", default="1/100", help="hub weight, e.g. 1e-4 or 1/10000")
        elif name == "weakpp":
            w.add_argument("--p", type=float, required=True)
        else:
            w.add_argument("--n-max", type=int, default=10)

    bd = sub.add_parser("bounds", help="asymptotic reference values for Euclidean R^d")
    _common(bd)
    bd.add_argument("--d", type=int, nargs="+", required=True)

    rp = sub.add_parser("reproduce", help="run the end-to-end checks")
    _common(rp)
    rp.add_argument("--case", action="append", help="case name (repeatable); default all")
    return ap


# -- commands ---------------------------------------------------------------------

def _cmd_maxop(args) -> dict:
    mu, f = parse_measure(load_json(args.input))
    if f is None:
        raise InputError("atoms: maxop eval needs a 'value' on every atom")
    window = RadiusWindow(args.lower, args.upper)
    kind = Kind(args.kind)
    value, empty = maximal_value(mu, f, mu.space.check(args.point), window, kind, with_flag=True)
    return {"value": value, "empty_supremum": empty}


def _cmd_weaktype(args) -> dict:
    mu, _ = parse_measure(load_json(args.input))
    budget = SearchBudget(restarts=64 if args.restarts is None else args.restarts,
                          max_iterations=args.max_iterations, seed=args.seed,
                          exhaustive_threshold=args.exhaustive_threshold, threads=args.threads)
    args.resolved["budget"] = vars(budget)
    return weak_constant_search(mu, args.p, budget).to_dict()


def _cmd_besicovitch(args) -> dict:
    fam = parse_family(load_json(args.input))
    if args.action == "validate":
        ok, pair = validate_family(fam, args.tol)
        return {"besicovitch": ok, "violating_pair": list(pair) if pair else None}
    if args.action == "greedy":
        sel = greedy_select(fam, args.tol)
        return {"selected": family_to_json(sel), "count": len(sel)}
    return depth(fam, args.tol, threads=args.threads).to_dict()


def _load_code(args):
    if args.input:
        return parse_code(load_json(args.input))
    if not args.code:
        raise InputError("give --code NAME or --in code.json")
    return canonical_code(args.code, args.d)


def _cmd_code(args) -> dict:
    if args.action == "canon":
        code = canonical_code(args.name, args.d)
        return {"code": code.to_dict(), "separation": code.separation, "strict": code.is_strict()}
    space = NormedSpace(args.dimension, args.norm)
    budget = CodeSearchBudget(restarts=32 if args.restarts is None else args.restarts,
                              iterations=args.iterations, seed=args.seed, threads=args.threads)
    args.resolved["budget"] = vars(budget)
    return code_search(space, args.n, budget, args.margin).to_dict()


def _cmd_witness(args) -> dict:
    code = _load_code(args)
    if args.action == "weak11":
        return witness_weak11(code, args.c, args.margin).to_dict()
    if args.action == "weakpp":
        return witness_weakpp(code, args.p, args.margin).to_dict()
    packs = attainment_measure(code, args.n_max, args.margin)
    return {
        "blocks": [
            {"n": p.provenance["block"], "predicted": p.predicted_quotient, "computed": p.computed.value,
             "block_level_quotient": p.provenance["block_level_quotient"]}
            for p in packs
        ],
        "limit": len(code),
        "spacing": packs[0].provenance["spacing"],
    }


def _cmd_bounds(args) -> dict:
    rows = [asymptotic_bounds(d) for d in args.d]
    args.table = rows
    return {"rows": rows}


def _cmd_reproduce(args) -> dict:
    from kissmax.reproduce import CASES, run_cases

    names = args.case or list(CASES)
    unknown = [n for n in names if n not in CASES]
    if unknown:
        raise InputError(f"unknown case(s) {unknown}; choose from {sorted(CASES)}")
    # cases pin their own seeds and sample counts; record them as the resolved config
    args.resolved["case_parameters"] = {
        n: {k: v.default for k, v in inspect.signature(CASES[n]).parameters.items()} for n in names
    }
    results = run_cases(names)
    rows = [r.row() for r in results]
    for r in rows:
        log.info("%-14s %-32s %s", r["case"], r["target"], r["status"])
    args.table = [{k: (json.dumps(v, sort_keys=True) if isinstance(v, dict) else v)
                   for k, v in r.items() if k != "seconds"} for r in rows]
    args.failed = any(not r.passed for r in results)
    # wall-clock timings vary run to run, keep them out of the report body
    args.timings = {r["case"]: r["seconds"] for r in rows}
    return {"cases": [{k: v for k, v in r.items() if k != "seconds"} for r in rows]}


COMMANDS = {
    "maxop": _cmd_maxop,
    "weaktype": _cmd_weaktype,
    "besicovitch": _cmd_besicovitch,
    "code": _cmd_code,
    "witness": _cmd_witness,
    "bounds": _cmd_bounds,
    "reproduce": _cmd_reproduce,
}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _config(args) -> dict:
    skip = {"resolved", "table", "failed", "timings", "verbose"}
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    cfg.update(args.resolved)
    return _jsonable(cfg)


def _write_table(rows: list[dict], path: Path):
    buf = io.StringIO()
    fields = list(rows[0]) if rows else []
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (json.dumps(_jsonable(v)) if isinstance(v, (list, dict)) else _jsonable(v))
                    for k, v in r.items()})
    path.write_text(buf.getvalue(), encoding="utf-8")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.resolved, args.table, args.failed, args.timings = {}, None, False, {}
    started = time.perf_counter()
    try:
        result = COMMANDS[args.command](args)
    except InputError as exc:
        print(f"kissmax: input error: {exc}", file=sys.stderr)
        return 1
    report = {"command": " ".join(filter(None, [args.command, getattr(args, "action", None)])),
              "config": _config(args), "result": _jsonable(result)}
    text = json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if args.out:
        out = Path(args.out)
        out.write_text(text, encoding="utf-8")
        if args.table is not None:
            _write_table(args.table, out.with_suffix(".csv"))
        meta = {
            "version": __version__,
            "python": platform.python_version(),
            "finished_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "seconds": round(time.perf_counter() - started, 3),
            "case_seconds": args.timings,
        }
        out.with_name(out.name + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.command == "reproduce":
        for row in report["result"]["cases"]:
            print(f"{row['case']:<14} {row['target']:<34} {row['status']}", file=sys.stderr)
    return 2 if args.failed else 0


if __name__ == "__main__":
    sys.exit(main())

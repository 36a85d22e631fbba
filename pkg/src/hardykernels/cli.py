"""Command-line front end.

Commands: eval, sweep, certify, forms, cache {stats, clear}.
Exit codes: 0 success or all checks passed, 1 check failure,
2 evaluation error, 64 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

from .cache import EvalCache
from .certifier import (
    CSV_COLUMNS,
    SUITES,
    GridSpec,
    _clean,
    default_grids,
    evaluate,
    run_check,
    sweep_rows,
)
from .forms import TestFunction, dirichlet_form, gsr_residual, hardy_form, potential_term, semigroup_form, standard_suite
from .kernels import EvalPoint, QuadratureError
from .perturbation import SeriesControl
from .specfun import AccuracyBudget, ChannelParams, CouplingParams, DomainError

EXIT_OK, EXIT_FAIL, EXIT_EVAL, EXIT_USAGE = 0, 1, 2, 64
METHODS = ("auto", "closed", "subordination", "spectral", "series")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p):
    g = p.add_argument_group("coupling")
    g.add_argument("--zeta", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--eta", type=float)
    g.add_argument("--d", type=int)
    g.add_argument("--ell", type=int)
    g.add_argument("--kappa", type=float)
    p.add_argument("--budget", help="JSON object: rel_tol, abs_tol, max_subdivisions, series_terms_max, tail_tol")
    p.add_argument("--grid", help="JSON object (or path to a JSON file) with GridSpec fields")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--cache", help="path of the evaluation cache file")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="JSON file with flag values; flags take precedence")
    p.add_argument("--timings", action="store_true", default=None, help="record runtimes in reports")


def build_parser():
    parser = _Parser(prog="hardykernels", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    p = sub.add_parser("eval", help="evaluate a kernel at one point")
    _common(p)
    for name in ("t", "r", "s"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--method", choices=METHODS)
    p = sub.add_parser("sweep", help="kernel values over a grid as CSV")
    _common(p)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--ratio", choices=("none", "envelope"))
    p = sub.add_parser("certify", help="run check suites and write a JSON report")
    _common(p)
    p.add_argument("--suite", help="one of " + ", ".join(SUITES + ("all",)))
    p = sub.add_parser("forms", help="quadratic forms on test functions")
    _common(p)
    p.add_argument("--function", help="TestFunction JSON (default: the standard bump suite)")
    p.add_argument("--t", type=float, help="also evaluate the semigroup form at this time")
    p = sub.add_parser("cache", help="inspect or clear the evaluation cache")
    p.add_argument("action", choices=("stats", "clear"))
    p.add_argument("--cache", required=False)
    p.add_argument("--config")
    return parser


def _load_json(text):
    if text is None:
        return None
    path = Path(text)
    if not text.lstrip().startswith("{") and path.exists():
        text = path.read_text()
    try:
        return json.loads(text)
    except ValueError as exc:
        raise UsageError(f"invalid JSON: {exc}") from None


def _merge_config(args):
    if getattr(args, "config", None) is None:
        return args
    cfg = _load_json(args.config)
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    for k, v in cfg.items():
        k = k.replace("-", "_")
        if not hasattr(args, k):
            raise UsageError(f"unknown config key {k}")
        if getattr(args, k) is None:
            setattr(args, k, json.dumps(v) if k in ("grid", "budget", "function") and not isinstance(v, str) else v)
    return args


def coupling(args, required=True) -> CouplingParams | None:
    """CouplingParams from either (zeta, alpha, eta) or (d, ell, alpha, kappa)."""
    direct = args.zeta is not None or args.eta is not None
    channel = args.d is not None or args.ell is not None or args.kappa is not None
    if direct and channel:
        raise UsageError("give either --zeta/--eta or --d/--ell/--kappa, not both")
    if args.alpha is None:
        if required or direct or channel:
            raise UsageError("--alpha is required")
        return None
    if channel:
        if args.d is None:
            raise UsageError("--d is required with --ell/--kappa")
        ch = ChannelParams(args.d, args.ell or 0)
        return CouplingParams.from_channel(ch, args.alpha, args.kappa or 0.0)
    if args.zeta is None:
        raise UsageError("--zeta is required")
    return CouplingParams(args.zeta, args.alpha, args.eta or 0.0)


def _budget(args):
    b = _load_json(args.budget) or {}
    if not isinstance(b, dict):
        raise UsageError("budget must be a JSON object")
    known = set(AccuracyBudget.__dataclass_fields__)
    unknown = set(b) - known - {"tail_tol"}
    if unknown:
        raise UsageError(f"unknown budget fields {sorted(unknown)}")
    budget = AccuracyBudget(**{k: v for k, v in b.items() if k in known})
    control = SeriesControl(tail_tol=b["tail_tol"]) if "tail_tol" in b else SeriesControl()
    return budget, control


def _budget_key(budget, control):
    return {"rel_tol": budget.rel_tol, "abs_tol": budget.abs_tol, "tail_tol": control.tail_tol}


def _grid(args, base=None):
    g = _load_json(args.grid)
    d = base.to_dict() if base is not None else GridSpec().to_dict()
    if g is not None:
        if not isinstance(g, dict):
            raise UsageError("grid must be a JSON object")
        d.update(g)
    if args.seed is not None:
        d["seed"] = args.seed
    if args.zeta is not None:
        d["zeta_values"] = [args.zeta]
    if args.alpha is not None:
        d["alpha_values"] = [args.alpha]
    return GridSpec.from_dict(d)


def _emit(args, text):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def cmd_eval(args):
    params = coupling(args)
    for name in ("t", "r", "s"):
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required")
    point = EvalPoint(args.t, args.r, args.s)
    budget, control = _budget(args)
    method = args.method or "auto"
    cache = EvalCache(args.cache) if args.cache else None
    key = {"kind": "eval", "params": [params.zeta, params.alpha, params.eta], "point": [point.t, point.r, point.s], "method": method}
    bkey = _budget_key(budget, control)
    rec = cache.get(key, bkey) if cache else None
    if rec is None:
        res = evaluate(params, point, method, budget, control)
        rec = {"value": float(res.value), "err_est": float(res.err_est), "method": res.method}
        if cache:
            cache.put(key, rec, bkey)
    out = dict(rec, zeta=params.zeta, alpha=params.alpha, eta=params.eta, kappa=params.kappa, t=point.t, r=point.r, s=point.s)
    if args.format == "json":
        _emit(args, json.dumps(out, sort_keys=True) + "\n")
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerow([_fmt(v) for v in ("eval", params.zeta, params.alpha, params.eta, point.t, point.r, point.s, rec["value"], None, None, rec["method"], rec["err_est"])])
        _emit(args, buf.getvalue())
    else:
        _emit(args, f"value={rec['value']!r} err_est={rec['err_est']!r} method={rec['method']}\n")
    return EXIT_OK


def cmd_sweep(args):
    params = coupling(args)
    grid = _grid(args, GridSpec(rs_values=tuple(2.0 ** k for k in range(-6, 7))))
    budget, control = _budget(args)
    method = args.method or "auto"
    envelope = args.ratio == "envelope"
    cache = EvalCache(args.cache) if args.cache else None
    bkey = _budget_key(budget, control)
    key = {
        "kind": "sweep",
        "params": [params.zeta, params.alpha, params.eta],
        "t": list(grid.t_values),
        "rs": list(grid.rs_values),
        "method": method,
        "envelope": envelope,
    }
    rows = cache.get(key, bkey) if cache else None
    if rows is None:
        rows = _clean(sweep_rows(params, grid.t_values, grid.rs_values, grid.rs_values, method, envelope, budget, control))
        if cache and not any(r["error"] for r in rows):
            cache.put(key, rows, bkey)
    failed = any(r["error"] for r in rows)
    if args.format == "json":
        _emit(args, json.dumps(rows, sort_keys=True, indent=1) + "\n")
    else:
        cols = CSV_COLUMNS + (("error",) if failed else ())
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in cols])
        _emit(args, buf.getvalue())
    return EXIT_EVAL if failed else EXIT_OK


def cmd_certify(args):
    if args.suite is None:
        raise UsageError("--suite is required")
    if args.suite not in SUITES + ("all",):
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES + ('all',))}")
    budget, control = _budget(args)
    names = SUITES if args.suite == "all" else (args.suite,)
    cache = EvalCache(args.cache) if args.cache else None
    bkey = _budget_key(budget, control)
    reports = []
    for name in names:
        grids = default_grids()[name]
        if args.grid is not None:
            grids = [_grid(args)]
        elif args.seed is not None or args.zeta is not None or args.alpha is not None:
            grids = [_grid(args, g) for g in grids]
        for g in grids:
            key = {"kind": "report", "suite": name, "grid": g.to_dict(), "control": asdict(control)}
            rep = cache.get(key, bkey) if cache and not args.timings else None
            if rep is None:
                t0 = time.perf_counter()
                r = run_check(name, g, control)
                rep = json.loads(r.to_json(timings=bool(args.timings)))
                print(f"{name}: {r.status} ({time.perf_counter() - t0:.1f} s)", file=sys.stderr)
                if cache and not args.timings:
                    cache.put(key, rep, bkey)
            else:
                print(f"{name}: {rep['status']} (cached)", file=sys.stderr)
            reports.append(rep)
    statuses = [r["status"] for r in reports]
    overall = "fail" if "fail" in statuses else "warn" if "warn" in statuses else "pass"
    doc = {"suite": args.suite, "status": overall, "reports": reports}
    _emit(args, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return {"pass": EXIT_OK, "fail": EXIT_FAIL, "warn": EXIT_EVAL}[overall]


def cmd_forms(args):
    params = coupling(args)
    if args.function:
        try:
            funcs = [TestFunction.from_dict(_load_json(args.function))]
        except (KeyError, TypeError) as exc:
            raise UsageError(f"invalid test function: {exc}") from None
    else:
        funcs = standard_suite()
    rows = []
    for u in funcs:
        e = dirichlet_form(params.zeta, params.alpha, u)
        row = {
            "function": u.to_dict(),
            "dirichlet": e.value,
            "dirichlet_err": e.err_est,
            "hardy": hardy_form(params, u).value,
            "potential": potential_term(params.zeta, params.alpha, u),
            "gsr_residual": gsr_residual(params, u),
        }
        if args.t is not None:
            row["semigroup"] = semigroup_form(params, args.t, u).value
        rows.append(row)
    out = {"zeta": params.zeta, "alpha": params.alpha, "eta": params.eta, "kappa": params.kappa, "forms": rows}
    _emit(args, json.dumps(_clean(out), sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def cmd_cache(args):
    if not args.cache:
        raise UsageError("--cache is required")
    cache = EvalCache(args.cache)
    if args.action == "clear":
        cache.clear()
        print(f"cleared {args.cache}")
    else:
        print(json.dumps(asdict(cache.stats()), sort_keys=True))
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "sweep": cmd_sweep, "certify": cmd_certify, "forms": cmd_forms, "cache": cmd_cache}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise UsageError("a command is required")
        args = _merge_config(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"inadmissible parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, ArithmeticError, RuntimeError) as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_EVAL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``derivlab <command> [flags]``.

Exit codes: 0 success, 1 verification failure, 2 usage error.
Tables go to stdout (or ``--out``) as CSV; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import catalog, ckmr, extremal, randsums, verify
from .errors import ParameterError
from .seqspace import SeqVector, norm, parse_space

log = logging.getLogger("derivlab")

DEFAULTS = {
    "seed": 0,
    "support_cap": 16,
    "tol": 1e-6,
    "trials": 10_000,
    "format": "csv",
    "theta": 0.5,
    "q": "2,2",
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing helpers

def parse_range(text: str) -> range:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected a..b") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"bad range {text!r}")
    return range(lo, hi + 1)


def parse_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected two comma-separated numbers, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"expected numbers, got {text!r}") from None


def read_vector(path: str) -> SeqVector:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"input file {path} does not exist")
    try:
        return SeqVector.from_json(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON ({exc.msg})") from None
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def write_text(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def emit_table(rows, args, plot_x, plot_y, title, step=()):
    write_text(rows_to_csv(rows), args.out)
    if getattr(args, "plot", False):
        if not args.out:
            raise UsageError("--plot needs --out so the figure can sit next to the CSV")
        from .plotting import figure_path, plot_columns
        path = plot_columns(rows, plot_x, plot_y, figure_path(args.out), title, step)
        print(f"figure written to {path}", file=sys.stderr)


def load_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        p = Path(args.config)
        if not p.exists():
            raise UsageError(f"config file {p} does not exist")
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file: malformed JSON ({exc.msg})") from None
        if not isinstance(data, dict) or any(isinstance(v, (dict, list)) for v in data.values()):
            raise UsageError("config file must be a flat JSON object")
        cfg.update(data)
    for key in ("seed", "tol", "trials", "theta", "q"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    return cfg


# ---------------------------------------------------------------------------
# commands

def cmd_norm(args, cfg):
    v = read_vector(args.input)
    n = max(v.dim, 1)
    space = parse_space(args.space, n)
    write_text(f"{norm(space, v)!r}\n", args.out)
    return 0


def cmd_kappa(args, cfg):
    rng = parse_range(args.range)
    rows = []
    for n in rng:
        space = parse_space(args.space, n)
        F = range(1, n + 1)
        k = extremal.kappa(space, F, seed=cfg["seed"])
        ks = extremal.kappa_star(space, F, tol=cfg["tol"], seed=cfg["seed"])
        rows.append({"n": n, "kappa": k.value, "kappa_star": ks.value,
                     "log_kappa": math.log(k.value), "floor_log_kappa": k.floor_log,
                     "certified_gap": max(k.certified_gap, ks.certified_gap)})
    emit_table(rows, args, "n", ["kappa", "kappa_star"], f"equivalence constants, {args.space}")
    return 0


def _couple_spaces(text: str, n: int):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"--couple expects B0,B1; got {text!r}")
    return parse_space(parts[0], n), parse_space(parts[1], n)


def cmd_distance(args, cfg):
    rows = []
    for n in parse_range(args.range):
        M, N = _couple_spaces(args.couple, n)
        d = extremal.calderon_distance(M, N, range(1, n + 1), seed=cfg["seed"])
        rows.append({"n": n, "gap_MN": d.gap_MN, "gap_NM": d.gap_NM, "distance": d.distance})
    emit_table(rows, args, "n", ["gap_MN", "gap_NM", "distance"], f"distance {args.couple}")
    return 0


def _builtin_or_pair(text: str, n: int) -> catalog.Couple:
    try:
        return catalog.builtin_couple(text, n)
    except ParameterError:
        B0, B1 = _couple_spaces(text, n)
        return catalog.Couple(text, B0, B1)


def cmd_derive(args, cfg):
    v = read_vector(args.input)
    params = {}
    for item in args.params or []:
        if "=" not in item:
            raise UsageError(f"--params entries look like key=value, got {item!r}")
        k, val = item.split("=", 1)
        try:
            params[k] = float(val)
        except ValueError:
            params[k] = val
    for key in ("p0", "p1"):
        if getattr(args, key) is not None:
            params[key] = getattr(args, key)
    if args.theta is not None:
        params["theta"] = args.theta
    if args.couple:
        params["couple"] = args.couple
    params.setdefault("n", max(16, v.dim))
    params["n"] = int(params["n"])
    m = catalog.make_map(args.map, **params)
    out = m(v)
    write_text(out.to_json() + "\n", args.out)
    return 0


def cmd_selector(args, cfg):
    a = read_vector(args.input)
    theta = cfg["theta"]
    if args.kind == "lions-peetre":
        if args.p0 is None or args.p1 is None:
            raise UsageError("lions-peetre selector needs --p0 and --p1")
        rep = ckmr.lions_peetre_selector(a, args.p0, args.p1, theta)
    else:
        n = max(a.dim, 1)
        couple = _builtin_or_pair(args.couple or "l2", n).pair()
        rep = ckmr.single_slot_selector(a, args.floor, args.sign, theta, couple,
                                        parse_pair(cfg["q"]) if isinstance(cfg["q"], str) else cfg["q"])
    obj = rep.to_json_obj()
    obj["delta"] = ckmr.delta(rep.jseq).to_json_obj()
    obj["delta_prime"] = ckmr.delta_prime(rep.jseq).to_json_obj()
    write_text(json.dumps(obj, indent=1) + "\n", args.out)
    return 0


def cmd_verify(args, cfg):
    try:
        checks = verify.run(args.suite, seed=int(cfg["seed"]), tol=float(cfg["tol"]))
    except KeyError as exc:
        raise UsageError(f"unknown suite {exc.args[0]!r}") from None
    lines = [c.line() for c in checks]
    failed = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    write_text("\n".join(lines) + "\n", args.out)
    return 1 if failed else 0


def cmd_growth(args, cfg):
    rng = parse_range(args.range)
    couple = _builtin_or_pair(args.couple, rng.stop - 1)
    g = catalog.growth_diagnostic(couple, rng.stop - 1, rng.start)
    print(f"omega scale nonconstant on range: {g['nonconstant']}", file=sys.stderr)
    emit_table(g["rows"], args, "n", ["kappa", "kappa_star", "floor_log_kappa"],
               f"growth, {couple.name}", step=("floor_log_kappa",))
    return 0


def _delta_values(source: str, n: int) -> np.ndarray:
    if source == "loglog":
        return catalog.slow_growth_weights(n)
    if source == "one":
        return np.ones(n)
    p = Path(source)
    if not p.exists():
        raise UsageError(f"--delta {source!r} is neither 'loglog', 'one' nor a file")
    return np.loadtxt(p, delimiter=",", ndmin=1).ravel()


def cmd_slow_growth(args, cfg):
    n = args.n_max
    couple, g = catalog.slow_growth_demo(_delta_values(args.delta, n), n)
    emit_table(g["rows"], args, "n", ["kappa", "kappa_star", "floor_log_kappa"],
               "slow growth demo", step=("floor_log_kappa",))
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON file with defaults; flags win")
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--trials", type=int)
    common.add_argument("--theta", type=float)
    common.add_argument("--q", help="pseudolattice exponents q0,q1")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="derivlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", parents=[common], help="norm of a vector")
    p.add_argument("--space", required=True)
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("kappa", parents=[common], help="kappa and kappa* table")
    p.add_argument("--space", required=True)
    p.add_argument("--range", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("distance", parents=[common], help="Calderon distance table")
    p.add_argument("--couple", required=True, help="M,N")
    p.add_argument("--range", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("derive", parents=[common], help="apply a catalog map")
    p.add_argument("--map", required=True, choices=catalog.MAP_KINDS)
    p.add_argument("--input", required=True)
    p.add_argument("--params", nargs="*", help="key=value pairs")
    p.add_argument("--p0", type=float)
    p.add_argument("--p1", type=float)
    p.add_argument("--couple")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("selector", parents=[common], help="build a bounded selector")
    p.add_argument("--kind", choices=("slot", "lions-peetre"), required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--p0", type=float)
    p.add_argument("--p1", type=float)
    p.add_argument("--floor", type=int, default=0, help="floor of log kappa (slot)")
    p.add_argument("--sign", type=int, choices=(-1, 1), default=-1)
    p.add_argument("--couple")
    p.set_defaults(func=cmd_selector)

    p = sub.add_parser("verify", parents=[common], help="run self-check suites")
    p.add_argument("--suite", default="all",
                   help="one of " + ", ".join(list(verify.SUITES) + ["all"]))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("growth", parents=[common], help="growth diagnostic table")
    p.add_argument("--couple", required=True, help="built-in name or B0,B1")
    p.add_argument("--range", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("slow-growth", parents=[common], help="weighted slow-growth demo")
    p.add_argument("--delta", default="loglog", help="'loglog', 'one' or a CSV file")
    p.add_argument("--n-max", type=int, default=16)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_slow_growth)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args)
        return args.func(args, cfg)
    except (UsageError, ParameterError, ValueError) as exc:
        print(f"derivlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

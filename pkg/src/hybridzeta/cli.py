"""Command-line front end.

Every subcommand writes CSV (with a '#' metadata block) or JSON to stdout or
--out. Exit codes: 0 success, 2 usage or domain error, 3 coverage or missing
zero data, 4 missed zeros.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from decimal import Decimal, InvalidOperation

import numpy as np

from . import __version__
from .errors import CoverageError, DomainError, MissedZeroError, ZeroTableFormatError

DEFAULT_SEED = 20240601
THREADS_ENV = "HYBRIDZETA_THREADS"
LONG_HEIGHT = 1e8  # heights above this need --long-running


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- config / output

def read_config(path):
    """Parse 'key = value' lines; '#' starts a comment. Keys use flag spelling or dest."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = val
    return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def emit(args, meta, columns, rows):
    """Write rows as CSV with a metadata block, or as JSON."""
    meta = {"command": " ".join(args.argv), "seed": args.seed, "version": __version__, **meta}
    if args.format == "json":
        recs = [dict(zip(columns, (r if not isinstance(r, np.generic) else r.item() for r in row)))
                for row in rows]
        text = json.dumps({"meta": meta, "records": recs}, indent=1, default=_jsonable) + "\n"
    else:
        lines = [f"# {k}: {_fmt(v) if not isinstance(v, (list, tuple)) else ' '.join(map(_fmt, v))}"
                 for k, v in meta.items()]
        lines.append(",".join(columns))
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return str(v)


# ---------------------------------------------------------------- parsing helpers

def _parse_int_expr(s):
    """Integers like 1000040, 10^6+40 or 1e6+40."""
    total = 0
    for term in s.replace(" ", "").split("+"):
        if "^" in term:
            b, e = term.split("^")
            total += int(b) ** int(e)
        else:
            total += int(Decimal(term))
    return total


def _parse_X(tok, height):
    tok = tok.strip().lower()
    if tok.startswith("log"):
        p = 1.0
        if "^" in tok:
            p = float(tok.split("^", 1)[1])
        return math.log(height) ** p
    return float(tok)


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


# ---------------------------------------------------------------- hybrid

def _resolve_t0(args):
    """(base_str, t0 offset, zero index or None)."""
    from .zeta_eval import height_of_index

    tok = args.t0.strip()
    if tok.startswith("auto:"):
        key, _, val = tok[5:].partition("=")
        if key != "zero-index":
            raise UsageError(f"unknown t0 spec {tok!r}")
        n = _parse_int_expr(val)
        if n < 1:
            raise UsageError("zero index must be >= 1")
        return height_of_index(n), n
    try:
        Decimal(tok)
    except InvalidOperation:
        raise UsageError(f"cannot parse --t0 {tok!r}") from None
    return tok, None


def cmd_hybrid(args):
    from .hadamard_side import Frame, HybridConfig, figure_data
    from .zeta_eval import HighHeight, find_zeros, find_zeros_high, load_zero_table

    t_str, index = _resolve_t0(args)
    height = float(Decimal(t_str))
    if height > LONG_HEIGHT and not args.long_running:
        raise UsageError("heights above 1e8 use extended-precision phases; pass --long-running")
    if args.samples < 2 or args.span <= 0:
        raise UsageError("need --samples >= 2 and --span > 0")
    Xs = [_parse_X(x, height) for x in (args.X or ["log"])]
    cfgs = [HybridConfig(X, variant=args.variant, appendix_compat=args.appendix_compat,
                         zero_window=args.zero_window) for X in Xs]
    gap = 2 * math.pi / math.log(height / (2 * math.pi))
    reach = (max(args.zero_window, 61) + 10) * gap
    high = height > LONG_HEIGHT
    if args.zeros == "compute":
        if high:
            # a frame anchored at the approximate height; offsets stay small
            span = 2 * reach + args.span + 2
            hh = HighHeight(t_str, span=span)
            zeros = find_zeros_high(hh, -reach, args.span + reach)
            frame = Frame(t_str, span=span, high_precision=True)
            frame.hh = hh
            t0 = 0.0
        else:
            zeros = find_zeros(max(2.0, height - reach), height + args.span + reach)
            frame = Frame()
            t0 = height
        provenance = "computed"
    else:
        if not os.path.exists(args.zeros):
            raise CoverageError(f"zero table {args.zeros!r} not found")
        zeros = load_zero_table(args.zeros)
        base = Decimal(zeros.base_str)
        frame = Frame(zeros.base_str, span=2 * reach + args.span + 2, high_precision=high or None)
        t0 = float(Decimal(t_str) - base)
        provenance = "ingested"
    if index is not None:
        if zeros.index_offset is None:
            raise CoverageError("cannot locate the requested zero index in the table")
        j = index - zeros.index_offset
        if not 0 <= j < len(zeros):
            raise CoverageError(f"zero {index} not in table", needed=(height - gap, height + gap))
        t0 = float(zeros.offsets[j])
    cols, data = figure_data(cfgs, zeros, t0, args.span, args.samples, frame)
    t0_abs = Decimal(zeros.base_str) + Decimal(repr(t0))
    meta = {"t0": str(t0_abs), "X": Xs, "variant": args.variant,
            "appendix_compat": args.appendix_compat, "zero_provenance": provenance,
            "zeros_loaded": len(zeros),
            "cites": "hybrid product P_X Z_X against |zeta| near a tabulated zero"}
    emit(args, meta, cols, data.tolist())
    return 0


# ---------------------------------------------------------------- zeros

def cmd_zeros(args):
    from .zeta_eval import find_zeros

    lo, hi = args.from_, args.to
    if not 2 <= lo < hi:
        raise UsageError("need 2 <= --from < --to")
    if hi > LONG_HEIGHT:
        raise UsageError("zeros command works below 1e8; use hybrid --long-running above")
    table = find_zeros(lo, hi)
    lines = [f"# window: [{_fmt(lo)}, {_fmt(hi)}]", f"# count: {len(table)}",
             f"# first index: {table.index_offset}", f"# version: {__version__}"]
    lines += [f"{v:.12f}" for v in table.ordinates]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------- moments

def cmd_moments(args):
    from .moments import empirical_moment, splitting_ratio

    T = args.T
    if T < 100:
        raise UsageError("--T must be >= 100")
    X = _parse_X(args.X, T) if args.X is not None else None
    density = args.grid_density
    rows = []
    cols = ["target", "k", "T", "X", "value", "stderr", "prediction", "ratio", "grid", "prediction_ref"]
    for k in args.k:
        if not k > -0.5:
            raise DomainError("need k > -1/2")
        if args.target == "splitting":
            if X is None:
                raise UsageError("splitting needs --X")
            if k >= 2 and not args.long_running:
                raise UsageError("k >= 2 splitting runs need --long-running")
            d = density * (2 if k >= 2 else 1)
            res = splitting_ratio(k, T, X, d, parts=True)
            rows.append(["splitting", k, T, X, res.ratio, None, 1.0, res.ratio, res.zeta.grid,
                         "X-free splitting prediction"])
            for name, est in (("zeta", res.zeta), ("P", res.P), ("zeta_over_P", res.zeta_over_P)):
                rows.append([name, k, T, X, est.value, est.stderr, est.prediction, est.ratio,
                             est.grid, est.prediction_ref])
            continue
        if args.target != "zeta" and X is None:
            raise UsageError(f"target {args.target} needs --X")
        est = empirical_moment(args.target, k, T, X, density)
        rows.append([args.target, k, T, X, est.value, est.stderr, est.prediction, est.ratio,
                     est.grid, est.prediction_ref])
    emit(args, {"window": f"[{_fmt(T)}, {_fmt(2 * T)}]", "grid_density": density}, cols, rows)
    return 0


# ---------------------------------------------------------------- rmt

def cmd_rmt(args):
    from . import rmt
    from .smoothing import SmoothingWeight

    if not args.k > -0.5:
        raise DomainError("need k > -1/2")
    if args.N < 1:
        raise UsageError("--N must be >= 1")
    weight = None
    if args.X is not None and args.X.lower() != "none":
        weight = SmoothingWeight(float(args.X))
    spec = rmt.SymbolSpec(args.k, weight)
    modes = ["mc", "det", "predict"] if args.mode == "all" else [args.mode]
    vals = {}
    rows = []
    cols = ["mode", "value", "stderr", "reference"]
    if "det" in modes:
        vals["det"] = rmt.symbol_det(spec, args.N)
        rows.append(["det", vals["det"], 0.0, "Toeplitz determinant of the symbol"])
    if "predict" in modes:
        if spec.pure:
            vals["predict"] = rmt.cue_char_poly_moment(args.N, args.k)
            ref = "exact CUE moment prod Gamma(j)Gamma(j+2k)/Gamma(j+k)^2"
        else:
            vals["predict"] = rmt.fisher_hartwig_prediction(spec, args.N)
            ref = "Fisher-Hartwig E N^(k^2)"
        rows.append(["predict", vals["predict"], 0.0, ref])
    if "mc" in modes:
        est = rmt.heine_expectation_mc(spec, args.N, args.samples, args.seed, args.threads)
        vals["mc"] = est.value
        rows.append(["mc", est.value, est.stderr, f"CUE Monte Carlo, {args.samples} samples"])
    names = [m for m in ("mc", "det", "predict") if m in vals]
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            rows.append([f"{a}/{b}", vals[a] / vals[b], None, "ratio"])
    meta = {"N": args.N, "k": args.k, "X": args.X or "none",
            "symbol": "pure (2-2cos)^k" if spec.pure else "b(theta)(2-2cos)^k"}
    emit(args, meta, cols, rows)
    return 0


# ---------------------------------------------------------------- products

def cmd_products(args):
    from .arithmetic import mertens_gamma_log, mertens_product
    from .euler_side import a_factor, f_factor, predicted_p_moment
    from .specfun import barnes_ratio

    k, sigma, X = args.k, args.sigma, args.X
    rows = []
    for what in args.what:
        if what == "a":
            rows.append([what, k, sigma, None, a_factor(k, sigma), "arithmetic factor a(k, sigma)"])
        elif what == "F":
            rows.append([what, k, sigma, X, f_factor(k, sigma, X), "F_X(k, sigma)"])
        elif what == "P-moment":
            rows.append([what, k, sigma, X, predicted_p_moment(k, sigma, X),
                         "main term a(k, sigma) F_X(k, sigma) for moments of P_X"])
        elif what == "mertens":
            val = mertens_product(int(X), 1.0)
            rows.append([what, None, None, X, val, "prod (1-1/p)^-1 over p <= X"])
            rows.append(["mertens-ratio", None, None, X, val / mertens_gamma_log(X),
                         "ratio to e^gamma log X"])
        elif what == "barnes":
            rows.append([what, k, None, None, barnes_ratio(k), "G^2(k+1)/G(2k+1)"])
    emit(args, {}, ["what", "k", "sigma", "X", "value", "reference"], rows)
    return 0


# ---------------------------------------------------------------- parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of 'key = value' defaults, overridden by flags")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--threads", type=_positive_int,
                        default=int(os.environ.get(THREADS_ENV, "1") or 1),
                        help=f"worker threads (default ${THREADS_ENV} or 1)")
    common.add_argument("--long-running", action="store_true",
                        help="allow runs documented as slow (huge heights, k=2 splitting)")

    p = argparse.ArgumentParser(prog="hybridzeta", description="Hybrid Euler-Hadamard product toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    h = sub.add_parser("hybrid", parents=[common], help="figure data near a zero")
    h.add_argument("--t0", default="auto:zero-index=10^6+40")
    h.add_argument("--span", type=float, default=5.0)
    h.add_argument("--samples", type=int, default=1000)
    h.add_argument("--X", action="append", help="repeatable; number or 'log' (log t0)")
    h.add_argument("--zeros", default="compute", help="'compute' or a zero-table path")
    h.add_argument("--variant", choices=("smoothed", "unsmoothed"), default="smoothed")
    h.add_argument("--appendix-compat", action="store_true")
    h.add_argument("--zero-window", type=_positive_int, default=50)
    h.set_defaults(func=cmd_hybrid)

    z = sub.add_parser("zeros", parents=[common], help="tabulate zeros of zeta")
    z.add_argument("--from", dest="from_", type=float, required=True)
    z.add_argument("--to", type=float, required=True)
    z.set_defaults(func=cmd_zeros)

    m = sub.add_parser("moments", parents=[common], help="empirical moments on [T, 2T]")
    m.add_argument("--k", type=float, action="append")
    m.add_argument("--T", type=float, default=1e4)
    m.add_argument("--X", help="number, 'log' or 'log^p' (powers of log T)")
    m.add_argument("--target", choices=("zeta", "P", "Z", "zeta_over_P", "splitting"), default="zeta")
    m.add_argument("--grid-density", type=float, default=8.0)
    m.set_defaults(func=cmd_moments)

    r = sub.add_parser("rmt", parents=[common], help="Toeplitz / CUE checks")
    r.add_argument("--N", type=int, default=8)
    r.add_argument("--k", type=float, default=1.0)
    r.add_argument("--X", default=None, help="smoothing X, or 'none' for the pure symbol")
    r.add_argument("--samples", type=_positive_int, default=100_000)
    r.add_argument("--mode", choices=("mc", "det", "predict", "all"), default="all")
    r.set_defaults(func=cmd_rmt)

    q = sub.add_parser("products", parents=[common], help="arithmetic factors")
    q.add_argument("--k", type=float, default=1.0)
    q.add_argument("--sigma", type=float, default=0.5)
    q.add_argument("--X", type=float, default=1000.0)
    q.add_argument("--what", action="append", choices=("a", "F", "P-moment", "mertens", "barnes"))
    q.set_defaults(func=cmd_products)
    return p


def parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        conf = read_config(args.config)
        subp = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subp._actions}
        bad = sorted(set(conf) - known)
        if bad:
            raise UsageError(f"unknown config keys: {', '.join(bad)}")
        typed, lists = {}, {}
        for a in subp._actions:
            if a.dest in conf:
                raw = conf[a.dest]
                if a.nargs == 0:
                    typed[a.dest] = raw.lower() in ("1", "true", "yes", "on")
                elif isinstance(a, argparse._AppendAction):
                    # argparse appends to list defaults; apply these only if the flag is absent
                    lists[a.dest] = [a.type(v) if a.type else v for v in raw.split(",")]
                else:
                    typed[a.dest] = a.type(raw) if a.type else raw
        subp.set_defaults(**typed)
        args = parser.parse_args(argv)
        for dest, val in lists.items():
            if getattr(args, dest) is None:
                setattr(args, dest, val)
    if getattr(args, "k", None) is None and args.command == "moments":
        args.k = [1.0]
    if args.command == "products" and not args.what:
        args.what = ["a"]
    args.argv = ["hybridzeta"] + list(argv)
    return args


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CoverageError, FileNotFoundError, ZeroTableFormatError) as exc:
        print(f"coverage error: {exc}", file=sys.stderr)
        needed = getattr(exc, "needed", None)
        if needed:
            print(f"needed zeros over: [{needed[0]:.6f}, {needed[1]:.6f}]", file=sys.stderr)
        return 3
    except MissedZeroError as exc:
        print(f"missed zeros: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: coeffs, family, lvalues, moments, sieve-fns, search, sha.
Outputs are CSV or JSON-lines (UTF-8, LF), deterministic for fixed inputs:
reruns produce byte-identical files.  Failures exit nonzero with a
machine-readable JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import cache as cachemod
from .arith import BumpFunction
from .curve import load_curve
from .errors import ConfigError, QuadTwistError
from .lvalue import central_value_map, ensure_central_values, truncation_length
from .moments import MomentContext
from .search import extreme_search, sha_summary, sha_table
from .sieve import dump_csv, sieve_functions
from .twists import FamilyParams, enum_family, filter_almost_prime, root_number


def _out_stream(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def require_coefficients(cfg, nmax, cache_dir):
    """Load the trace cache; refuse to silently rebuild a large table."""
    path = cachemod.trace_cache_path(cache_dir, cfg.label)
    if not os.path.exists(path):
        raise ConfigError(
            f"no coefficient cache for {cfg.label}; run `quadtwist coeffs "
            f"--curve {cfg.label} --nmax {nmax}` first"
        )
    label, conductor, pmax, ap = cachemod.load_traces(path)
    if label != cfg.label or conductor != cfg.conductor or pmax < nmax:
        raise ConfigError(
            f"coefficient cache covers nmax={pmax}, need {nmax}; run "
            f"`quadtwist coeffs --curve {cfg.label} --nmax {nmax}` first"
        )
    return cachemod.table_from_traces(cfg, nmax, ap, pmax)


def _family_params(args, cfg):
    if getattr(args, "paper_regime", False):
        if args.W is None:
            raise ConfigError("--paper-regime requires --W")
        if args.W < 20:
            raise ConfigError("--paper-regime requires W >= 20")
        return FamilyParams.paper_regime(args.a, args.sign, args.X, args.W)
    W = args.W if args.W is not None else 64
    z = getattr(args, "z", None) or 2.0
    D = getattr(args, "D", None) or max(4.0, args.X ** 0.09)
    M = getattr(args, "M", None) or 1
    s = math.log(D) / math.log(z) if z > 1 else float("nan")
    return FamilyParams(a=args.a, sign=args.sign, X=args.X, W=W, z=z, D=D, s=s, M=M)


def cmd_coeffs(args):
    cfg = load_curve(args.curve)
    table = cachemod.ensure_coefficients(cfg, args.nmax, args.cache_dir)
    print(
        json.dumps(
            {
                "label": cfg.label,
                "nmax": table.nmax,
                "primes": len(table.primes),
                "cache": cachemod.trace_cache_path(args.cache_dir, cfg.label),
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_family(args):
    cfg = load_curve(args.curve)
    params = _family_params(args, cfg)
    family = enum_family(cfg, params)
    if args.W is not None:
        family = filter_almost_prime(family, args.W)
    fh, close = _out_stream(args.out)
    try:
        fh.write("d,omega,factorization,root_number\n")
        for t in family:
            fh.write(f"{t.d},{t.omega},{t.factorization},{root_number(cfg, t.d)}\n")
    finally:
        if close:
            fh.close()
    return 0


def cmd_lvalues(args):
    cfg = load_curve(args.curve)
    params = _family_params(args, cfg)
    family = enum_family(cfg, params)
    need = truncation_length(cfg, int(math.floor(5 * args.X / 2)) * params.sign, args.tol)
    table = require_coefficients(cfg, need, args.cache_dir)
    lvc = cachemod.LValueCache(args.cache_dir, cfg.label, args.tol)
    cvs = ensure_central_values(cfg, table, [t.d for t in family], args.tol, lvc)
    fh, close = _out_stream(args.out)
    try:
        fh.write("d,value,T,tail_bound\n")
        for t in family:
            cv = cvs[t.d]
            fh.write(f"{cv.d},{cv.value!r},{cv.truncation},{cv.tail_bound!r}\n")
    finally:
        if close:
            fh.close()
    return 0


def _parse_window(spec):
    if not spec:
        return None
    lo, hi = spec.split(",")
    return (float(lo), float(hi))


def cmd_moments(args):
    cfg = load_curve(args.curve)
    params = _family_params(args, cfg)
    family = enum_family(cfg, params)
    window = _parse_window(args.window)
    lvalues = None
    table = None
    if args.kind in ("first", "C"):
        need = truncation_length(cfg, int(math.floor(5 * args.X / 2)) * params.sign, args.tol)
        need = max(need, args.pmax)
        table = require_coefficients(cfg, need, args.cache_dir)
        lvc = cachemod.LValueCache(args.cache_dir, cfg.label, args.tol)
        lvalues = central_value_map(cfg, table, [t.d for t in family], args.tol, lvc)
    else:
        table = require_coefficients(cfg, max(args.M + 1, args.pmax), args.cache_dir)
    ctx = MomentContext(
        cfg,
        table,
        params,
        family,
        phi=BumpFunction(),
        lvalues=lvalues,
        resonator_M=args.M,
        resonator_window=window,
        pmax=args.pmax,
    )
    if args.kind == "char":
        reports = [ctx.char_moment(args.n, args.ell)]
    elif args.kind == "first":
        reports = [ctx.first_moment(args.u, args.ell)]
    elif args.kind == "C":
        reports = [ctx.congruence_C(args.ell, args.res_sign)]
    else:
        reports = [ctx.congruence_D(args.ell, args.res_sign)]
    fh, close = _out_stream(args.out)
    try:
        for rep in reports:
            fh.write(rep.to_json() + "\n")
    finally:
        if close:
            fh.close()
    return 0


def cmd_sieve_fns(args):
    table = sieve_functions(args.smax, args.step)
    if args.out in (None, "-"):
        sys.stdout.write("s,F,f\n")
        for s, Fv, fv in table.rows():
            sys.stdout.write(f"{s:.6f},{Fv!r},{fv!r}\n")
    else:
        dump_csv(table, args.out)
    return 0


def cmd_search(args):
    cfg = load_curve(args.curve)
    params = _family_params(args, cfg)
    family = enum_family(cfg, params)
    need = truncation_length(cfg, int(math.floor(5 * args.X / 2)) * params.sign, args.tol)
    table = require_coefficients(cfg, need, args.cache_dir)
    lvc = cachemod.LValueCache(args.cache_dir, cfg.label, args.tol)
    lvalues = central_value_map(cfg, table, [t.d for t in family], args.tol, lvc)
    report = extreme_search(
        cfg,
        params,
        family,
        lvalues,
        table,
        BumpFunction(),
        resonator_window=_parse_window(args.window),
    )
    fh, close = _out_stream(args.out)
    try:
        fh.write(report.to_json() + "\n")
    finally:
        if close:
            fh.close()
    return 0


def cmd_sha(args):
    cfg = load_curve(args.curve)
    params = _family_params(args, cfg)
    family = enum_family(cfg, params)
    if args.W is not None:
        family = filter_almost_prime(family, args.W)
    need = truncation_length(cfg, int(math.floor(5 * args.X / 2)) * params.sign, args.tol)
    table = require_coefficients(cfg, need, args.cache_dir)
    lvc = cachemod.LValueCache(args.cache_dir, cfg.label, args.tol)
    lvalues = central_value_map(cfg, table, [t.d for t in family], args.tol, lvc)
    reports = sha_table(cfg, family, lvalues)
    fh, close = _out_stream(args.out)
    try:
        if args.format == "csv":
            fh.write("d,L_value,torsion_sq,period_twist,tamagawa,S_value\n")
            for r in reports:
                fh.write(
                    f"{r.d},{r.L_value!r},{r.torsion_sq},{r.period_twist!r},"
                    f"{r.tamagawa},{r.S_value!r}\n"
                )
        else:
            for rep in reports:
                fh.write(rep.to_json() + "\n")
            if args.W is not None and args.W >= 20:
                fh.write(json.dumps(sha_summary(reports, args.X, args.W), sort_keys=True) + "\n")
    finally:
        if close:
            fh.close()
    return 0


def build_parser():
    top = argparse.ArgumentParser(prog="quadtwist", description=__doc__)
    top.add_argument(
        "--cache-dir",
        default=cachemod.default_cache_dir(),
        help="cache directory (env QUADTWIST_CACHE_DIR)",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, X=True):
        p.add_argument("--curve", default="11a1", help="curve label or config path")
        if X:
            p.add_argument("--X", type=float, required=True)
            p.add_argument("--a", type=int, default=5, help="residue class mod N0")
            p.add_argument("--sign", type=int, default=1, choices=(1, -1))
            p.add_argument("--W", type=int, default=None)
            p.add_argument("--paper-regime", action="store_true")
        p.add_argument("--out", default=None)

    p = sub.add_parser("coeffs", help="build/extend the coefficient cache")
    p.add_argument("--curve", default="11a1")
    p.add_argument("--nmax", type=int, required=True)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("family", help="enumerate the twist family as CSV")
    common(p)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("lvalues", help="central values over the family as CSV")
    common(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_lvalues)

    p = sub.add_parser("moments", help="moment reports as JSON-lines")
    common(p)
    p.add_argument("--kind", choices=("char", "first", "C", "D"), required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--u", type=int, default=1)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--M", type=int, default=1)
    p.add_argument("--window", default=None, help="resonator window lo,hi")
    p.add_argument("--res-sign", type=int, default=1, choices=(1, -1))
    p.add_argument("--pmax", type=int, default=100_000, help="Euler-product truncation")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("sieve-fns", help="tabulate the sieve functions F, f")
    p.add_argument("--smax", type=float, default=8.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sieve_fns)

    p = sub.add_parser("search", help="extreme-value search report")
    common(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--M", type=int, default=None)
    p.add_argument("--z", type=float, default=None)
    p.add_argument("--D", type=float, default=None)
    p.add_argument("--window", default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("sha", help="BSD combination S(E_d) per twist")
    common(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.set_defaults(func=cmd_sha)
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # paper-regime parameter relations only make sense with X and W set
    if getattr(args, "paper_regime", False) and getattr(args, "W", None) is not None:
        if args.W < 20:
            sys.stderr.write(
                json.dumps({"error": "validation", "detail": "paper regime requires W >= 20"})
                + "\n"
            )
            return 2
    try:
        return args.func(args)
    except QuadTwistError as exc:
        sys.stderr.write(
            json.dumps(
                {"error": type(exc).__name__, "detail": str(exc)}, sort_keys=True
            )
            + "\n"
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())

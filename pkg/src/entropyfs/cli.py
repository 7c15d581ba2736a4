"""Command line interface: ``entropy-fs <subcommand>``.

Subcommands: luxemburg, maximal, rho, sparse {build,apply}, verify
{fs,perez,rahm,tmbs,t0m,main,domination}, sweep, selftest.  Exit codes:
0 success, 1 assertion/check failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import harness
from .corpus import make_function, make_symbol, make_weight
from .errors import ConfigError, DegenerateWeightError, DomainError, ResolutionError
from .grid import DyadicCube, GridFunction
from .maximal import (
    EntropyProfile,
    dyadic_maximal,
    entropy_density,
    entropy_density_maximal,
    entropy_maximal,
    orlicz_maximal,
    parse_epsilon,
)
from .orlicz import ToleranceConfig, luxemburg_norm, parse_young
from .sparse import (
    family_text,
    parse_family_text,
    parse_signs,
    sparse_commutator_apply,
)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--level", type=int, default=10, help="grid level J (cells = 2^J)")
    p.add_argument("--m", type=int, default=1, help="commutator order")
    p.add_argument("--weight", default="const:1", help="weight spec")
    p.add_argument("--function", default="indicator:0:0.25", help="function spec")
    p.add_argument("--bmo", default="haar", help="symbol spec")
    p.add_argument("--epsilon", default="logpow:1", help="epsilon gauge spec")
    p.add_argument("--t-grid", default=None, help="LO:HI:N geometric threshold grid")
    p.add_argument("--series-R", type=int, default=20, dest="series_r", help="series truncation")
    p.add_argument("--ratio", type=float, default=1.0, help="orlicz bump exponent rho (perez)")
    p.add_argument("--sparse-ratio", type=float, default=None, help="stopping ratio (default 2*56^m)")
    p.add_argument("--seed", type=int, default=1234, help="corpus seed")
    p.add_argument("--out", choices=("csv", "json"), default="csv", help="stdout format")
    p.add_argument("--tol", type=float, default=1e-10, help="bisection relative tolerance")
    p.add_argument("--signs", default="alt", help="martingale sign pattern: alt|plus|random:SEED")
    p.add_argument("--lattices", default="0,1,2", help="comma-separated lattice ids")
    p.add_argument("--timing", action="store_true", help="report wall times (breaks byte determinism)")


def _parse_cube(spec: str) -> DyadicCube:
    try:
        lat, lev, idx = (int(tok) for tok in spec.split(":"))
        return DyadicCube(lat, lev, idx)
    except ValueError as exc:
        raise ConfigError(f"cube spec must be LATTICE:LEVEL:INDEX, got {spec!r} ({exc})") from None


def _config_from_args(args) -> harness.ExperimentConfig:
    cfg = harness.ExperimentConfig(
        level=args.level,
        m=args.m,
        weight=args.weight,
        function=args.function,
        bmo=args.bmo,
        epsilon=args.epsilon,
        series_r=args.series_r,
        perez_rho=args.ratio,
        sparse_ratio=args.sparse_ratio,
        seed=args.seed,
        rel_tol=args.tol,
        signs=args.signs,
        lattices=tuple(int(tok) for tok in args.lattices.split(",")),
        timing=args.timing,
    )
    if args.t_grid:
        try:
            lo, hi, n = args.t_grid.split(":")
            cfg.t_lo, cfg.t_hi, cfg.t_steps = float(lo), float(hi), int(n)
        except ValueError:
            raise ConfigError(f"--t-grid must be LO:HI:N, got {args.t_grid!r}") from None
    cfg.main_mode = getattr(args, "main_mode", "b")
    return cfg


def _emit_cells(g: GridFunction, fmt: str):
    if fmt == "json":
        print(json.dumps({"level": g.level, "cells": list(map(float, g.cells))}))
    else:
        print("cell,value")
        for i, v in enumerate(g.cells):
            print(f"{i},{float(v)!r}")


def _cmd_luxemburg(args) -> int:
    f = make_function(args.function, args.level, args.seed)
    A = parse_young(args.young)
    Q = _parse_cube(args.cube)
    val = luxemburg_norm(f, Q, A, ToleranceConfig(args.tol))
    if args.out == "json":
        print(json.dumps({"norm": val}))
    else:
        print(repr(val))
    return 0


def _cmd_maximal(args) -> int:
    lattices = tuple(int(tok) for tok in args.lattices.split(","))
    tol = ToleranceConfig(args.tol)
    w = make_weight(args.weight, args.level, args.seed)
    if args.kind == "hl":
        out = dyadic_maximal(w, lattices)
    elif args.kind == "orlicz":
        out = orlicz_maximal(w, parse_young(args.young), lattices, tol)
    else:
        profile = EntropyProfile(parse_young(args.young), args.k, parse_epsilon(args.epsilon))
        out = entropy_maximal(w, profile, lattices, tol)
    _emit_cells(out, args.out)
    return 0


def _cmd_rho(args) -> int:
    w = make_weight(args.weight, args.level, args.seed)
    Q = _parse_cube(args.cube)
    if args.rahm:
        val = entropy_density_maximal(w, Q)
    else:
        val = entropy_density(w, Q, args.k, ToleranceConfig(args.tol))
    if args.out == "json":
        print(json.dumps({"rho": val}))
    else:
        print(repr(val))
    return 0


def _cmd_sparse(args) -> int:
    if args.action == "build":
        f = make_function(args.function, args.level, args.seed)
        ratio = args.sparse_ratio if args.sparse_ratio is not None else 2.0
        from .sparse import build_sparse_from_function

        S = build_sparse_from_function(f, ratio)
        text = family_text(S)
        if args.family_out:
            with open(args.family_out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    # apply
    f = make_function(args.function, args.level, args.seed)
    b = make_symbol(args.bmo, args.level)
    if args.family:
        with open(args.family, "r", encoding="utf-8") as fh:
            S = parse_family_text(fh.read())
    else:
        from .sparse import build_sparse_from_function

        ratio = args.sparse_ratio if args.sparse_ratio is not None else 2.0
        S = build_sparse_from_function(f, ratio)
    out = sparse_commutator_apply(S, b, f, args.h, args.m)
    _emit_cells(out, args.out)
    return 0


def _cmd_verify(args) -> int:
    cfg = _config_from_args(args)
    ctx = harness.RunContext(cfg)
    reports = harness.RUNNERS[args.experiment](ctx)
    if args.out == "json":
        print(harness.summary_to_json(harness.summarize(reports)), end="")
    else:
        print(harness.reports_to_csv(reports), end="")
    if any(r.infinite for r in reports):
        print("FAIL: infinite ratio (rhs vanished under a positive lhs)", file=sys.stderr)
        return 1
    return 0


def _cmd_sweep(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        sweep = harness.parse_sweep_config(fh.read())
    reports, summary = harness.corpus_sweep(sweep, timing=args.timing)
    with open(args.csv, "w", encoding="utf-8") as fh:
        fh.write(harness.reports_to_csv(reports))
    with open(args.json, "w", encoding="utf-8") as fh:
        fh.write(harness.summary_to_json(summary))
    print(f"wrote {len(reports)} rows to {args.csv} and summary to {args.json}")
    return 0


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return run_selftest(verbose=True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="entropy-fs",
        description="Dyadic laboratory for entropy-bump endpoint inequalities",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("luxemburg", help="Orlicz average of a function over one cube")
    _add_common(p)
    p.add_argument("--young", default="phik:1", help="young spec: power:p|phik:k|llogl:g|loglog:g|exppow:b")
    p.add_argument("--cube", default="0:0:0", help="cube as LATTICE:LEVEL:INDEX")
    p.set_defaults(fn=_cmd_luxemburg)

    p = sub.add_parser("maximal", help="evaluate a maximal operator cell-wise")
    _add_common(p)
    p.add_argument("--kind", choices=("hl", "orlicz", "entropy"), default="hl")
    p.add_argument("--young", default="phik:1")
    p.add_argument("--k", type=int, default=1, help="entropy density index")
    p.set_defaults(fn=_cmd_maximal)

    p = sub.add_parser("rho", help="entropy density of a weight on one cube")
    _add_common(p)
    p.add_argument("--cube", default="0:0:0")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--rahm", action="store_true", help="use the localized-maximal density")
    p.set_defaults(fn=_cmd_rho)

    p = sub.add_parser("sparse", help="build or apply a sparse family")
    _add_common(p)
    p.add_argument("action", choices=("build", "apply"))
    p.add_argument("--h", type=int, default=0, help="oscillation exponent outside the average")
    p.add_argument("--family", default=None, help="family text file to apply")
    p.add_argument("--family-out", default=None, help="where to write the built family")
    p.set_defaults(fn=_cmd_sparse)

    p = sub.add_parser("verify", help="run one endpoint-inequality experiment")
    p.add_argument("experiment", choices=harness.EXPERIMENTS)
    _add_common(p)
    p.add_argument("--main-mode", choices=("a", "b"), default="b", dest="main_mode")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("sweep", help="run a corpus sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--csv", default="sweep.csv")
    p.add_argument("--json", default="sweep_summary.json")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("selftest", help="run the embedded quick checks")
    p.set_defaults(fn=_cmd_selftest)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, DomainError, ResolutionError, DegenerateWeightError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry():  # console-script entry point
    raise SystemExit(main())

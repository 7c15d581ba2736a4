"""Embedded quick checks, printed as one PASS/FAIL line each.

This is a fast subset of the full pytest suite meant for `entropy-fs
selftest`: exact grid identities, a Luxemburg oracle sample, the gauge
submultiplicativity grid, the operator reduction inequality and one
domination run.  Exit status 1 when anything fails.
"""

from __future__ import annotations

import math

import numpy as np

from .bmo import dyadic_bmo_norm, generate_symbol
from .grid import (
    DyadicCube,
    GridFunction,
    cube_average,
    constant_function,
    grid_function,
    level_set,
    weighted_measure,
)
from .maximal import dyadic_maximal, entropy_density, epsilon_series, EpsilonFunction
from .orlicz import YoungFunction, luxemburg_norm, young_eval
from .sparse import (
    SignPattern,
    build_sparse_from_function,
    pointwise_domination_check,
    sparse_commutator_apply,
)

_FAILS = 0


def _check(ok: bool, label: str, detail: str = "", verbose: bool = True):
    global _FAILS
    if not ok:
        _FAILS += 1
    if verbose:
        tag = "PASS" if ok else "FAIL"
        tail = f"  {detail}" if detail else ""
        print(f"{tag}  {label}{tail}")


def run_selftest(verbose: bool = True) -> int:
    global _FAILS
    _FAILS = 0
    J = 8
    rng = np.random.default_rng(7)

    f = grid_function(2, [1.0, 2.0, 3.0, 4.0])
    _check(cube_average(f, DyadicCube(0, 1, 1)) == 3.5, "cube average, right half of (1,2,3,4)")

    w = grid_function(2, [1.0, 0.0, 2.0, 1.0])
    e = level_set(grid_function(2, [1.0, 0.0, 1.0, 0.0]), 0.5)
    _check(weighted_measure(w, e) == 0.75, "weighted measure of a two-cell set")

    ff = GridFunction(J, rng.uniform(0.1, 5.0, 1 << J))
    for p in (1.0, 2.0, 3.0):
        lux = luxemburg_norm(ff, DyadicCube(0, 0, 0), YoungFunction.power(p))
        oracle = float(np.mean(ff.cells**p) ** (1.0 / p))
        _check(
            abs(lux - oracle) <= 1e-9 * oracle,
            f"luxemburg power:{p:g} matches the p-mean",
            f"bisect={lux:.12g} oracle={oracle:.12g}",
        )

    grid = np.geomspace(1e-3, 1e3, 40)
    ok = True
    for k in (1, 2, 3):
        A = YoungFunction.phik(k)
        for a in grid:
            vals = young_eval(A, a * grid)
            bound = 2.0**k * young_eval(A, a) * young_eval(A, grid)
            ok &= bool((vals <= bound * (1 + 1e-12)).all())
    _check(ok, "gauge submultiplicativity with constant 2^k")

    wht = GridFunction(J, np.exp(rng.standard_normal(1 << J)))
    rhos = [entropy_density(wht, DyadicCube(0, 2, 1), k) for k in (0, 1, 2, 3)]
    _check(
        all(r2 >= r1 - 1e-9 for r1, r2 in zip(rhos, rhos[1:])) and rhos[0] >= 1 - 1e-9,
        "entropy densities are >= 1 and increasing in k",
        "rhos=" + ",".join(f"{r:.6g}" for r in rhos),
    )

    spine = np.zeros(1 << J)
    spine[0] = float(1 << J)
    S = build_sparse_from_function(GridFunction(J, spine), 2.0)
    _check(S.alpha <= 2, "spine stopping family has carleson constant <= 2", f"alpha={float(S.alpha)}")

    b = generate_symbol("logdist", J)
    fr = GridFunction(J, rng.uniform(0.0, 1.0, 1 << J))
    m = 2
    t_mm = sparse_commutator_apply(S, b, fr, m, m).cells
    t_0m = sparse_commutator_apply(S, b, fr, 0, m).cells
    ok = True
    for h in range(m + 1):
        t_h = sparse_commutator_apply(S, b, fr, h, m).cells
        ok &= bool((t_h <= t_mm + t_0m + 1e-9).all())
    _check(ok, "reduction inequality T[h,m] <= T[m,m] + T[0,m]")

    rep = pointwise_domination_check(b, fr, SignPattern("alt"), 1)
    _check(not rep.infinite, "martingale commutator dominated by sparse sum", f"c={rep.c:.4g}")

    _check(
        epsilon_series(EpsilonFunction.pow(1.0), 2) == 1.0,
        "series factor for pow:1 truncated at R=2 is 1",
    )

    mf = dyadic_maximal(constant_function(J, 3.0))
    _check(float(np.max(np.abs(mf.cells - 3.0))) == 0.0, "maximal of a constant is the constant")

    _check(abs(dyadic_bmo_norm(generate_symbol("haar", J)) - 1.0) < 1e-12, "haar symbol has norm 1")

    if verbose:
        print(f"selftest: {_FAILS} failure(s)")
    return 1 if _FAILS else 0

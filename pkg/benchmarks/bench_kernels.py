#!/usr/bin/env python3
"""Benchmark the grouped Luxemburg bisection: numba kernel vs numpy fallback.

Times the all-cubes norm tables that dominate every maximal-operator
evaluation, at a realistic resolution.  Run:

    python benchmarks/bench_kernels.py [--level J] [--repeat N]
"""

import argparse
import time

import numpy as np

from entropyfs import _kernels
from entropyfs.grid import GridFunction, level_tables
from entropyfs.maximal import norm_tables
from entropyfs.orlicz import YoungFunction


def _bench(fn, repeat):
    fn()  # warm-up (includes jit compilation for the numba path)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run(level: int, repeat: int):
    rng = np.random.default_rng(0)
    cells = np.exp(rng.standard_normal(1 << level))
    young = YoungFunction.phik(2)
    per_level = level_tables(level, 0)

    def tables_with(rows_fn):
        for j in range(level + 1):
            idx, wgt = per_level[j]
            rows_fn(cells[idx], wgt, young.code, young.param, 1e-10, 200)

    print(f"level J={level} ({1 << level} cells), gauge phik:2, all lattice-0 cubes")
    t_np = _bench(lambda: tables_with(_kernels._lux_rows_numpy), repeat)
    print(f"  numpy fallback : {t_np * 1e3:9.2f} ms")
    if _kernels.HAS_NUMBA:
        t_nb = _bench(lambda: tables_with(_kernels._lux_rows_numba), repeat)
        print(f"  numba kernel   : {t_nb * 1e3:9.2f} ms   (speedup x{t_np / t_nb:.1f})")
    else:
        print("  numba kernel   : unavailable")

    w = GridFunction(level, cells)

    def full_tables():
        norm_tables(w, young, (0, 1, 2))

    t_full = _bench(full_tables, max(1, repeat // 2))
    print(f"  3-lattice norm tables via active backend ({_kernels.BACKEND}): {t_full * 1e3:9.2f} ms")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--level", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    run(args.level, args.repeat)

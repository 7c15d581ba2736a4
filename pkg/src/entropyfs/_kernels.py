"""Hot numeric kernels: grouped Luxemburg-norm bisection.

The single loop that dominates runtime is "compute the Orlicz average of w
over every dyadic interval of a level".  Two interchangeable implementations
are provided: a numba ``@njit`` fast path and a vectorised pure-numpy
fallback.  Select with the environment variable ``ENTROPYFS_BACKEND``
("numba" or "numpy"); the default is numba when importable.  Both backends
run the identical per-row bisection (bracket growth, bracket shrink, then
halving), so they agree up to the rounding of the integrand accumulation
order; results are deterministic within one backend.
"""

from __future__ import annotations

import math
import os

import numpy as np

# Young-function kind codes shared with orlicz.YoungFunction.
YOUNG_POWER = 0   # t^p
YOUNG_LOGPOW = 1  # t * log(e + t)^g
YOUNG_LOGLOG = 2  # t * log(e^e + log(e + t))^g
YOUNG_EXPPOW = 3  # exp(t^b) - 1

_E = math.e
_EE = math.exp(math.e)
_EXP_CAP = 700.0  # exp overflow guard; beyond this the value is +inf anyway

try:
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - sandbox always ships numba
    HAS_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


def _pick_backend() -> str:
    env = os.environ.get("ENTROPYFS_BACKEND", "").strip().lower()
    if env == "numpy":
        return "numpy"
    if env == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("ENTROPYFS_BACKEND=numba but numba is not importable")
        return "numba"
    return "numba" if HAS_NUMBA else "numpy"


BACKEND = _pick_backend()


def young_array(code: int, prm: float, t) -> np.ndarray:
    """Evaluate the Young function of the given kind on an array, A(0)=0 exactly."""
    t = np.asarray(t, dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore"):
        if code == YOUNG_POWER:
            out = t**prm
        elif code == YOUNG_LOGPOW:
            out = t * np.log(_E + t) ** prm
        elif code == YOUNG_LOGLOG:
            out = t * np.log(_EE + np.log(_E + t)) ** prm
        elif code == YOUNG_EXPPOW:
            x = t**prm
            out = np.where(x > _EXP_CAP, np.inf, np.expm1(np.minimum(x, _EXP_CAP)))
        else:
            raise ValueError(f"unknown young kind code {code}")
    return np.where(t > 0.0, out, 0.0)


@njit(cache=True)
def _young_scalar(code, prm, t):
    if t <= 0.0:
        return 0.0
    if code == 0:
        return t**prm
    if code == 1:
        return t * np.log(_E + t) ** prm
    if code == 2:
        return t * np.log(_EE + np.log(_E + t)) ** prm
    x = t**prm
    if x > _EXP_CAP:
        return np.inf
    return math.expm1(x)


@njit(cache=True)
def _acc_row(vals, wgt, r, lam, code, prm):
    acc = 0.0
    for c in range(vals.shape[1]):
        w = wgt[r, c]
        if w > 0.0:
            acc += w * _young_scalar(code, prm, vals[r, c] / lam)
    return acc


@njit(cache=True)
def _lux_rows_numba(vals, wgt, code, prm, rel_tol, max_iter):
    n = vals.shape[0]
    out = np.zeros(n)
    for r in range(n):
        meas = 0.0
        sup = 0.0
        for c in range(vals.shape[1]):
            w = wgt[r, c]
            if w > 0.0:
                meas += w
                if vals[r, c] > sup:
                    sup = vals[r, c]
        if sup <= 0.0 or meas <= 0.0:
            continue
        lo = sup * 1e-9
        hi = sup
        it = 0
        while _acc_row(vals, wgt, r, hi, code, prm) > meas and it < max_iter:
            lo = hi
            hi *= 2.0
            it += 1
        it = 0
        while lo > 0.0 and _acc_row(vals, wgt, r, lo, code, prm) <= meas and it < max_iter:
            hi = lo
            lo *= 0.5
            it += 1
        it = 0
        while hi - lo > rel_tol * hi and it < max_iter:
            mid = 0.5 * (lo + hi)
            if _acc_row(vals, wgt, r, mid, code, prm) <= meas:
                hi = mid
            else:
                lo = mid
            it += 1
        out[r] = hi
    return out


def _lux_rows_numpy(vals, wgt, code, prm, rel_tol, max_iter):
    n = vals.shape[0]
    out = np.zeros(n)
    meas = wgt.sum(axis=1)
    sup = np.where(wgt > 0.0, vals, 0.0).max(axis=1) if vals.size else np.zeros(n)
    live = (sup > 0.0) & (meas > 0.0)
    if not live.any():
        return out
    v = vals[live]
    g = wgt[live]
    m_ = meas[live]
    s = sup[live]

    def sat(lam):
        # constraint sum(w * A(v/lam)) <= measure, evaluated row-wise
        a = young_array(code, prm, v / lam[:, None])
        a = np.where(g > 0.0, a, 0.0)
        return (a * g).sum(axis=1) <= m_

    lo = s * 1e-9
    hi = s.copy()
    for _ in range(max_iter):
        bad = ~sat(hi)
        if not bad.any():
            break
        lo[bad] = hi[bad]
        hi[bad] *= 2.0
    for _ in range(max_iter):
        low = sat(lo) & (lo > 0.0)
        if not low.any():
            break
        hi[low] = lo[low]
        lo[low] *= 0.5
    for _ in range(max_iter):
        act = (hi - lo) > rel_tol * hi
        if not act.any():
            break
        mid = 0.5 * (lo + hi)
        ok = sat(mid)
        hi[act & ok] = mid[act & ok]
        lo[act & ~ok] = mid[act & ~ok]
    out[live] = hi
    return out


def luxemburg_rows(vals, wgt, code, prm, rel_tol=1e-10, max_iter=200):
    """Luxemburg norms of the rows of ``vals`` w.r.t. the row weights ``wgt``.

    ``vals`` must be non-negative; ``wgt`` entries are cell-overlap weights
    (0 marks padding).  Row norm = inf{lam : sum(wgt*A(vals/lam)) <= sum(wgt)};
    identically-zero rows return 0.
    """
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    wgt = np.ascontiguousarray(wgt, dtype=np.float64)
    if vals.ndim == 1:
        vals = vals[None, :]
        wgt = wgt[None, :]
    if BACKEND == "numba":
        return _lux_rows_numba(vals, wgt, int(code), float(prm), float(rel_tol), int(max_iter))
    return _lux_rows_numpy(vals, wgt, int(code), float(prm), float(rel_tol), int(max_iter))

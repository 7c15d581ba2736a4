"""Young functions and Orlicz (Luxemburg) averages over dyadic intervals.

The Luxemburg average of f over an interval Q w.r.t. a convex gauge A is

    ||f||_{A,Q} = inf{ lam > 0 : (1/|Q|) int_Q A(|f|/lam) <= 1 },

computed by monotone bisection on lam.  Five gauge kinds are supported
(CLI syntax in parentheses):

    power:p    A(t) = t^p,  p >= 1         (p = 1 realises the plain mean)
    phik:k     A(t) = t log^k(e+t),  integer k >= 0
    llogl:g    A(t) = t log^g(e+t),  real g > 0
    loglog:g   A(t) = t log^g(e^e + log(e+t)),  g > 0
    exppow:b   A(t) = exp(t^b) - 1,  b > 0

Logarithms are natural throughout; the base-2 log appears only in the
entropy factor of the maximal operators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, DegenerateWeightError, DomainError, NumericError
from .grid import DyadicCube, GridFunction, cube_average, cube_row

_E = math.e


@dataclass(frozen=True)
class ToleranceConfig:
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not self.rel_tol > 0.0:
            raise ValueError("rel_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class YoungFunction:
    kind: str
    param: float

    _KINDS = ("power", "phik", "llogl", "loglog", "exppow")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown young kind {self.kind!r}")
        p = self.param
        if self.kind == "power" and not p >= 1.0:
            raise ValueError("power exponent must be >= 1")
        if self.kind == "phik" and (p != int(p) or p < 0):
            raise ValueError("phik exponent must be a non-negative integer")
        if self.kind in ("llogl", "loglog", "exppow") and not p > 0.0:
            raise ValueError(f"{self.kind} parameter must be > 0")

    @property
    def code(self) -> int:
        return {
            "power": _kernels.YOUNG_POWER,
            "phik": _kernels.YOUNG_LOGPOW,
            "llogl": _kernels.YOUNG_LOGPOW,
            "loglog": _kernels.YOUNG_LOGLOG,
            "exppow": _kernels.YOUNG_EXPPOW,
        }[self.kind]

    @property
    def is_identity(self) -> bool:
        """True when A(t) = t, so the Luxemburg average is the plain mean."""
        return (self.kind == "power" and self.param == 1.0) or (
            self.kind == "phik" and self.param == 0
        )

    def key(self) -> tuple:
        return (self.code, float(self.param))

    @staticmethod
    def power(p: float) -> "YoungFunction":
        return YoungFunction("power", float(p))

    @staticmethod
    def phik(k: int) -> "YoungFunction":
        return YoungFunction("phik", float(k))

    @staticmethod
    def llogl(g: float) -> "YoungFunction":
        return YoungFunction("llogl", float(g))

    @staticmethod
    def loglog(g: float) -> "YoungFunction":
        return YoungFunction("loglog", float(g))

    @staticmethod
    def exppow(b: float) -> "YoungFunction":
        return YoungFunction("exppow", float(b))


def parse_young(spec: str) -> YoungFunction:
    """Parse CLI syntax ``power:p | phik:k | llogl:g | loglog:g | exppow:b``."""
    parts = spec.strip().split(":")
    if len(parts) != 2:
        raise ConfigError(f"young spec must be kind:param, got {spec!r}")
    kind, raw = parts[0].strip().lower(), parts[1]
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"bad young parameter {raw!r}") from None
    try:
        return YoungFunction(kind, value)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def young_eval(A: YoungFunction, t) -> float | np.ndarray:
    """A(t) for scalar or array t >= 0."""
    arr = np.asarray(t, dtype=np.float64)
    if (arr < 0.0).any():
        raise DomainError("young functions are defined for t >= 0")
    out = _kernels.young_array(A.code, A.param, arr)
    return float(out) if np.isscalar(t) or arr.ndim == 0 else out


def young_inverse(A: YoungFunction, s: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """Solve A(t) = s by bisection on a geometrically grown bracket."""
    if s < 0.0:
        raise DomainError("young inverse is defined for s >= 0")
    if s == 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    grow = 0
    while young_eval(A, hi) < s:
        lo = hi
        hi *= 2.0
        grow += 1
        if grow > 1100:  # 2^1100 is past float range; A unbounded, unreachable
            raise NumericError(f"no bracket for inverse at s={s}")
    tol = cfg.rel_tol * max(s, 1.0)
    for _ in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        val = young_eval(A, mid)
        if abs(val - s) <= tol:
            return mid
        if val < s:
            lo = mid
        else:
            hi = mid
    raise NumericError(f"young inverse did not converge: bracket [{lo}, {hi}] at s={s}")


def luxemburg_norm(
    f: GridFunction, Q: DyadicCube, A: YoungFunction, cfg: ToleranceConfig = DEFAULT_TOL
) -> float:
    """Luxemburg average of |f| over Q; 0 when f vanishes on Q."""
    idx, wgt = cube_row(Q, f.level)
    vals = np.abs(f.cells[idx])
    out = _kernels.luxemburg_rows(vals, wgt, A.code, A.param, cfg.rel_tol, cfg.max_iter)
    return float(out[0])


def indicator_norm(A: YoungFunction, ratio: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """Closed form ||chi_E||_{A,Q} = 1 / A^{-1}(|Q|/|E|) for ratio = |Q|/|E| >= 1."""
    if ratio < 1.0:
        raise DomainError(f"|Q|/|E| must be >= 1, got {ratio}")
    return 1.0 / young_inverse(A, ratio, cfg)


def entropy_integral(w: GridFunction, Q: DyadicCube, k: int) -> float:
    """(1/|Q|) int_Q w log^k(e + w/<w>_Q), an exact finite sum."""
    if k < 0:
        raise DomainError("k must be >= 0")
    avg = cube_average(w, Q)
    if avg <= 0.0:
        raise DegenerateWeightError("weight vanishes on the cube")
    if k == 0:
        return avg
    idx, wgt = cube_row(Q, w.level)
    vals = w.cells[idx]
    g = vals * np.log(_E + vals / avg) ** k
    return float((g * wgt).sum() / wgt.sum())

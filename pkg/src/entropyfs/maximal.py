"""Hardy-Littlewood, Orlicz and entropy-bump maximal operators on the grid,
plus the local entropy densities that grade a weight's A_infinity behaviour.

Two densities are computed for a weight w and interval Q:

  * entropy_density(w, Q, k)        = ||w||_{phik:k,Q} / <w>_Q
  * entropy_density_maximal(w, Q)   = (1/w(Q)) int_Q M(chi_Q w), the localized
    maximal average, taken over lattice-0 sub-intervals of Q only.

The entropy-bump maximal operator at a cell is the sup over containing cubes
of  <w>_{A,Q} * log2(2 + rho_k(Q)) * eps(rho_k(Q)),  with eps an increasing
gauge on [1, oo).  Suprema range over the enumerated cubes of levels 0..J:
at piecewise-constant resolution finer cubes repeat cell values and cannot
increase any average.  All operations are pure; per-cell suprema are
independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, DomainError, ResolutionError
from .grid import (
    DyadicCube,
    GridFunction,
    cube_average,
    cube_span,
    level_tables,
    member_tables,
)
from .orlicz import DEFAULT_TOL, ToleranceConfig, YoungFunction

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class EpsilonFunction:
    """Increasing gauge on [1, oo) with eps(t) >= 1.

    Kinds (CLI syntax): const:c (c >= 1), logpow:d (eps(t) = log2(2+t)^(1+d),
    d >= 0), pow:d (eps(t) = t^d, d > 0).
    """

    kind: str
    param: float

    def __post_init__(self):
        if self.kind not in ("const", "logpow", "pow"):
            raise ValueError(f"unknown epsilon kind {self.kind!r}")
        if self.kind == "const" and not self.param >= 1.0:
            raise ValueError("const epsilon must be >= 1")
        if self.kind == "logpow" and not self.param >= 0.0:
            raise ValueError("logpow exponent must be >= 0")
        if self.kind == "pow" and not self.param > 0.0:
            raise ValueError("pow exponent must be > 0")

    def eval(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "const":
            out = np.full_like(t, self.param)
        elif self.kind == "logpow":
            out = np.log2(2.0 + t) ** (1.0 + self.param)
        else:
            out = t**self.param
        return out if out.ndim else float(out)

    def recip_at_tower(self, r: int) -> float:
        """1 / eps(2^(2^r)) without forming the tower value."""
        if self.kind == "const":
            return 1.0 / self.param
        if self.kind == "pow":
            return 2.0 ** (-self.param * 2.0**r)
        # log2(2 + 2^(2^r)) = 2^r + log1p(2^(1 - 2^r)) / ln 2
        ell = 2.0**r + math.log1p(2.0 ** (1.0 - 2.0**r)) / _LN2
        return ell ** -(1.0 + self.param)

    def key(self) -> tuple:
        return (self.kind, float(self.param))

    @staticmethod
    def const(c: float) -> "EpsilonFunction":
        return EpsilonFunction("const", float(c))

    @staticmethod
    def logpow(d: float) -> "EpsilonFunction":
        return EpsilonFunction("logpow", float(d))

    @staticmethod
    def pow(d: float) -> "EpsilonFunction":
        return EpsilonFunction("pow", float(d))


def parse_epsilon(spec: str) -> EpsilonFunction:
    parts = spec.strip().split(":")
    if len(parts) != 2:
        raise ConfigError(f"epsilon spec must be kind:param, got {spec!r}")
    try:
        value = float(parts[1])
    except ValueError:
        raise ConfigError(f"bad epsilon parameter {parts[1]!r}") from None
    try:
        return EpsilonFunction(parts[0].strip().lower(), value)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class EntropyProfile:
    young: YoungFunction
    k: int
    eps: EpsilonFunction

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("entropy index k must be >= 0")


# ---------------------------------------------------------------------------
# Per-level cube tables


def average_tables(cells: np.ndarray, level: int, lattices) -> dict:
    """{lattice: [per-level arrays of cube means of ``cells``]}."""
    out = {}
    for lat in sorted(set(lattices)):
        per = []
        for j in range(level + 1):
            idx, wgt = level_tables(level, lat)[j]
            if lat == 0:
                per.append(cells.reshape(1 << j, -1).mean(axis=1))
            else:
                per.append((cells[idx] * wgt).sum(axis=1) / wgt.sum(axis=1))
        out[lat] = per
    return out


def norm_tables(
    w: GridFunction, A: YoungFunction, lattices, cfg: ToleranceConfig = DEFAULT_TOL
) -> dict:
    """{lattice: [per-level arrays of Luxemburg norms of w over each cube]}.

    For the identity gauge the norm equals the mean, returned exactly without
    bisection.
    """
    cells = np.abs(w.cells)
    if A.is_identity:
        return average_tables(cells, w.level, lattices)
    out = {}
    for lat in sorted(set(lattices)):
        per = []
        for j in range(w.level + 1):
            idx, wgt = level_tables(w.level, lat)[j]
            per.append(
                _kernels.luxemburg_rows(cells[idx], wgt, A.code, A.param, cfg.rel_tol, cfg.max_iter)
            )
        out[lat] = per
    return out


def scatter_max(tables: dict, level: int) -> np.ndarray:
    """Per-cell sup of per-cube values over all containing cubes (midpoint rule)."""
    out = np.full(1 << level, -np.inf)
    for lat, per in tables.items():
        members = member_tables(level, lat)
        for j, vals in enumerate(per):
            m = members[j]
            cand = np.where(m >= 0, vals[np.maximum(m, 0)], -np.inf)
            np.maximum(out, cand, out=out)
    return out


# ---------------------------------------------------------------------------
# Maximal operators


def dyadic_maximal(f: GridFunction, lattices=(0, 1, 2)) -> GridFunction:
    """Cell-wise sup of |f|-averages over containing cubes of the given lattices."""
    tables = average_tables(np.abs(f.cells), f.level, lattices)
    return GridFunction(f.level, scatter_max(tables, f.level))


def orlicz_maximal(
    w: GridFunction, A: YoungFunction, lattices=(0, 1, 2), cfg: ToleranceConfig = DEFAULT_TOL
) -> GridFunction:
    """Cell-wise sup of Luxemburg averages ||w||_{A,Q} over containing cubes."""
    tables = norm_tables(w, A, lattices, cfg)
    return GridFunction(w.level, scatter_max(tables, w.level))


def entropy_factor_tables(
    w: GridFunction, profile: EntropyProfile, lattices, cfg: ToleranceConfig = DEFAULT_TOL
) -> dict:
    """Per-cube values <w>_{A,Q} * log2(2+rho_k(Q)) * eps(rho_k(Q))."""
    norm_a = norm_tables(w, profile.young, lattices, cfg)
    norm_k = norm_tables(w, YoungFunction.phik(profile.k), lattices, cfg)
    avg = average_tables(np.abs(w.cells), w.level, lattices)
    out = {}
    for lat in norm_a:
        per = []
        for j in range(w.level + 1):
            a = avg[lat][j]
            rho = np.where(a > 0.0, norm_k[lat][j] / np.where(a > 0.0, a, 1.0), 1.0)
            rho = np.maximum(rho, 1.0)
            per.append(norm_a[lat][j] * np.log2(2.0 + rho) * profile.eps.eval(rho))
        out[lat] = per
    return out


def entropy_maximal(
    w: GridFunction,
    profile: EntropyProfile,
    lattices=(0, 1, 2),
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> GridFunction:
    """Entropy-bump maximal operator for the given (young, k, eps) profile."""
    tables = entropy_factor_tables(w, profile, lattices, cfg)
    return GridFunction(w.level, scatter_max(tables, w.level))


# ---------------------------------------------------------------------------
# Entropy densities


def entropy_density(
    w: GridFunction, Q: DyadicCube, k: int, cfg: ToleranceConfig = DEFAULT_TOL
) -> float:
    """rho_k = ||w||_{phik:k,Q} / <w>_Q; equals 1 for k = 0 and on null cubes."""
    if k < 0:
        raise DomainError("k must be >= 0")
    if k == 0:
        return 1.0
    avg = cube_average(w, Q)
    if avg <= 0.0:
        return 1.0
    from .orlicz import luxemburg_norm  # local import to keep module load acyclic

    return luxemburg_norm(w, Q, YoungFunction.phik(k), cfg) / avg


def entropy_density_maximal(w: GridFunction, Q: DyadicCube) -> float:
    """(1/w(Q)) int_Q M(chi_Q w) with the maximal over lattice-0 sub-intervals.

    Returns 1 on cubes of zero mass (the minimum possible value).
    """
    if Q.lattice != 0:
        raise DomainError("localized maximal density is defined on lattice-0 cubes")
    span = cube_span(Q, w.level)
    wc = w.cells[span]
    mass = wc.sum()
    if mass <= 0.0:
        return 1.0
    best = np.full(wc.shape, -np.inf)
    for j in range(Q.level, w.level + 1):
        width = 1 << (w.level - j)
        avg = wc.reshape(-1, width).mean(axis=1)
        np.maximum(best, np.repeat(avg, width), out=best)
    return float(best.sum() / mass)


def entropy_density_maximal_all(w: GridFunction) -> list[np.ndarray]:
    """entropy_density_maximal for every lattice-0 cube, one array per level.

    Uses the suffix-max over per-cell level averages: for x in Q the localized
    maximal of chi_Q w at x is max over levels j' >= level(Q) of the level-j'
    average at x.
    """
    n = 1 << w.level
    table = np.empty((w.level + 1, n))
    for j in range(w.level + 1):
        width = 1 << (w.level - j)
        table[j] = np.repeat(w.cells.reshape(-1, width).mean(axis=1), width)
    for j in range(w.level - 1, -1, -1):
        np.maximum(table[j], table[j + 1], out=table[j])
    out = []
    for j in range(w.level + 1):
        width = 1 << (w.level - j)
        num = table[j].reshape(-1, width).sum(axis=1)
        mass = w.cells.reshape(-1, width).sum(axis=1)
        out.append(np.where(mass > 0.0, num / np.where(mass > 0.0, mass, 1.0), 1.0))
    return out


def epsilon_series(eps: EpsilonFunction, R: int) -> float:
    """max(sum_{r=0..R} 1/eps(2^(2^r)), 1), the truncated series factor."""
    if R < 0:
        raise DomainError("series truncation must be >= 0")
    return max(sum(eps.recip_at_tower(r) for r in range(R + 1)), 1.0)

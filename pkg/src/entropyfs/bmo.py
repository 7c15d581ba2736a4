"""Dyadic BMO symbols: norms, generators, oscillation level sets and
exponential-oscillation norms.

The dyadic BMO norm is the max over all lattice-0 cubes of the mean
oscillation <|b - b_Q|>_Q.  The generators cover the standard exemplars:
the top-level Haar step, the discretised log(1/x), and random +-1 dyadic
martingales.  Martingale signs come from a fixed splitmix64 hash of
(seed, level, index), so corpora are reproducible bit-for-bit regardless of
evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .grid import DyadicCube, GridFunction, cube_average, cube_row
from .orlicz import DEFAULT_TOL, ToleranceConfig, YoungFunction, luxemburg_norm

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def interval_sign(seed: int, level: int, index: int) -> float:
    """Deterministic +-1 sign for a dyadic interval, hash of (seed, level, index)."""
    h = _splitmix64(_splitmix64(_splitmix64(seed & _MASK64) ^ level) ^ index)
    return 1.0 if h & 1 == 0 else -1.0


def dyadic_bmo_norm(b: GridFunction) -> float:
    """Max over lattice-0 cubes of levels 0..J of the mean oscillation."""
    best = 0.0
    for j in range(b.level + 1):
        block = b.cells.reshape(1 << j, -1)
        m = block.mean(axis=1, keepdims=True)
        osc = np.abs(block - m).mean(axis=1)
        best = max(best, float(osc.max()))
    return best


@dataclass(frozen=True)
class BmoSymbol:
    """A symbol together with its cached dyadic BMO norm."""

    values: GridFunction
    norm: float

    @staticmethod
    def from_grid(b: GridFunction) -> "BmoSymbol":
        return BmoSymbol(b, dyadic_bmo_norm(b))


def oscillation_level_measure(b: GridFunction, Q: DyadicCube, lam: float) -> float:
    """Lebesgue measure of {x in Q : |b(x) - b_Q| > lam}."""
    if lam < 0.0:
        raise DomainError("level threshold must be >= 0")
    bq = cube_average(b, Q)
    idx, wgt = cube_row(Q, b.level)
    hit = np.abs(b.cells[idx] - bq) > lam
    return float((wgt * hit).sum()) * b.cell_width


def generate_symbol(kind: str, level: int, *, seed: int = 0, depth: int = 0) -> GridFunction:
    """Build a corpus symbol.

    kind = "haar": +1 on [0,1/2), -1 on [1/2,1).
    kind = "logdist": log(1/x) at cell midpoints.
    kind = "martingale": sum over levels j < depth of signed +-1 Haar steps,
    one deterministic sign per dyadic interval.
    """
    n = 1 << level
    if kind == "haar":
        cells = np.ones(n)
        cells[n // 2 :] = -1.0
        return GridFunction(level, cells)
    if kind == "logdist":
        mid = (np.arange(n) + 0.5) / n
        return GridFunction(level, -np.log(mid))
    if kind == "martingale":
        if depth < 0 or depth > level:
            raise DomainError(f"martingale depth must satisfy 0 <= depth <= level, got {depth}")
        cells = np.zeros(n)
        for j in range(depth):
            width = 1 << (level - j)
            half = width >> 1
            for i in range(1 << j):
                s = interval_sign(seed, j, i)
                cells[i * width : i * width + half] += s
                cells[i * width + half : (i + 1) * width] -= s
        return GridFunction(level, cells)
    raise ConfigError(f"unknown symbol kind {kind!r}")


def parse_symbol(spec: str, level: int) -> GridFunction:
    """Parse CLI syntax ``haar | logdist | martingale:SEED:DEPTH``."""
    parts = spec.strip().split(":")
    kind = parts[0].strip().lower()
    if kind in ("haar", "logdist"):
        if len(parts) != 1:
            raise ConfigError(f"{kind} takes no parameters")
        return generate_symbol(kind, level)
    if kind == "martingale":
        if len(parts) != 3:
            raise ConfigError("martingale spec must be martingale:SEED:DEPTH")
        try:
            seed, depth = int(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"bad martingale parameters in {spec!r}") from None
        return generate_symbol(kind, level, seed=seed, depth=depth)
    raise ConfigError(f"unknown symbol kind {kind!r}")


def oscillation_exp_norm(
    b: GridFunction, Q: DyadicCube, m: int, cfg: ToleranceConfig = DEFAULT_TOL
) -> float:
    """Luxemburg norm || |b - b_Q|^m ||_{exppow:1/m, Q}."""
    if m < 1:
        raise DomainError("m must be >= 1")
    bq = cube_average(b, Q)
    osc = GridFunction(b.level, np.abs(b.cells - bq) ** m)
    return luxemburg_norm(osc, Q, YoungFunction.exppow(1.0 / m), cfg)

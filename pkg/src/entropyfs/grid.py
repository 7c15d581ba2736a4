"""Dyadic discretisation of [0,1): grid functions, shifted dyadic intervals,
cell sets, and exact averages/measures.

Functions are piecewise constant at resolution 2**-J, so every integral is a
finite sum and lattice-0 measures are exact binary fractions.  Three interval
lattices are available: lattice 0 is the plain dyadic tree; lattices 1 and 2
are shifted by 1/3 and 2/3, positions taken modulo 1 and clipped at 1 rather
than wrapped.  A cell belongs to a shifted interval when its midpoint does.
All objects are immutable after construction and every operation is pure, so
concurrent evaluation is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DegenerateWeightError, ResolutionError


@dataclass(frozen=True)
class GridFunction:
    """Piecewise-constant real function on [0,1) with 2**level cells."""

    level: int
    cells: np.ndarray

    def __post_init__(self):
        if self.level < 1:
            raise ValueError(f"grid level must be >= 1, got {self.level}")
        cells = np.ascontiguousarray(self.cells, dtype=np.float64)
        if cells.shape != (1 << self.level,):
            raise ValueError(f"expected {1 << self.level} cells, got shape {cells.shape}")
        if not np.isfinite(cells).all():
            raise ValueError("cell values must be finite")
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)

    @property
    def n_cells(self) -> int:
        return 1 << self.level

    @property
    def cell_width(self) -> float:
        return 2.0**-self.level


def grid_function(level: int, values) -> GridFunction:
    return GridFunction(level, np.asarray(values, dtype=np.float64))


def constant_function(level: int, value: float) -> GridFunction:
    return GridFunction(level, np.full(1 << level, float(value)))


def indicator_function(level: int, lo: float, hi: float) -> GridFunction:
    """Indicator of [lo, hi) sampled at cell midpoints."""
    mid = (np.arange(1 << level) + 0.5) * 2.0**-level
    return GridFunction(level, ((mid >= lo) & (mid < hi)).astype(np.float64))


def require_weight(w: GridFunction) -> GridFunction:
    if (w.cells < 0.0).any():
        raise DegenerateWeightError("weight has negative cells")
    if not (w.cells > 0.0).any():
        raise DegenerateWeightError("weight is identically zero")
    return w


# Text format: first line "level=J", second line 2**J whitespace-separated values.

def format_grid_text(f: GridFunction) -> str:
    return f"level={f.level}\n" + " ".join(repr(float(v)) for v in f.cells) + "\n"


def parse_grid_text(text: str) -> GridFunction:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2 or not lines[0].strip().startswith("level="):
        raise ConfigError("grid text must be 'level=J' followed by one line of values")
    try:
        level = int(lines[0].strip()[len("level="):])
        values = [float(tok) for tok in lines[1].split()]
    except ValueError as exc:
        raise ConfigError(f"malformed grid text: {exc}") from None
    if len(values) != 1 << level:
        raise ConfigError(f"expected {1 << level} values for level={level}, got {len(values)}")
    return GridFunction(level, np.array(values))


@dataclass(frozen=True, order=True)
class DyadicCube:
    """Interval [i*2^-j, (i+1)*2^-j) shifted by lattice/3 modulo 1, clipped to [0,1)."""

    lattice: int
    level: int
    index: int

    def __post_init__(self):
        if self.lattice not in (0, 1, 2):
            raise ValueError(f"lattice must be 0, 1 or 2, got {self.lattice}")
        if self.level < 0:
            raise ValueError(f"cube level must be >= 0, got {self.level}")
        if not 0 <= self.index < (1 << self.level):
            raise ValueError(f"cube index {self.index} out of range at level {self.level}")

    @property
    def measure(self) -> float:
        """Unclipped measure 2^-level (exact binary fraction)."""
        return 2.0**-self.level

    def interval(self) -> tuple[float, float]:
        """Clipped interval [a, b) inside [0,1)."""
        width = 2.0**-self.level
        if self.lattice == 0:
            a = self.index * width
            return a, a + width
        a = (self.lattice / 3.0 + self.index * width) % 1.0
        return a, min(a + width, 1.0)

    def children(self) -> tuple["DyadicCube", "DyadicCube"]:
        return (
            DyadicCube(self.lattice, self.level + 1, 2 * self.index),
            DyadicCube(self.lattice, self.level + 1, 2 * self.index + 1),
        )

    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise ValueError("top cube has no parent")
        return DyadicCube(self.lattice, self.level - 1, self.index // 2)

    def contains(self, other: "DyadicCube") -> bool:
        """Tree containment within one lattice."""
        if self.lattice != other.lattice or other.level < self.level:
            return False
        return (other.index >> (other.level - self.level)) == self.index


TOP = DyadicCube(0, 0, 0)


@dataclass(frozen=True)
class CellSet:
    """Subset of the 2**level cells, stored as a boolean mask."""

    level: int
    members: np.ndarray

    def __post_init__(self):
        members = np.ascontiguousarray(self.members, dtype=bool)
        if members.shape != (1 << self.level,):
            raise ValueError(f"expected {1 << self.level} member flags")
        members.flags.writeable = False
        object.__setattr__(self, "members", members)

    @property
    def count(self) -> int:
        return int(self.members.sum())

    @property
    def measure(self) -> float:
        return self.count * 2.0**-self.level

    def union(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.level, self.members | other.members)

    def difference(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.level, self.members & ~other.members)

    def issubset(self, other: "CellSet") -> bool:
        self._check(other)
        return bool((~self.members | other.members).all())

    def _check(self, other: "CellSet"):
        if self.level != other.level:
            raise ResolutionError("cell sets live at different levels")


def cellset_from_indices(level: int, indices) -> CellSet:
    mask = np.zeros(1 << level, dtype=bool)
    mask[np.asarray(indices, dtype=np.int64)] = True
    return CellSet(level, mask)


def cube_cellset(Q: DyadicCube, level: int) -> CellSet:
    """Cells of a lattice-0 cube as a CellSet."""
    if Q.lattice != 0:
        raise ResolutionError("cell sets of shifted cubes are not cell-aligned")
    s = cube_span(Q, level)
    mask = np.zeros(1 << level, dtype=bool)
    mask[s] = True
    return CellSet(level, mask)


def cube_span(Q: DyadicCube, level: int) -> slice:
    """Cell slice covered by a lattice-0 cube at grid resolution ``level``."""
    if Q.lattice != 0:
        raise ResolutionError("shifted cubes are not cell-aligned")
    if Q.level > level:
        raise ResolutionError(f"cube level {Q.level} finer than grid level {level}")
    shiftbits = level - Q.level
    return slice(Q.index << shiftbits, (Q.index + 1) << shiftbits)


# ---------------------------------------------------------------------------
# Cached per-(level, lattice) cell tables.
#
# For each interval of a level we store the indices of the cells it touches
# and their overlap weights in cell-width units (1 for interior cells,
# fractional at clipped/shifted boundaries, 0 for padding).  Averages and
# Orlicz norms all consume these tables.


@lru_cache(maxsize=None)
def level_tables(level: int, lattice: int) -> tuple:
    """Per sub-level j: (idx, wgt) matrices of shape (2^j, cells-per-cube[+1])."""
    n = 1 << level
    out = []
    for j in range(level + 1):
        ncubes = 1 << j
        width = 1 << (level - j)
        if lattice == 0:
            idx = np.arange(n, dtype=np.int64).reshape(ncubes, width)
            wgt = np.ones((ncubes, width))
        else:
            shift = lattice / 3.0
            a = (shift + np.arange(ncubes) * 2.0**-j) % 1.0
            b = np.minimum(a + 2.0**-j, 1.0)
            c0 = np.floor(a * n).astype(np.int64)
            cols = width + 1
            idx = np.zeros((ncubes, cols), dtype=np.int64)
            wgt = np.zeros((ncubes, cols))
            for t in range(cols):
                c = c0 + t
                lo = np.maximum(a, c / n)
                hi = np.minimum(b, (c + 1) / n)
                w = np.clip(hi - lo, 0.0, None) * n
                valid = (c < n) & (w > 0.0)
                idx[:, t] = np.where(valid, np.minimum(c, n - 1), 0)
                wgt[:, t] = np.where(valid, w, 0.0)
        idx.flags.writeable = False
        wgt.flags.writeable = False
        out.append((idx, wgt))
    return tuple(out)


@lru_cache(maxsize=None)
def member_tables(level: int, lattice: int) -> tuple:
    """Per sub-level j: cell -> index of the containing cube (by midpoint), or -1."""
    n = 1 << level
    out = []
    if lattice == 0:
        base = np.arange(n, dtype=np.int64)
        for j in range(level + 1):
            m = base >> (level - j)
            m.flags.writeable = False
            out.append(m)
        return tuple(out)
    shift = lattice / 3.0
    mid = (np.arange(n) + 0.5) / n
    pos = (mid - shift) % 1.0
    for j in range(level + 1):
        i = np.floor(pos * (1 << j)).astype(np.int64)
        i = np.minimum(i, (1 << j) - 1)
        a = (shift + i * 2.0**-j) % 1.0
        m = np.where(mid >= a, i, -1)
        m.flags.writeable = False
        out.append(m)
    return tuple(out)


def cube_row(Q: DyadicCube, level: int) -> tuple[np.ndarray, np.ndarray]:
    """(cell indices, overlap weights) for one cube at grid resolution ``level``."""
    if Q.level > level:
        raise ResolutionError(f"cube level {Q.level} finer than grid level {level}")
    idx, wgt = level_tables(level, Q.lattice)[Q.level]
    return idx[Q.index], wgt[Q.index]


# ---------------------------------------------------------------------------
# Operations


def cube_average(f: GridFunction, Q: DyadicCube) -> float:
    """Mean of f over Q (clipped to [0,1)), an exact finite sum of cells."""
    if Q.lattice == 0:
        return float(f.cells[cube_span(Q, f.level)].mean())
    idx, wgt = cube_row(Q, f.level)
    return float((f.cells[idx] * wgt).sum() / wgt.sum())


def cube_integral(f: GridFunction, Q: DyadicCube) -> float:
    """Integral of f over Q (clipped)."""
    idx, wgt = cube_row(Q, f.level)
    return float((f.cells[idx] * wgt).sum()) * f.cell_width


def total_integral(f: GridFunction) -> float:
    return float(f.cells.sum()) * f.cell_width


def weighted_measure(w: GridFunction, E: CellSet) -> float:
    """w(E) = integral of w over the cell set E."""
    if w.level != E.level:
        raise ResolutionError(f"weight level {w.level} != cell-set level {E.level}")
    return float(w.cells[E.members].sum()) * w.cell_width


def level_set(f: GridFunction, t: float) -> CellSet:
    """Strict super-level set {f > t}."""
    return CellSet(f.level, f.cells > t)


def enumerate_cubes(level: int, lattices=(0,)) -> list[DyadicCube]:
    """All cubes of levels 0..level in the given lattices, (lattice, level, index) order."""
    if level < 1:
        raise ValueError("level must be >= 1")
    out = []
    for lat in sorted(set(lattices)):
        for j in range(level + 1):
            out.extend(DyadicCube(lat, j, i) for i in range(1 << j))
    return out

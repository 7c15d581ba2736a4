"""Carleson (sparse) interval families and the operators built on them.

Contents: exact Carleson-constant verification in rational arithmetic, the
stopping-time construction of sparse families from a function, the two-index
stratification of a family by entropy density and by function average, the
generation/stopping decomposition with its exact packing bounds, sparse
commutator operators

    T[h,m](f)(x) = sum_{Q in S} |b(x) - b_Q|^h <|b - b_Q|^{m-h} f>_Q chi_Q(x),

and the dyadic martingale transform with its iterated commutators as the
model singular operator.  Family construction is sequential down the tree;
everything evaluated on a built family is pure and parallelisable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigError, DegenerateWeightError, DomainError
from .grid import (
    CellSet,
    DyadicCube,
    GridFunction,
    cube_average,
    cube_span,
    level_set,
)
from .maximal import entropy_density
from .orlicz import DEFAULT_TOL, ToleranceConfig


# ---------------------------------------------------------------------------
# Carleson families


def carleson_constant_argmax(cubes) -> tuple[Fraction, DyadicCube]:
    """Exact max over Q of sum_{Q' in family, Q' subset Q} |Q'| / |Q|."""
    cubes = list(cubes)
    if not cubes:
        raise DomainError("empty cube family")
    lats = {Q.lattice for Q in cubes}
    if len(lats) > 1:
        raise DomainError("family must live in a single lattice")
    deepest = max(Q.level for Q in cubes)
    # subtree mass in units of 2^-deepest, aggregated bottom-up
    mass = [np.zeros(1 << j, dtype=np.int64) for j in range(deepest + 1)]
    for Q in cubes:
        mass[Q.level][Q.index] += 1 << (deepest - Q.level)
    for j in range(deepest, 0, -1):
        mass[j - 1] += mass[j].reshape(-1, 2).sum(axis=1)
    best = None
    best_cube = None
    for Q in cubes:
        ratio = Fraction(int(mass[Q.level][Q.index]), 1 << (deepest - Q.level))
        if best is None or ratio > best:
            best = ratio
            best_cube = Q
    return best, best_cube


def carleson_constant(cubes) -> Fraction:
    return carleson_constant_argmax(cubes)[0]


@dataclass(frozen=True)
class CarlesonFamily:
    """Sorted single-lattice cube family with its exact verified constant."""

    cubes: tuple[DyadicCube, ...]
    alpha: Fraction
    alpha_cube: DyadicCube

    def __len__(self) -> int:
        return len(self.cubes)

    def __iter__(self):
        return iter(self.cubes)


def carleson_family(cubes) -> CarlesonFamily:
    ordered = tuple(sorted(set(cubes)))
    alpha, alpha_cube = carleson_constant_argmax(ordered)
    return CarlesonFamily(ordered, alpha, alpha_cube)


def build_sparse_from_function(f: GridFunction, ratio: float) -> CarlesonFamily:
    """Stopping-time family: starting from [0,1), select maximal descendants
    whose f-average reaches ratio times the last stopping average.

    The resulting family satisfies alpha <= ratio/(ratio-1) exactly.
    """
    if ratio <= 1.0:
        raise DomainError(f"stopping ratio must be > 1, got {ratio}")
    if (f.cells < 0.0).any():
        raise DomainError("stopping-time construction needs f >= 0")
    if not (f.cells > 0.0).any():
        raise DegenerateWeightError("f is identically zero")
    J = f.level
    avg = [f.cells.reshape(1 << j, -1).mean(axis=1) for j in range(J + 1)]
    selected = [DyadicCube(0, 0, 0)]
    stack = [(0, 0, float(avg[0][0]))]
    while stack:
        j, i, stop_avg = stack.pop()
        if j == J:
            continue
        for ci in (2 * i, 2 * i + 1):
            a = float(avg[j + 1][ci])
            if a >= ratio * stop_avg:
                selected.append(DyadicCube(0, j + 1, ci))
                stack.append((j + 1, ci, a))
            else:
                stack.append((j + 1, ci, stop_avg))
    return carleson_family(selected)


def family_text(S: CarlesonFamily) -> str:
    """Text format: header ``alpha=<value>`` then ``lattice level index`` lines."""
    lines = [f"alpha={float(S.alpha)!r}"]
    lines += [f"{Q.lattice} {Q.level} {Q.index}" for Q in S.cubes]
    return "\n".join(lines) + "\n"


def parse_family_text(text: str) -> CarlesonFamily:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("alpha="):
        raise ConfigError("family text must start with an alpha= header")
    cubes = []
    for ln in lines[1:]:
        try:
            lat, lev, idx = (int(tok) for tok in ln.split())
        except ValueError:
            raise ConfigError(f"bad family line {ln!r}") from None
        cubes.append(DyadicCube(lat, lev, idx))
    return carleson_family(cubes)


# ---------------------------------------------------------------------------
# Stratification


@dataclass(frozen=True)
class Stratification:
    """Family split by entropy density (rho_{m+1}) and function-average bands.

    s1_bands[k] holds cubes with 1 <= rho < 2 whose f-average lies in band k
    (56^{-m(k+1)} < <f>_Q <= 56^{-mk}); s2_bands[(r, k)] additionally locates
    rho in [2^(2^r), 2^(2^(r+1))).  Cubes with <f>_Q > 56^{-m} are reported in
    out_of_band; cubes where f vanishes carry no band and land in zero_avg.
    """

    s1_bands: dict
    s2_bands: dict
    out_of_band: tuple
    zero_avg: tuple

    @property
    def s1(self) -> tuple:
        out = []
        for k in sorted(self.s1_bands):
            out.extend(self.s1_bands[k])
        return tuple(out)

    def all_cubes(self) -> tuple:
        out = list(self.s1)
        for key in sorted(self.s2_bands):
            out.extend(self.s2_bands[key])
        out.extend(self.out_of_band)
        out.extend(self.zero_avg)
        return tuple(out)


def _avg_band(favg: float, m: int) -> int:
    """Band k >= 1 with 56^{-m(k+1)} < favg <= 56^{-mk}; requires favg <= 56^-m."""
    step = 56.0**-m
    k = 1
    bound = step * step  # 56^{-m(k+1)} at k = 1
    while favg <= bound:
        k += 1
        bound *= step
    return k


def stratify(
    S: CarlesonFamily,
    f: GridFunction,
    w: GridFunction,
    m: int,
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> Stratification:
    if m < 1:
        raise DomainError("m must be >= 1")
    s1: dict[int, list] = {}
    s2: dict[tuple[int, int], list] = {}
    out_of_band: list = []
    zero_avg: list = []
    for Q in S.cubes:
        favg = cube_average(f, Q)
        if favg > 56.0**-m:
            out_of_band.append(Q)
            continue
        if favg <= 0.0:
            zero_avg.append(Q)
            continue
        k = _avg_band(favg, m)
        rho = max(entropy_density(w, Q, m + 1, cfg), 1.0)
        if rho < 2.0:
            s1.setdefault(k, []).append(Q)
        else:
            ell = math.log2(rho)  # rho >= 2 so ell >= 1
            r = max(int(math.floor(math.log2(ell))), 0)
            # guard rounding at band edges: 2^(2^r) <= rho < 2^(2^(r+1))
            while 2.0 ** (1 << (r + 1)) <= rho:
                r += 1
            while r > 0 and 2.0 ** (1 << r) > rho:
                r -= 1
            s2.setdefault((r, k), []).append(Q)
    return Stratification(
        {k: tuple(v) for k, v in sorted(s1.items())},
        {rk: tuple(v) for rk, v in sorted(s2.items())},
        tuple(out_of_band),
        tuple(zero_avg),
    )


# ---------------------------------------------------------------------------
# Stopping decomposition


@dataclass(frozen=True)
class StoppingDecomposition:
    """Generations of a band by maximality, with the exact stopping sets.

    For each Q: e_q[Q] = Q minus the strictly smaller band cubes inside it;
    q_t[Q] = union of the band cubes t generations below Q inside Q;
    e_tilde[Q] = Q minus q_t[Q].
    """

    band: tuple
    t: int
    level: int
    generations: tuple
    e_q: dict
    q_t: dict
    e_tilde: dict

    def layers(self, Q: DyadicCube) -> list:
        """Generations of band cubes inside Q, starting with [Q]."""
        g0 = self._gen_of[Q]
        out = []
        for off, gen in enumerate(self.generations[g0:]):
            layer = [P for P in gen if Q.contains(P)] if off else [Q]
            if not layer:
                break
            out.append(layer)
        return out

    @property
    def _gen_of(self) -> dict:
        return {Q: g for g, gen in enumerate(self.generations) for Q in gen}


def stopping_decomposition(band, t: int, level: int) -> StoppingDecomposition:
    band = tuple(sorted(set(band)))
    if not band:
        raise DomainError("band is empty")
    if t < 1:
        raise DomainError("t must be >= 1")
    n = 1 << level
    # generation = depth in the band containment forest
    gen_of: dict[DyadicCube, int] = {}
    by_key = set(band)
    for Q in band:  # sorted order processes ancestors first
        g = 0
        P = Q
        while P.level > 0:
            P = P.parent()
            if P in by_key:
                g = gen_of[P] + 1
                break
        gen_of[Q] = g
    n_gen = max(gen_of.values()) + 1
    generations = tuple(
        tuple(Q for Q in band if gen_of[Q] == g) for g in range(n_gen)
    )
    e_q: dict[DyadicCube, CellSet] = {}
    q_t: dict[DyadicCube, CellSet] = {}
    e_tilde: dict[DyadicCube, CellSet] = {}
    spans = {Q: cube_span(Q, level) for Q in band}
    for Q in band:
        inside = np.zeros(n, dtype=bool)
        inside[spans[Q]] = True
        strict_children = np.zeros(n, dtype=bool)
        for P in band:
            if P != Q and Q.contains(P):
                strict_children[spans[P]] = True
        e_q[Q] = CellSet(level, inside & ~strict_children)
        gq = gen_of[Q]
        deep = np.zeros(n, dtype=bool)
        if gq + t < n_gen:
            for P in generations[gq + t]:
                if Q.contains(P):
                    deep[spans[P]] = True
        q_t[Q] = CellSet(level, deep)
        e_tilde[Q] = CellSet(level, inside & ~deep)
    return StoppingDecomposition(band, t, level, generations, e_q, q_t, e_tilde)


# ---------------------------------------------------------------------------
# Sparse commutator operators


def sparse_commutator_apply(
    S: CarlesonFamily, b: GridFunction, f: GridFunction, h: int, m: int
) -> GridFunction:
    """T[h,m](f) = sum_Q |b - b_Q|^h <|b - b_Q|^{m-h} f>_Q chi_Q, cell-wise."""
    if not 0 <= h <= m:
        raise DomainError(f"need 0 <= h <= m, got h={h}, m={m}")
    if b.level != f.level:
        raise DomainError("symbol and function must share a grid level")
    out = np.zeros(f.n_cells)
    for Q in S.cubes:
        span = cube_span(Q, f.level)
        bq = float(b.cells[span].mean())
        osc = np.abs(b.cells[span] - bq)
        inner = float((osc ** (m - h) * f.cells[span]).mean()) if m > h else float(
            f.cells[span].mean()
        )
        out[span] += (osc**h if h else 1.0) * inner
    return GridFunction(f.level, out)


def exceptional_sets(
    b: GridFunction, Q: DyadicCube, m: int, k: int, tau: float
) -> CellSet:
    """Cells of Q where |b - b_Q|^m exceeds 2^m e^m 4^{m(k+tau)} (1-D constant).

    The symbol is expected to be normalised to dyadic BMO norm 1 beforehand.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    if tau < 0.0:
        raise DomainError("tau must be >= 0")
    if m < 1:
        raise DomainError("m must be >= 1")
    threshold = 2.0 * math.e * 4.0 ** (k + tau)  # m-th root of the stated bound
    span = cube_span(Q, b.level)
    bq = float(b.cells[span].mean())
    mask = np.zeros(b.n_cells, dtype=bool)
    mask[span] = np.abs(b.cells[span] - bq) > threshold
    return CellSet(b.level, mask)


def choose_tau(m: int, grid=(0.0, 0.5, 1.0, 2.0)) -> float:
    """Smallest tau on the grid making log^m(e+log t)/log^m(t) numerically
    decreasing for t >= exp(4^(1+tau) - 1)."""
    for tau in grid:
        t0 = math.exp(4.0 ** (1.0 + tau) - 1.0)
        ts = np.exp(np.linspace(math.log(t0), math.log(t0) + 60.0, 4096))
        phi = np.log(math.e + np.log(ts)) ** m / np.log(ts) ** m
        if (np.diff(phi) <= 1e-15).all():
            return tau
    raise DomainError(f"no tau on the grid {grid} works for m={m}")


# ---------------------------------------------------------------------------
# Martingale transform model operator


@dataclass(frozen=True)
class SignPattern:
    """Sign choice for the martingale transform.

    kind = "alt": +1 on even levels, -1 on odd levels (deterministic default).
    kind = "random": one hashed +-1 per dyadic interval from ``seed``.
    """

    kind: str = "alt"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("alt", "random", "plus"):
            raise ValueError(f"unknown sign pattern {self.kind!r}")

    def level_signs(self, j: int) -> np.ndarray:
        from .bmo import interval_sign

        n = 1 << j
        if self.kind == "plus":
            return np.ones(n)
        if self.kind == "alt":
            return np.full(n, 1.0 if j % 2 == 0 else -1.0)
        return np.array([interval_sign(self.seed, j, i) for i in range(n)])


def parse_signs(spec: str) -> SignPattern:
    parts = spec.strip().split(":")
    kind = parts[0].strip().lower()
    if kind in ("alt", "plus") and len(parts) == 1:
        return SignPattern(kind)
    if kind == "random" and len(parts) == 2:
        try:
            return SignPattern("random", int(parts[1]))
        except ValueError:
            raise ConfigError(f"bad sign seed in {spec!r}") from None
    raise ConfigError(f"sign pattern must be alt, plus or random:SEED, got {spec!r}")


def martingale_transform(f: GridFunction, signs: SignPattern = SignPattern()) -> GridFunction:
    """T(f) = sum over dyadic intervals of sigma_I <f, h_I> h_I (Haar expansion)."""
    J = f.level
    avgs = [f.cells]
    for _ in range(J):
        avgs.append(0.5 * (avgs[-1][0::2] + avgs[-1][1::2]))
    avgs.reverse()  # avgs[j] = level-j cube means
    rec = np.zeros(1)
    for j in range(J):
        d = 0.5 * (avgs[j + 1][0::2] - avgs[j + 1][1::2]) * signs.level_signs(j)
        nxt = np.empty(2 << j)
        nxt[0::2] = rec + d
        nxt[1::2] = rec - d
        rec = nxt
    return GridFunction(J, rec)


def iterated_commutator(
    b: GridFunction, f: GridFunction, m: int, signs: SignPattern = SignPattern()
) -> GridFunction:
    """m-fold commutator of the martingale transform with multiplication by b."""
    if m < 0:
        raise DomainError("m must be >= 0")
    if m == 0:
        return martingale_transform(f, signs)
    inner_f = iterated_commutator(b, f, m - 1, signs)
    inner_bf = iterated_commutator(b, GridFunction(f.level, b.cells * f.cells), m - 1, signs)
    return GridFunction(f.level, b.cells * inner_f.cells - inner_bf.cells)


@dataclass(frozen=True)
class DominationReport:
    """Minimal pointwise constant for |T_b^m f| <= c * sum_h T[h,m](f)."""

    c: float
    infinite: bool
    argmax_cell: int
    family_size: int
    alpha: float


def pointwise_domination_check(
    b: GridFunction,
    f: GridFunction,
    signs: SignPattern,
    m: int,
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> DominationReport:
    """Empirical sparse domination of the martingale-transform commutator.

    The dominating family joins the stopping families of f and of
    |b - b_[0,1)|^m f (ratio 2).  Cells where the dominating sum vanishes but
    the commutator does not are flagged as an infinite constant.
    """
    if (f.cells < 0.0).any():
        raise DomainError("domination check needs f >= 0")
    num = np.abs(iterated_commutator(b, f, m, signs).cells)
    fams = [build_sparse_from_function(f, 2.0)]
    broot = float(b.cells.mean())
    g = np.abs(b.cells - broot) ** m * f.cells
    if (g > 0.0).any():
        fams.append(build_sparse_from_function(GridFunction(f.level, g), 2.0))
    cubes = set()
    for fam in fams:
        cubes.update(fam.cubes)
    S = carleson_family(cubes)
    den = np.zeros(f.n_cells)
    for h in range(m + 1):
        den += sparse_commutator_apply(S, b, f, h, m).cells
    # float cancellation floor: commutator values provably zero can come out
    # as rounding dust, which must not register as a domination failure
    zero_tol = 1e-10 * max(1.0, float(num.max()))
    pos = den > 0.0
    bad = ~pos & (num > zero_tol)
    if bad.any():
        cell = int(np.argmax(np.where(bad, num, -np.inf)))
        return DominationReport(math.inf, True, cell, len(S), float(S.alpha))
    if not pos.any():
        return DominationReport(0.0, False, 0, len(S), float(S.alpha))
    ratios = np.where(pos, num / np.where(pos, den, 1.0), 0.0)
    cell = int(np.argmax(ratios))
    return DominationReport(float(ratios[cell]), False, cell, len(S), float(S.alpha))

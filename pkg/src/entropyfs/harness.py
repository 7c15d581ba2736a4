"""Experiment driver: weak-type ratio experiments, corpus sweeps, CSV/JSON.

Each experiment evaluates the two sides of one weighted endpoint inequality
on the grid and reports lhs, rhs and their ratio:

  fs          w({M f > t})            vs  (1/t) int |f| M w
  perez       w({|T f| > t})          vs  (1/t) int |f| M_{llogl:rho} w
  rahm        w({|T f| > t})          vs  series * (1/t) int |f| M_{eps,1} w
  tmbs        sup_t t w({T[m,m]f>t})  vs  series * int |f| M_{eps,phik:m,m+1} w
  t0m         w({T[0,m]f > t})        vs  int Phi_m(|b|_d^m |f| / t) M_{phik:m} w
  main        w({|T_b^m f| > t})      vs  series * int Phi_m(...) M_{eps,phik:m,m+1} w
  domination  pointwise sparse domination constant of the commutator

T is the dyadic martingale transform; the symbol is normalised to dyadic BMO
norm 1 where the right-hand side carries no explicit norm factor (tmbs).
Ratios use the conventions 0/0 -> 0 and lhs/0 -> flagged infinity.  Sweep
output is byte-deterministic for a fixed config and seed: wall times are
reported as 0 unless timing is explicitly enabled.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .corpus import (
    DEFAULT_EPSILONS,
    DEFAULT_FUNCTIONS,
    DEFAULT_SYMBOLS,
    DEFAULT_WEIGHTS,
    make_function,
    make_symbol,
    make_weight,
)
from .bmo import dyadic_bmo_norm
from .errors import ConfigError
from .grid import GridFunction, level_set, total_integral, weighted_measure
from .maximal import (
    EntropyProfile,
    EpsilonFunction,
    dyadic_maximal,
    entropy_maximal,
    epsilon_series,
    orlicz_maximal,
    parse_epsilon,
)
from .orlicz import ToleranceConfig, YoungFunction, young_eval
from .sparse import (
    CarlesonFamily,
    SignPattern,
    build_sparse_from_function,
    iterated_commutator,
    martingale_transform,
    parse_signs,
    pointwise_domination_check,
    sparse_commutator_apply,
)

CSV_COLUMNS = (
    "experiment",
    "J",
    "m",
    "weight",
    "function",
    "bmo",
    "epsilon",
    "t",
    "lhs",
    "rhs",
    "ratio",
    "wall_ms",
)

EXPERIMENTS = ("fs", "perez", "rahm", "tmbs", "t0m", "main", "domination")

# axes actually swept per experiment; the others echo "-"
EXPERIMENT_AXES = {
    "fs": ("weight", "function"),
    "perez": ("weight", "function"),
    "rahm": ("weight", "function", "epsilon"),
    "tmbs": ("weight", "function", "bmo", "epsilon", "m"),
    "t0m": ("weight", "function", "bmo", "m"),
    "main": ("weight", "function", "bmo", "epsilon", "m"),
    "domination": ("function", "bmo", "m"),
}


@dataclass
class ExperimentConfig:
    level: int = 10
    m: int = 1
    weight: str = "const:1"
    function: str = "indicator:0:0.25"
    bmo: str = "haar"
    epsilon: str = "logpow:1"
    t_lo: float | None = None
    t_hi: float | None = None
    t_steps: int = 64
    series_r: int = 20
    sparse_ratio: float | None = None  # None -> 2 * 56^m
    perez_rho: float = 1.0
    perez_operator: str = "martingale"  # or "sparse"
    main_mode: str = "b"  # "a" direct commutator, "b" dominating sum
    weak_exact: bool | None = None  # None -> exact for level <= 12
    signs: str = "alt"
    seed: int = 1234
    rel_tol: float = 1e-10
    max_iter: int = 200
    lattices: tuple = (0, 1, 2)
    timing: bool = False


@dataclass(frozen=True)
class RatioReport:
    experiment: str
    level: int
    m: int | None
    weight: str
    function: str
    bmo: str
    epsilon: str
    t: float | None
    lhs: float
    rhs: float
    ratio: float
    infinite: bool
    wall_ms: float = 0.0

    def csv_row(self) -> str:
        vals = (
            self.experiment,
            str(self.level),
            "-" if self.m is None else str(self.m),
            self.weight,
            self.function,
            self.bmo,
            self.epsilon,
            "-" if self.t is None else repr(float(self.t)),
            repr(float(self.lhs)),
            repr(float(self.rhs)),
            repr(float(self.ratio)),
            repr(float(self.wall_ms)),
        )
        return ",".join(vals)


def _ratio(lhs: float, rhs: float) -> tuple[float, bool]:
    if lhs == 0.0:
        return 0.0, False
    if rhs == 0.0:
        return math.inf, True
    return lhs / rhs, False


def weighted_exceedance(values: np.ndarray, cell_weights: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """w({values > t}) for every t, via one sort."""
    order = np.argsort(values, kind="stable")
    v = values[order]
    tail = np.concatenate([np.cumsum(cell_weights[order][::-1])[::-1], [0.0]])
    return tail[np.searchsorted(v, ts, side="right")]


def weak_norm_exact(values: np.ndarray, cell_weights: np.ndarray) -> float:
    """sup_t t * w({values > t}) over all t > 0, exact for step functions."""
    pos = values > 0.0
    if not pos.any():
        return 0.0
    v = np.unique(values[pos])
    order = np.argsort(values, kind="stable")
    sv = values[order]
    tail = np.concatenate([np.cumsum(cell_weights[order][::-1])[::-1], [0.0]])
    wgeq = tail[np.searchsorted(sv, v, side="left")]
    return float((v * wgeq).max())


class TableCache:
    """Shared per-sweep cache of maximal fields keyed by spec tokens."""

    def __init__(self):
        self._store: dict = {}

    def get(self, key, builder):
        if key not in self._store:
            self._store[key] = builder()
        return self._store[key]


class RunContext:
    """Resolved inputs for one experiment combo, with cached heavy fields."""

    def __init__(self, cfg: ExperimentConfig, cache: TableCache | None = None):
        self.cfg = cfg
        self.cache = cache if cache is not None else TableCache()
        self.tol = ToleranceConfig(cfg.rel_tol, cfg.max_iter)
        self.w = make_weight(cfg.weight, cfg.level, cfg.seed)
        self.f = make_function(cfg.function, cfg.level, cfg.seed)
        if (self.f.cells < 0.0).any():
            raise ConfigError(f"function spec {cfg.function!r} must be non-negative")
        self.b = make_symbol(cfg.bmo, cfg.level)
        self.eps = parse_epsilon(cfg.epsilon)
        self.signs = parse_signs(cfg.signs)

    # -- derived values ----------------------------------------------------

    @property
    def cell_measures(self) -> np.ndarray:
        return np.full(self.f.n_cells, self.f.cell_width)

    def t_grid(self) -> np.ndarray:
        cfg = self.cfg
        if cfg.t_lo is not None and cfg.t_hi is not None:
            return np.geomspace(cfg.t_lo, cfg.t_hi, cfg.t_steps)
        mu = max(float(np.abs(self.f.cells).mean()), 1e-300)
        return np.geomspace(1e-4 * mu, 1e4 * mu, cfg.t_steps)

    def sparse_ratio(self) -> float:
        if self.cfg.sparse_ratio is not None:
            return self.cfg.sparse_ratio
        return 2.0 * 56.0**self.cfg.m

    def family(self) -> CarlesonFamily:
        key = ("family", self.cfg.level, self.cfg.function, self.cfg.seed, self.sparse_ratio())
        return self.cache.get(key, lambda: build_sparse_from_function(self.f, self.sparse_ratio()))

    def bmo_norm(self) -> float:
        key = ("bnorm", self.cfg.level, self.cfg.bmo)
        return self.cache.get(key, lambda: dyadic_bmo_norm(self.b))

    def hl_maximal(self, which: str) -> GridFunction:
        g = self.w if which == "weight" else self.f
        key = ("hl", self.cfg.level, which, self.cfg.weight if which == "weight" else self.cfg.function, self.cfg.seed, self.cfg.lattices)
        return self.cache.get(key, lambda: dyadic_maximal(g, self.cfg.lattices))

    def orlicz_field(self, young: YoungFunction) -> GridFunction:
        key = ("orlicz", self.cfg.level, self.cfg.weight, self.cfg.seed, young.key(), self.cfg.lattices)
        return self.cache.get(
            key, lambda: orlicz_maximal(self.w, young, self.cfg.lattices, self.tol)
        )

    def entropy_field(self, young: YoungFunction, k: int) -> GridFunction:
        key = (
            "entropy",
            self.cfg.level,
            self.cfg.weight,
            self.cfg.seed,
            young.key(),
            k,
            self.eps.key(),
            self.cfg.lattices,
        )
        profile = EntropyProfile(young, k, self.eps)
        return self.cache.get(
            key, lambda: entropy_maximal(self.w, profile, self.cfg.lattices, self.tol)
        )

    def weak_norm(self, out: GridFunction) -> float:
        exact = self.cfg.weak_exact
        if exact is None:
            exact = self.cfg.level <= 12
        wvals = self.w.cells * self.f.cell_width
        if exact:
            return weak_norm_exact(out.cells, wvals)
        ts = self.t_grid()
        return float((ts * weighted_exceedance(out.cells, wvals, ts)).max())

    def check_carleson_hypothesis(self, S: CarlesonFamily):
        excess = S.alpha - 1
        if Fraction(56) ** self.cfg.m * excess >= 1:
            raise ConfigError(
                f"family violates 56^m(alpha-1) < 1: alpha={float(S.alpha)} "
                f"attained on cube (lattice={S.alpha_cube.lattice}, "
                f"level={S.alpha_cube.level}, index={S.alpha_cube.index})"
            )

    def _report(self, experiment, t, lhs, rhs, wall_ms, m=None, used=()):
        ratio, infinite = _ratio(lhs, rhs)
        cfg = self.cfg
        return RatioReport(
            experiment=experiment,
            level=cfg.level,
            m=m,
            weight=cfg.weight if "weight" in used else "-",
            function=cfg.function if "function" in used else "-",
            bmo=cfg.bmo if "bmo" in used else "-",
            epsilon=cfg.epsilon if "epsilon" in used else "-",
            t=t,
            lhs=lhs,
            rhs=rhs,
            ratio=ratio,
            infinite=infinite,
            wall_ms=wall_ms,
        )


def _clock(cfg: ExperimentConfig):
    return time.perf_counter() if cfg.timing else 0.0


def _elapsed_ms(cfg: ExperimentConfig, t0: float) -> float:
    return (time.perf_counter() - t0) * 1e3 if cfg.timing else 0.0


def run_fs_ratio(ctx: RunContext) -> list[RatioReport]:
    t0 = _clock(ctx.cfg)
    used = EXPERIMENT_AXES["fs"]
    mf = ctx.hl_maximal("function")
    mw = ctx.hl_maximal("weight")
    rhs_num = total_integral(GridFunction(ctx.f.level, np.abs(ctx.f.cells) * mw.cells))
    ts = ctx.t_grid()
    exceed = weighted_exceedance(mf.cells, ctx.w.cells * ctx.f.cell_width, ts)
    wall = _elapsed_ms(ctx.cfg, t0)
    return [
        ctx._report("fs", float(t), float(lhs), rhs_num / t, wall, used=used)
        for t, lhs in zip(ts, exceed)
    ]


def _model_output(ctx: RunContext) -> GridFunction:
    if ctx.cfg.perez_operator == "sparse":
        S = ctx.family()
        return sparse_commutator_apply(S, ctx.b, ctx.f, 0, 0)
    out = martingale_transform(ctx.f, ctx.signs)
    return GridFunction(out.level, np.abs(out.cells))


def run_perez_ratio(ctx: RunContext) -> list[RatioReport]:
    if not ctx.cfg.perez_rho > 0.0:
        raise ConfigError("perez exponent rho must be > 0")
    t0 = _clock(ctx.cfg)
    used = EXPERIMENT_AXES["perez"]
    out = _model_output(ctx)
    field_ = ctx.orlicz_field(YoungFunction.llogl(ctx.cfg.perez_rho))
    rhs_num = total_integral(GridFunction(ctx.f.level, np.abs(ctx.f.cells) * field_.cells))
    ts = ctx.t_grid()
    exceed = weighted_exceedance(out.cells, ctx.w.cells * ctx.f.cell_width, ts)
    wall = _elapsed_ms(ctx.cfg, t0)
    return [
        ctx._report("perez", float(t), float(lhs), rhs_num / t, wall, used=used)
        for t, lhs in zip(ts, exceed)
    ]


def run_rahm_ratio(ctx: RunContext) -> list[RatioReport]:
    t0 = _clock(ctx.cfg)
    used = EXPERIMENT_AXES["rahm"]
    out = _model_output(ctx)
    field_ = ctx.entropy_field(YoungFunction.power(1.0), 1)
    series = epsilon_series(ctx.eps, ctx.cfg.series_r)
    rhs_num = series * total_integral(
        GridFunction(ctx.f.level, np.abs(ctx.f.cells) * field_.cells)
    )
    ts = ctx.t_grid()
    exceed = weighted_exceedance(out.cells, ctx.w.cells * ctx.f.cell_width, ts)
    wall = _elapsed_ms(ctx.cfg, t0)
    return [
        ctx._report("rahm", float(t), float(lhs), rhs_num / t, wall, used=used)
        for t, lhs in zip(ts, exceed)
    ]


def run_tmbs_weak(ctx: RunContext) -> list[RatioReport]:
    t0 = _clock(ctx.cfg)
    used = EXPERIMENT_AXES["tmbs"]
    m = ctx.cfg.m
    S = ctx.family()
    ctx.check_carleson_hypothesis(S)
    field_ = ctx.entropy_field(YoungFunction.phik(m), m + 1)
    rhs = epsilon_series(ctx.eps, ctx.cfg.series_r) * total_integral(
        GridFunction(ctx.f.level, np.abs(ctx.f.cells) * field_.cells)
    )
    bnorm = ctx.bmo_norm()
    if bnorm == 0.0:
        lhs = 0.0
    else:
        bh = GridFunction(ctx.b.level, ctx.b.cells / bnorm)
        lhs = ctx.weak_norm(sparse_commutator_apply(S, bh, ctx.f, m, m))
    wall = _elapsed_ms(ctx.cfg, t0)
    return [ctx._report("tmbs", None, lhs, rhs, wall, m=m, used=used)]


def run_t0m_ratio(ctx: RunContext) -> list[RatioReport]:
    t0 = _clock(ctx.cfg)
    used = EXPERIMENT_AXES["t0m"]
    m = ctx.cfg.m
    S = ctx.family()
    ctx.check_carleson_hypothesis(S)
    out = sparse_commutator_apply(S, ctx.b, ctx.f, 0, m)
    field_ = ctx.orlicz_field(YoungFunction.phik(m))
    bnorm = ctx.bmo_norm()
    phim = YoungFunction.phik(m)
    ts = ctx.t_grid()
    exceed = weighted_exceedance(out.cells, ctx.w.cells * ctx.f.cell_width, ts)
    wall = _elapsed_ms(ctx.cfg, t0)
    reports = []
    absf = np.abs(ctx.f.cells)
    for t, lhs in zip(ts, exceed):
        integrand = young_eval(phim, bnorm**m * absf / t) * field_.cells
        rhs = float(integrand.sum()) * ctx.f.cell_width
        reports.append(ctx._report("t0m", float(t), float(lhs), rhs, wall, m=m, used=used))
    return reports


def run_main_theorem(ctx: RunContext) -> list[RatioReport]:
    t0 = _clock(ctx.cfg)
    used = EXPERIMENT_AXES["main"]
    m = ctx.cfg.m
    if ctx.cfg.main_mode == "a":
        out = np.abs(iterated_commutator(ctx.b, ctx.f, m, ctx.signs).cells)
    else:
        S = ctx.family()
        ctx.check_carleson_hypothesis(S)
        out = np.zeros(ctx.f.n_cells)
        for h in range(m + 1):
            out += sparse_commutator_apply(S, ctx.b, ctx.f, h, m).cells
    field_ = ctx.entropy_field(YoungFunction.phik(m), m + 1)
    series = epsilon_series(ctx.eps, ctx.cfg.series_r)
    bnorm = ctx.bmo_norm()
    phim = YoungFunction.phik(m)
    ts = ctx.t_grid()
    exceed = weighted_exceedance(out, ctx.w.cells * ctx.f.cell_width, ts)
    wall = _elapsed_ms(ctx.cfg, t0)
    reports = []
    absf = np.abs(ctx.f.cells)
    for t, lhs in zip(ts, exceed):
        integrand = young_eval(phim, bnorm**m * absf / t) * field_.cells
        rhs = series * float(integrand.sum()) * ctx.f.cell_width
        reports.append(ctx._report("main", float(t), float(lhs), rhs, wall, m=m, used=used))
    return reports


def run_domination(ctx: RunContext) -> list[RatioReport]:
    t0 = _clock(ctx.cfg)
    used = EXPERIMENT_AXES["domination"]
    rep = pointwise_domination_check(ctx.b, ctx.f, ctx.signs, ctx.cfg.m, ctx.tol)
    wall = _elapsed_ms(ctx.cfg, t0)
    return [ctx._report("domination", None, rep.c, 1.0, wall, m=ctx.cfg.m, used=used)]


RUNNERS = {
    "fs": run_fs_ratio,
    "perez": run_perez_ratio,
    "rahm": run_rahm_ratio,
    "tmbs": run_tmbs_weak,
    "t0m": run_t0m_ratio,
    "main": run_main_theorem,
    "domination": run_domination,
}


# ---------------------------------------------------------------------------
# Sweep configs


@dataclass
class SweepConfig:
    experiments: tuple = ("fs",)
    levels: tuple = (10,)
    ms: tuple = (1,)
    weights: tuple = DEFAULT_WEIGHTS
    functions: tuple = DEFAULT_FUNCTIONS
    bmos: tuple = DEFAULT_SYMBOLS
    epsilons: tuple = DEFAULT_EPSILONS
    base: ExperimentConfig = field(default_factory=ExperimentConfig)


def parse_sweep_config(text: str) -> SweepConfig:
    """Parse the line-oriented ``key = value`` sweep config format."""
    cfg = SweepConfig()
    base = cfg.base

    def split_list(value):
        return tuple(tok.strip() for tok in value.split(",") if tok.strip())

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        try:
            if key == "experiments":
                exps = split_list(value)
                bad = [e for e in exps if e not in EXPERIMENTS]
                if bad:
                    raise ConfigError(f"line {lineno}: unknown experiments {bad}")
                cfg.experiments = exps
            elif key in ("j", "levels"):
                cfg.levels = tuple(int(tok) for tok in split_list(value))
            elif key in ("m", "ms"):
                cfg.ms = tuple(int(tok) for tok in split_list(value))
            elif key == "weights":
                cfg.weights = split_list(value)
            elif key == "functions":
                cfg.functions = split_list(value)
            elif key == "bmos":
                cfg.bmos = split_list(value)
            elif key == "epsilons":
                cfg.epsilons = split_list(value)
            elif key == "t_grid":
                lo, hi, n = value.split(":")
                base.t_lo, base.t_hi, base.t_steps = float(lo), float(hi), int(n)
            elif key == "series_r":
                base.series_r = int(value)
            elif key == "sparse_ratio":
                base.sparse_ratio = None if value.lower() == "auto" else float(value)
            elif key == "perez_rho":
                base.perez_rho = float(value)
            elif key == "seed":
                base.seed = int(value)
            elif key == "signs":
                base.signs = value
            elif key == "main_mode":
                if value not in ("a", "b"):
                    raise ConfigError(f"line {lineno}: main_mode must be a or b")
                base.main_mode = value
            elif key == "weak_mode":
                base.weak_exact = {"exact": True, "grid": False, "auto": None}[value]
            elif key == "tol":
                base.rel_tol = float(value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return cfg


def _sweep_values(sweep: SweepConfig, axis: str):
    return {
        "weight": sweep.weights,
        "function": sweep.functions,
        "bmo": sweep.bmos,
        "epsilon": sweep.epsilons,
        "m": sweep.ms,
    }[axis]


def corpus_sweep(sweep: SweepConfig, timing: bool = False) -> tuple[list[RatioReport], dict]:
    """Cartesian sweep over the declared axes; returns (reports, summary)."""
    reports: list[RatioReport] = []
    cache = TableCache()
    for experiment in sweep.experiments:
        axes = EXPERIMENT_AXES[experiment]
        for level in sweep.levels:
            combos = [{}]
            for axis in ("m", "weight", "function", "bmo", "epsilon"):
                if axis not in axes:
                    continue
                combos = [dict(c, **{axis: v}) for c in combos for v in _sweep_values(sweep, axis)]
            for combo in combos:
                cfg = replace(sweep.base, level=level, timing=timing)
                for axis, value in combo.items():
                    setattr(cfg, "m" if axis == "m" else axis, value)
                ctx = RunContext(cfg, cache)
                reports.extend(RUNNERS[experiment](ctx))
    return reports, summarize(reports)


def summarize(reports: list[RatioReport]) -> dict:
    """Per-experiment max ratio, argmax parameters, and resolution drift."""
    summary: dict = {}
    for exp in sorted({r.experiment for r in reports}):
        rows = [r for r in reports if r.experiment == exp]
        finite = [r for r in rows if not r.infinite]
        per_level: dict[int, float] = {}
        for r in finite:
            per_level[r.level] = max(per_level.get(r.level, 0.0), r.ratio)
        best = max(finite, key=lambda r: r.ratio, default=None)
        levels = sorted(per_level)
        drift = []
        for lo, hi in zip(levels, levels[1:]):
            a, b = per_level[lo], per_level[hi]
            drift.append(
                {
                    "J_lo": lo,
                    "J_hi": hi,
                    "max_lo": a,
                    "max_hi": b,
                    "drift": (b / a) if a > 0.0 else None,
                }
            )
        summary[exp] = {
            "max_ratio": best.ratio if best else 0.0,
            "argmax_params": (
                {
                    "J": best.level,
                    "m": best.m,
                    "weight": best.weight,
                    "function": best.function,
                    "bmo": best.bmo,
                    "epsilon": best.epsilon,
                    "t": best.t,
                }
                if best
                else None
            ),
            "drift_J_pairs": drift,
            "n_rows": len(rows),
            "n_infinite": sum(1 for r in rows if r.infinite),
            "max_ratio_per_J": {str(j): per_level[j] for j in levels},
        }
    return summary


def reports_to_csv(reports: list[RatioReport]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    lines += [r.csv_row() for r in reports]
    return "\n".join(lines) + "\n"


def summary_to_json(summary: dict) -> str:
    return json.dumps(summary, sort_keys=True, indent=2) + "\n"

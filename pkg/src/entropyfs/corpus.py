"""Seeded generators and spec-string parsers for weights, functions and symbols.

Spec grammar (also used by the CLI):

  weights:    const:C | power:A | twoval[:HI:FRAC] | lognormal[:SIGMA] | file:PATH
  functions:  const:C | indicator:LO:HI | spine | random | file:PATH
  symbols:    haar | logdist | martingale:SEED:DEPTH

Random cells come from numpy's default_rng seeded with (seed, level, crc of
the spec string), so a sweep is reproducible bit-for-bit from its config.
"""

from __future__ import annotations

import zlib

import numpy as np

from .bmo import parse_symbol
from .errors import ConfigError
from .grid import (
    GridFunction,
    constant_function,
    indicator_function,
    parse_grid_text,
    require_weight,
)

DEFAULT_WEIGHTS = (
    "const:1",
    "power:0.3",
    "power:0.6",
    "power:0.9",
    "twoval:64:0.125",
    "lognormal:1",
)
DEFAULT_FUNCTIONS = ("const:1", "indicator:0:0.25", "spine", "random")
DEFAULT_SYMBOLS = ("haar", "logdist", "martingale:11:6")
DEFAULT_EPSILONS = ("logpow:1", "pow:1")


def _rng(seed: int, level: int, spec: str) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFF, level, zlib.crc32(spec.encode())])


def _split(spec: str) -> list[str]:
    return [p.strip() for p in spec.strip().split(":")]


def _floats(parts: list[str], spec: str) -> list[float]:
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"bad numeric parameter in {spec!r}") from None


def make_function(spec: str, level: int, seed: int = 0) -> GridFunction:
    parts = _split(spec)
    kind = parts[0].lower()
    if kind == "const":
        (c,) = _floats(parts[1:], spec) if len(parts) == 2 else (1.0,)
        return constant_function(level, c)
    if kind == "indicator":
        if len(parts) != 3:
            raise ConfigError("indicator spec must be indicator:LO:HI")
        lo, hi = _floats(parts[1:], spec)
        return indicator_function(level, lo, hi)
    if kind == "spine":
        cells = np.zeros(1 << level)
        cells[0] = float(1 << level)  # unit total mass on the leftmost cell
        return GridFunction(level, cells)
    if kind == "random":
        cells = _rng(seed, level, spec).uniform(0.0, 1.0, 1 << level)
        return GridFunction(level, cells)
    if kind == "file":
        path = spec.split(":", 1)[1]
        with open(path, "r", encoding="utf-8") as fh:
            return parse_grid_text(fh.read())
    raise ConfigError(f"unknown function spec {spec!r}")


def make_weight(spec: str, level: int, seed: int = 0) -> GridFunction:
    parts = _split(spec)
    kind = parts[0].lower()
    if kind == "const":
        (c,) = _floats(parts[1:], spec) if len(parts) == 2 else (1.0,)
        return require_weight(constant_function(level, c))
    if kind == "power":
        if len(parts) != 2:
            raise ConfigError("power spec must be power:A")
        (a,) = _floats(parts[1:], spec)
        mid = (np.arange(1 << level) + 0.5) * 2.0**-level
        return require_weight(GridFunction(level, mid**-a))
    if kind == "twoval":
        hi, frac = (64.0, 0.125) if len(parts) == 1 else tuple(_floats(parts[1:], spec))
        mid = (np.arange(1 << level) + 0.5) * 2.0**-level
        return require_weight(GridFunction(level, np.where(mid < frac, hi, 1.0)))
    if kind == "lognormal":
        sigma = 1.0 if len(parts) == 1 else _floats(parts[1:], spec)[0]
        cells = np.exp(sigma * _rng(seed, level, spec).standard_normal(1 << level))
        return require_weight(GridFunction(level, cells))
    if kind == "file":
        path = spec.split(":", 1)[1]
        with open(path, "r", encoding="utf-8") as fh:
            return require_weight(parse_grid_text(fh.read()))
    raise ConfigError(f"unknown weight spec {spec!r}")


def make_symbol(spec: str, level: int) -> GridFunction:
    return parse_symbol(spec, level)

"""Run configuration: line-oriented ``key = value`` files with ``#`` comments.

Values given on the command line override the file. ``serialize`` and
``parse`` round-trip exactly (floats are written with ``repr``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .moments import MODES
from .shift import as_shift


class ConfigError(ValueError):
    """Malformed or out-of-range configuration (a usage error)."""


# knobs that change how work is scheduled or stored but never the numbers
OPERATIONAL_KEYS = frozenset({"workers", "cache_dir", "output"})


@dataclass(frozen=True)
class RunConfig:
    alpha: str = "golden"
    T: float = 1e4
    k: float = 2.0
    mode: str = "smooth"
    seed: int = 1
    step_factor: float = 0.5
    n_samples: int = 10_000
    t_start: float = 100.0
    t_stop: float = 100.0
    t_count: int = 1
    C: float = 1.0
    eps: float = 0.1
    delta: float = 0.5
    A: float = 3.0
    weight_floor: float = 1e-3
    h1: int = 1
    h2: int = 0
    n_max: int = 150
    workers: int = 1
    cache_dir: str = ""
    output: str = ""

    def __post_init__(self):
        try:
            as_shift(self.alpha)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"alpha: {exc}") from None
        checks = [
            (self.T >= 10, "T must be at least 10"),
            (0.0 <= self.k <= 4.0, "k must lie in [0, 4]"),
            (self.mode in MODES, f"mode must be one of {', '.join(MODES)}"),
            (self.seed >= 0, "seed must be non-negative"),
            (0.0 < self.step_factor <= 2.0, "step_factor must lie in (0, 2]"),
            (self.n_samples >= 1, "n_samples must be positive"),
            (self.t_count >= 0, "t_count must be non-negative"),
            (self.t_start >= 0 and self.t_stop >= 0, "t values must be non-negative"),
            (self.C > 0, "C must be positive"),
            (0.0 < self.eps < 0.5, "eps must lie in (0, 1/2)"),
            (0.0 < self.delta < 1.0, "delta must lie in (0, 1)"),
            (self.A > 0, "A must be positive"),
            (0.0 < self.weight_floor < 0.1, "weight_floor must lie in (0, 0.1)"),
            (1 <= self.n_max <= 10**6, "n_max must lie in [1, 1e6]"),
            (self.workers >= 1, "workers must be at least 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                raise ConfigError(f"{f.name} must be finite")

    def t_values(self) -> list[float]:
        if self.t_count == 0:
            return []
        if self.t_count == 1:
            return [self.t_start]
        step = (self.t_stop - self.t_start) / (self.t_count - 1)
        return [self.t_start + j * step for j in range(self.t_count)]

    def updated(self, **changes) -> "RunConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def comment_line(self) -> str:
        """One-line ``# config`` record of every knob that affects the numbers."""
        parts = [f"{k}={v}" for k, v in _items(self) if k not in OPERATIONAL_KEYS]
        return "# config " + " ".join(parts)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def _items(cfg: RunConfig):
    for f in fields(cfg):
        yield f.name, _fmt(getattr(cfg, f.name))


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from None
    return raw


def serialize(cfg: RunConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in _items(cfg))


def parse_pairs(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _convert(key, raw)
    return out


def parse(text: str, base: RunConfig | None = None) -> RunConfig:
    return replace(base or RunConfig(), **parse_pairs(text))


def load(path, overrides: dict | None = None) -> RunConfig:
    """Read a config file (``None`` for defaults) and apply flag overrides."""
    cfg = RunConfig()
    if path:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        cfg = parse(text)
    return cfg.updated(**(overrides or {}))

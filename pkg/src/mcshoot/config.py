"""Run configuration: a single JSON object, validated with defaults filled in."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .problem import WEIGHT_FAMILIES, Nonlinearity, Problem, WeightFunction
from .regularization import dyadic_ladder

MODES = ("eig", "rotation", "solve-approx", "limit", "phase", "check", "verify")

# documented ranges, inclusive
TOL_RANGE = (1e-12, 1e-4)
DELTA_JUMP_RANGE = (1e-8, 0.1)
LIMIT_TOL_RANGE = (1e-12, 1e-2)
ENERGY_TOL_RANGE = (1e-12, 1e-1)


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class WeightSpec:
    family: str = "constant"
    a0: float = 1.0
    a1: float = 0.0
    sigma: float = 0.0
    eps: float = 0.0


@dataclass
class NonlinearitySpec:
    kind: str = "prototype"
    lam: float = 1.5
    p: float = 11.0


@dataclass
class RunConfig:
    mode: str = "eig"
    weight: WeightSpec = field(default_factory=WeightSpec)
    nonlinearity: NonlinearitySpec = field(default_factory=NonlinearitySpec)
    k: int = 1
    j: int = 1
    side: str = "below"
    n: float = 8.0
    ladder: list = field(default_factory=dyadic_ladder)
    d: float | None = None
    d_range: list | None = None  # [lo, hi, count]
    levels: list = field(default_factory=lambda: [0.05, 0.1, 0.2, 0.5])
    amplitude: float = 1e-3
    tol: float = 1e-10
    delta_jump: float = 1e-3
    limit_tol: float = 1e-6
    energy_tol: float = 1e-4
    output: str = "mcshoot_out"

    def problem(self) -> Problem:
        w = self.weight
        weight = WeightFunction(w.family, a0=w.a0, a1=w.a1, sigma=w.sigma, eps=w.eps)
        nl = Nonlinearity.prototype(self.nonlinearity.lam, self.nonlinearity.p)
        return Problem(weight, nl)

    def to_dict(self) -> dict:
        return asdict(self)


def _number(key, value):
    if isinstance(value, bool):
        raise ConfigError(key, "expected a number")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {value!r}") from None


def _integer(key, value):
    x = _number(key, value)
    if x != int(x):
        raise ConfigError(key, "expected an integer")
    return int(x)


def _sub(cls, key, raw):
    if not isinstance(raw, dict):
        raise ConfigError(key, "expected an object")
    known = {f.name: f for f in fields(cls)}
    out = {}
    for name, value in raw.items():
        if name not in known:
            raise ConfigError(f"{key}.{name}", "unknown key")
        out[name] = value if name in ("family", "kind") else _number(f"{key}.{name}", value)
    return cls(**out)


def _in_range(key, value, lo, hi):
    if not lo <= value <= hi:
        raise ConfigError(key, f"{value} outside [{lo}, {hi}]")


def config_from_dict(raw: dict) -> RunConfig:
    """Validate a decoded JSON object; unknown keys are rejected."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a JSON object")
    known = {f.name for f in fields(RunConfig)}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown key")
    cfg = RunConfig()
    optional = {f.name for f in fields(RunConfig) if f.default is None}
    for key, value in raw.items():
        if value is None and key in optional:
            setattr(cfg, key, None)
        elif key == "weight":
            cfg.weight = _sub(WeightSpec, key, value)
        elif key == "nonlinearity":
            cfg.nonlinearity = _sub(NonlinearitySpec, key, value)
        elif key in ("mode", "side", "output"):
            if not isinstance(value, str):
                raise ConfigError(key, "expected a string")
            setattr(cfg, key, value)
        elif key in ("k", "j"):
            setattr(cfg, key, _integer(key, value))
        elif key in ("ladder", "levels", "d_range"):
            if not isinstance(value, list):
                raise ConfigError(key, "expected a list")
            setattr(cfg, key, [_number(f"{key}[{i}]", v) for i, v in enumerate(value)])
        else:
            setattr(cfg, key, _number(key, value))
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.mode not in MODES:
        raise ConfigError("mode", f"must be one of {MODES}")
    if cfg.weight.family not in WEIGHT_FAMILIES:
        raise ConfigError("weight.family", f"must be one of {WEIGHT_FAMILIES}")
    if cfg.nonlinearity.kind != "prototype":
        raise ConfigError("nonlinearity.kind", "only 'prototype' is configurable from JSON")
    if not cfg.nonlinearity.p > 1:
        raise ConfigError("nonlinearity.p", "p > 1 required")
    if not cfg.nonlinearity.lam > 0:
        raise ConfigError("nonlinearity.lam", "lam > 0 required")
    try:
        w = cfg.weight
        WeightFunction(w.family, a0=w.a0, a1=w.a1, sigma=w.sigma, eps=w.eps)
    except ValueError as exc:
        raise ConfigError("weight", str(exc)) from None
    if cfg.k < 1:
        raise ConfigError("k", "k >= 1 required")
    if cfg.j < 1:
        raise ConfigError("j", "j >= 1 required")
    if cfg.side not in ("below", "above"):
        raise ConfigError("side", "must be 'below' or 'above'")
    if not cfg.n > 0:
        raise ConfigError("n", "n > 0 required")
    if not cfg.ladder or any(x <= 0 for x in cfg.ladder):
        raise ConfigError("ladder", "entries must be positive")
    if any(b <= a for a, b in zip(cfg.ladder, cfg.ladder[1:])):
        raise ConfigError("ladder", "must be strictly increasing")
    if cfg.d is not None and cfg.d < 0:
        raise ConfigError("d", "d >= 0 required")
    if cfg.d_range is not None:
        if len(cfg.d_range) != 3 or cfg.d_range[2] < 2 or cfg.d_range[0] < 0 or cfg.d_range[1] <= cfg.d_range[0]:
            raise ConfigError("d_range", "expected [lo, hi, count] with 0 <= lo < hi and count >= 2")
    if any(h < 0 for h in cfg.levels):
        raise ConfigError("levels", "energy levels must be non-negative")
    _in_range("tol", cfg.tol, *TOL_RANGE)
    _in_range("delta_jump", cfg.delta_jump, *DELTA_JUMP_RANGE)
    _in_range("limit_tol", cfg.limit_tol, *LIMIT_TOL_RANGE)
    _in_range("energy_tol", cfg.energy_tol, *ENERGY_TOL_RANGE)
    return cfg


def parse_config(source) -> RunConfig:
    """Load from a path to a JSON file or from an already decoded dict."""
    if isinstance(source, dict):
        return config_from_dict(source)
    path = Path(source)
    if not path.exists():
        raise ConfigError("<file>", f"{path} does not exist")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return config_from_dict(raw)

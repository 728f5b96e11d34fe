"""Experiment configuration: a JSON document with command-line overrides."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

COMMANDS = ("average", "trajectory", "noise", "limit", "validate", "orbits", "macro-check")
FORMATS = ("csv", "json")
METHODS = ("quadrature", "closed-form")


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    n_list: tuple[int, ...] = (101,)
    alpha: float = 0.5
    h0: float = 1.0
    a1_sq: float = 0.5
    phase: float = 0.0
    samples: int | str = "auto"
    defects: int = 0
    seed: int = 0
    output: str | None = None
    format: str = "csv"
    method: str = "quadrature"
    trials: int = 8
    tol: float = 1e-6
    memory_cap_mb: float = 2048.0

    def samples_for(self, n: int) -> int:
        return 2 * n + 1 if self.samples == "auto" else int(self.samples)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["n_list"] = list(self.n_list)
        return d


def _check(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.command not in COMMANDS:
        raise ConfigError("command", f"unknown command {cfg.command!r}; choose from {COMMANDS}")
    if not cfg.n_list:
        raise ConfigError("n_list", "at least one apparatus size is required")
    if any(not isinstance(n, int) or isinstance(n, bool) or n < 2 for n in cfg.n_list):
        raise ConfigError("n_list", f"every n must be an integer >= 2, got {list(cfg.n_list)}")
    if not 0.0 < cfg.alpha < 1.0:
        raise ConfigError("alpha", f"must lie in (0, 1), got {cfg.alpha}")
    if not cfg.h0 > 0.0:
        raise ConfigError("h0", f"must be positive, got {cfg.h0}")
    if not 0.0 <= cfg.a1_sq <= 1.0:
        raise ConfigError("a1_sq", f"must lie in [0, 1], got {cfg.a1_sq}")
    if cfg.samples != "auto" and (
        not isinstance(cfg.samples, int) or isinstance(cfg.samples, bool) or cfg.samples < 1
    ):
        raise ConfigError("samples", f"must be 'auto' or an integer >= 1, got {cfg.samples!r}")
    if not isinstance(cfg.defects, int) or cfg.defects < 0:
        raise ConfigError("defects", f"must be a non-negative integer, got {cfg.defects!r}")
    if any(cfg.defects > n for n in cfg.n_list):
        raise ConfigError("defects", "cannot exceed the apparatus size")
    if not isinstance(cfg.seed, int) or not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed", f"must be a 64-bit unsigned integer, got {cfg.seed!r}")
    if cfg.format not in FORMATS:
        raise ConfigError("format", f"must be one of {FORMATS}, got {cfg.format!r}")
    if cfg.method not in METHODS:
        raise ConfigError("method", f"must be one of {METHODS}, got {cfg.method!r}")
    if cfg.trials < 2:
        raise ConfigError("trials", f"need at least 2 prefix trials, got {cfg.trials}")
    return cfg


def load_config(path: str | Path | None, command: str, overrides: dict[str, Any]) -> ExperimentConfig:
    """Merge defaults, the JSON file at ``path`` and ``overrides`` (which win)."""
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a JSON object")
    data.pop("command", None)
    data.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration field")
    if "n_list" in data:
        n_list = data["n_list"]
        data["n_list"] = tuple(n_list) if isinstance(n_list, (list, tuple)) else (n_list,)
    for name in ("alpha", "h0", "a1_sq", "phase", "tol", "memory_cap_mb"):
        if name in data:
            try:
                data[name] = float(data[name])
            except (TypeError, ValueError) as exc:
                raise ConfigError(name, f"not a number: {data[name]!r}") from exc
    if isinstance(data.get("samples"), str) and data["samples"] != "auto":
        try:
            data["samples"] = int(data["samples"])
        except ValueError as exc:
            raise ConfigError("samples", f"not an integer: {data['samples']!r}") from exc
    return _check(ExperimentConfig(command=command, **data))


def with_overrides(cfg: ExperimentConfig, **changes: Any) -> ExperimentConfig:
    return _check(replace(cfg, **changes))

"""One runner per CLI command.  Each returns a :class:`Table`."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .. import __version__
from ..averaging import (
    limit_value,
    time_average_closed_form,
    time_average_quadrature,
    time_variance_scan,
    trajectory,
)
from ..core import (
    ApparatusSpec,
    IncidentState,
    Pattern,
    count_orbits,
    fermat_orbit_count,
    is_prime,
    make_cocked_pattern,
    perturb_pattern,
)
from ..dynamics import DENSE_CAP, evolve_orbit
from ..limit import LimitFit, build_classical_system, classical_expectation, extrapolate_limit
from ..observable import CockedPolicy, macroscopicity_check, pointer_family
from .config import ConfigError, ExperimentConfig
from .validate import validate_size

META = ("alpha", "a1_sq", "seed", "version")

COLUMNS = {
    "average": (
        "n", "alpha", "a1_sq", "kappa_n", "mean_quadrature", "mean_closed_form",
        "limit_value", "deviation", "variance", "samples", "seed", "version",
    ),
    "trajectory": ("n", "t", "f_n") + META,
    "noise": ("n", "mean", "variance", "samples") + META,
    "limit": ("L_hat", "residual", "classical_expectation", "n_values") + META,
    "orbits": ("n", "prime", "count", "formula_count") + META,
    "macro-check": ("n", "prefix_id", "prefix_length", "estimate", "spread", "passed", "diagnostic") + META,
    "validate": ("check", "n", "value", "tolerance", "passed") + META,
}


@dataclass
class Table:
    command: str
    rows: list[dict[str, Any]] = field(default_factory=list)
    exit_code: int = 0

    @property
    def columns(self) -> tuple[str, ...]:
        return COLUMNS[self.command]


def _meta(cfg: ExperimentConfig) -> dict[str, Any]:
    return {"alpha": cfg.alpha, "a1_sq": cfg.a1_sq, "seed": cfg.seed, "version": __version__}


def estimate_bytes(cfg: ExperimentConfig, n: int) -> int:
    """Rough peak memory of one sweep entry."""
    if cfg.command == "validate":
        return 3 * 16 * (1 << (2 * n))
    if cfg.command == "orbits":
        return 8 * (1 << min(n, 20)) * 3
    M = cfg.samples_for(n)
    # two sector orbits plus FFT scratch, mask and defect arrays
    return 16 * (4 * n + 3 * M) + 8 * 4 * n


def _guard(cfg: ExperimentConfig) -> None:
    cap = cfg.memory_cap_mb * 2**20
    for n in cfg.n_list:
        need = estimate_bytes(cfg, n)
        if need > cap:
            raise ConfigError(
                "n_list",
                f"n = {n} needs about {need / 2**20:.0f} MiB, above memory_cap_mb = {cfg.memory_cap_mb:g}",
            )


def _initial_patterns(cfg: ExperimentConfig) -> dict[int, Pattern]:
    rng = np.random.default_rng(cfg.seed)
    return {n: perturb_pattern(make_cocked_pattern(n), cfg.defects, rng) for n in cfg.n_list}


def _setup(cfg: ExperimentConfig):
    _guard(cfg)
    v0 = IncidentState.from_probability(cfg.a1_sq, cfg.phase)
    return CockedPolicy(cfg.alpha), v0, _initial_patterns(cfg)


def run_average(cfg: ExperimentConfig) -> Table:
    policy, v0, starts = _setup(cfg)
    table = Table("average")
    limit = limit_value(v0)
    for n in cfg.n_list:
        spec = ApparatusSpec(n, cfg.h0)
        quad = time_average_quadrature(spec, policy, v0, cfg.samples_for(n), starts[n])
        closed = time_average_closed_form(spec, policy, v0, starts[n])
        table.rows.append({
            "n": n,
            "kappa_n": closed.kappa,
            "mean_quadrature": quad.mean,
            "mean_closed_form": closed.mean,
            "limit_value": limit,
            "deviation": abs(quad.mean - limit),
            "variance": quad.variance,
            "samples": quad.samples,
            **_meta(cfg),
        })
    return table


def run_trajectory(cfg: ExperimentConfig) -> Table:
    if len(cfg.n_list) != 1:
        raise ConfigError("n_list", "trajectory takes exactly one apparatus size")
    policy, v0, starts = _setup(cfg)
    n = cfg.n_list[0]
    M = cfg.samples_for(n)
    times = [Fraction(j, M) for j in range(M)]
    f = trajectory(ApparatusSpec(n, cfg.h0), policy, v0, times, starts[n])
    meta = _meta(cfg)
    return Table("trajectory", [{"n": n, "t": float(t), "f_n": float(v), **meta} for t, v in zip(times, f)])


def run_noise(cfg: ExperimentConfig) -> Table:
    policy, v0, starts = _setup(cfg)
    specs = [ApparatusSpec(n, cfg.h0) for n in cfg.n_list]
    scan = time_variance_scan(specs, policy, v0, cfg.samples_for, lambda s: starts[s.n])
    meta = _meta(cfg)
    return Table(
        "noise",
        [{"n": r.n, "mean": r.mean, "variance": r.variance, "samples": r.samples, **meta} for r in scan],
    )


def run_limit(cfg: ExperimentConfig) -> Table:
    policy, v0, starts = _setup(cfg)
    samples = []
    for n in cfg.n_list:
        spec = ApparatusSpec(n, cfg.h0)
        if cfg.method == "closed-form":
            avg = time_average_closed_form(spec, policy, v0, starts[n])
        else:
            avg = time_average_quadrature(spec, policy, v0, cfg.samples_for(n), starts[n])
        samples.append((n, avg.mean, avg.kappa))
    try:
        est = extrapolate_limit(LimitFit.from_samples(samples))
    except ValueError as exc:
        raise ConfigError("n_list", str(exc)) from exc
    row = {
        "L_hat": est.L_hat,
        "residual": est.residual,
        "classical_expectation": classical_expectation(build_classical_system(v0)),
        "n_values": ";".join(str(n) for n in cfg.n_list),
        **_meta(cfg),
    }
    return Table("limit", [row])


def run_orbits(cfg: ExperimentConfig) -> Table:
    _guard(cfg)
    table = Table("orbits")
    for n in cfg.n_list:
        prime = is_prime(n)
        table.rows.append({
            "n": n,
            "prime": prime,
            "count": count_orbits(n),
            "formula_count": fermat_orbit_count(n) if prime else None,
            **_meta(cfg),
        })
    return table


def run_macro_check(cfg: ExperimentConfig) -> Table:
    _guard(cfg)
    rng = np.random.default_rng(cfg.seed)
    policy = CockedPolicy(cfg.alpha)
    report = macroscopicity_check(pointer_family(policy), cfg.n_list, cfg.trials, cfg.tol, rng)
    table = Table("macro-check")
    meta = _meta(cfg)
    for i, n in enumerate(report.sizes):
        for j in range(cfg.trials):
            table.rows.append({
                "n": n,
                "prefix_id": j,
                "prefix_length": report.prefix_lengths[j],
                "estimate": float(report.estimates[i, j]),
                "spread": float(report.spreads[i]),
                "passed": report.passed,
                "diagnostic": report.label,
                **meta,
            })
    return table


def run_validate(cfg: ExperimentConfig, evolve: Callable = evolve_orbit) -> Table:
    too_big = [n for n in cfg.n_list if n > DENSE_CAP]
    if too_big:
        raise ConfigError("n_list", f"validate needs n <= {DENSE_CAP} (dense oracle), got {too_big}")
    _guard(cfg)
    rng = np.random.default_rng(cfg.seed)
    policy = CockedPolicy(cfg.alpha)
    table = Table("validate")
    meta = _meta(cfg)
    for n in cfg.n_list:
        try:
            results = validate_size(n, policy, rng, evolve=evolve)
        except ValueError as exc:
            raise ConfigError("n_list", str(exc)) from exc
        for r in results:
            table.rows.append({
                "check": r.check, "n": r.n, "value": r.value,
                "tolerance": r.tolerance, "passed": r.passed, **meta,
            })
    if not all(row["passed"] for row in table.rows):
        table.exit_code = 1
    return table


RUNNERS: dict[str, Callable[[ExperimentConfig], Table]] = {
    "average": run_average,
    "trajectory": run_trajectory,
    "noise": run_noise,
    "limit": run_limit,
    "validate": run_validate,
    "orbits": run_orbits,
    "macro-check": run_macro_check,
}


def run(cfg: ExperimentConfig) -> Table:
    return RUNNERS[cfg.command](cfg)

"""Time averages of the pointer observable along the detection trajectory.

The evolution has period exactly 1, and along any orbit-supported
trajectory ``f_n(t)`` is a trigonometric polynomial with integer frequencies
below ``n``.  An equally spaced rule with ``M >= 2n + 1`` points over one
period therefore returns the infinite-time average up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import (
    ApparatusSpec,
    CombinedState,
    IncidentState,
    Pattern,
    make_cocked_pattern,
    orbit,
)
from .dynamics import build_dense_hamiltonian, evolve_combined
from .observable import CockedPolicy, cocked_members, cocked_rotation_mask, f_n, sector_cocked_mass

# bytes of complex scratch space used per FFT batch
_BATCH_BYTES = 1 << 26


@dataclass(frozen=True)
class TrajectoryAverage:
    n: int
    alpha: float
    a1_sq: float
    mean: float
    variance: float
    samples: int
    method: str
    kappa: int


def default_samples(n: int) -> int:
    return 2 * n + 1


def initial_state(
    spec: ApparatusSpec, v0: IncidentState, initial: Pattern | None = None, dense: bool = False
) -> CombinedState:
    p = make_cocked_pattern(spec.n) if initial is None else initial
    if p.n != spec.n:
        raise ValueError(f"initial pattern has length {p.n}, apparatus has {spec.n}")
    return CombinedState.product(v0, p, dense=dense)


def pointer_samples(
    spec: ApparatusSpec,
    policy: CockedPolicy,
    v0: IncidentState,
    M: int,
    initial: Pattern | None = None,
) -> np.ndarray:
    """``f_n(j / M)`` for ``j = 0..M-1`` on the fast path.

    Only cocked orbit members matter, so instead of one FFT per time the
    amplitude of each such member is produced for all ``M`` times at once:
    as a function of ``j`` it is a length-``M`` DFT of the evolved spectrum.
    """
    if M < 1:
        raise ValueError(f"sample count must be >= 1, got {M}")
    cs = initial_state(spec, v0, initial)
    sector1 = cs.sector1
    ob = sector1.orbit
    ell = ob.period
    frozen = v0.p0 * sector_cocked_mass(cs.sector0, policy)
    members = cocked_members(ob, policy)
    occupied = np.zeros(M)
    if v0.p1 > 0.0 and len(members):
        spectrum = np.fft.fft(sector1.amplitudes) / ell
        k = np.arange(ell)
        slots = (k * (spec.n // ell)) % M
        # frequencies fold onto each other only when M is below the band width
        aliased = len(np.unique(slots)) < ell
        batch = max(1, _BATCH_BYTES // (16 * M))
        for start in range(0, len(members), batch):
            chunk = members[start : start + batch]
            coeffs = spectrum * np.exp(2j * np.pi * np.outer(chunk, k) / ell)
            grid = np.zeros((len(chunk), M), dtype=complex)
            if aliased:
                np.add.at(grid, (slice(None), slots), coeffs)
            else:
                grid[:, slots] = coeffs
            amps = np.fft.fft(grid, axis=1)
            occupied += (np.abs(amps) ** 2).sum(axis=0)
    f = 1.0 - frozen - v0.p1 * occupied
    return np.clip(f, 0.0, 1.0)


def trajectory(
    spec: ApparatusSpec,
    policy: CockedPolicy,
    v0: IncidentState,
    times: Iterable[float | Fraction],
    initial: Pattern | None = None,
    dense: bool = False,
) -> np.ndarray:
    """``f_n`` at each time by evolving the full state: the direct, per-time route."""
    cs = initial_state(spec, v0, initial, dense=dense)
    hamiltonian = build_dense_hamiltonian(spec) if dense else None
    return np.array([f_n(evolve_combined(cs, t, hamiltonian), policy) for t in times])


def _summary(f: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(f))
    return mean, float(np.mean((f - mean) ** 2))


def time_average_quadrature(
    spec: ApparatusSpec,
    policy: CockedPolicy,
    v0: IncidentState,
    M: int | None = None,
    initial: Pattern | None = None,
    path: str = "fast",
) -> TrajectoryAverage:
    M = default_samples(spec.n) if M is None else M
    if M < 1:
        raise ValueError(f"sample count must be >= 1, got {M}")
    if path == "fast":
        f = pointer_samples(spec, policy, v0, M, initial)
    elif path == "dense":
        f = trajectory(spec, policy, v0, (Fraction(j, M) for j in range(M)), initial, dense=True)
    else:
        raise ValueError(f"unknown path {path!r}")
    mean, variance = _summary(f)
    p = make_cocked_pattern(spec.n) if initial is None else initial
    kappa = int(cocked_rotation_mask(p, policy).sum())
    return TrajectoryAverage(spec.n, policy.alpha, v0.p1, mean, variance, M, "quadrature", kappa)


def _occupation_second_moment(mask: np.ndarray) -> float:
    """Time average of ``(sum_{m in mask} P_m(t))**2`` for a basis-vector start.

    ``P_m(t)`` is the Fejer kernel ``|n^-1 sum_k exp(2 pi i k (m/n - t))|**2``,
    whose frequency-``d`` coefficient is ``(n - |d|) / n**2``.
    """
    n = len(mask)
    d = np.arange(n, dtype=float)
    weights = (n - d) ** 2 + np.where(d > 0, d**2, 0.0)
    kernel = np.real(np.fft.ifft(weights)) / n**3
    pairs = np.rint(np.real(np.fft.ifft(np.abs(np.fft.fft(mask.astype(float))) ** 2)))
    return float(np.dot(kernel, pairs))


def time_average_closed_form(
    spec: ApparatusSpec,
    policy: CockedPolicy,
    v0: IncidentState,
    initial: Pattern | None = None,
) -> TrajectoryAverage:
    """``1 - |a0|^2 [p cocked] - |a1|^2 kappa / n`` with no time evolution.

    A basis vector has a flat Fourier spectrum and the ``n`` eigenphases are
    distinct, so every orbit member is occupied ``1/n`` of the time.  For the
    cocked starting pattern this is ``|a1|^2 (1 - kappa_n / n)``.
    """
    p = make_cocked_pattern(spec.n) if initial is None else initial
    if p.n != spec.n:
        raise ValueError(f"initial pattern has length {p.n}, apparatus has {spec.n}")
    if orbit(p).period < spec.n:
        raise ValueError(f"initial pattern {p} is shift-invariant: period below n = {spec.n}")
    mask = cocked_rotation_mask(p, policy)
    kappa = int(mask.sum())
    occupied = kappa / spec.n
    mean = 1.0 - v0.p0 * float(mask[0]) - v0.p1 * occupied
    spread = _occupation_second_moment(mask) - occupied**2
    variance = max(0.0, v0.p1**2 * spread)
    return TrajectoryAverage(spec.n, policy.alpha, v0.p1, mean, variance, 0, "closed-form", kappa)


def limit_value(v0: IncidentState) -> float:
    """The large-apparatus value of the time-averaged pointer: ``|a1|^2``."""
    return v0.p1


def time_variance_scan(
    specs: Sequence[ApparatusSpec],
    policy: CockedPolicy,
    v0: IncidentState,
    samples: int | str | Callable[[int], int] = "auto",
    initial: Callable[[ApparatusSpec], Pattern] | None = None,
) -> list[TrajectoryAverage]:
    if not specs:
        raise ValueError("need at least one apparatus size")
    out = []
    for spec in specs:
        if samples == "auto":
            M = default_samples(spec.n)
        elif callable(samples):
            M = samples(spec.n)
        else:
            M = int(samples)
        start = initial(spec) if initial is not None else None
        out.append(time_average_quadrature(spec, policy, v0, M, start))
    return out

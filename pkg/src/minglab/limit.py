"""The two-point classical pointer and finite-size extrapolation toward it."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import IncidentState

P0 = "P0"  # cocked: no detection
P1 = "P1"  # excitation travelling rightward: detection registered


@dataclass(frozen=True)
class ClassicalLimitSystem:
    """Points ``{P0, P1}`` with weights ``(w0, w1)``; the pointer variable is the indicator of ``P1``."""

    w0: float
    w1: float

    def __post_init__(self):
        if self.w0 < 0 or self.w1 < 0 or abs(self.w0 + self.w1 - 1.0) > 1e-12:
            raise ValueError(f"weights ({self.w0}, {self.w1}) are not a probability distribution")

    points = (P0, P1)

    def pointer(self, point: str) -> float:
        if point not in self.points:
            raise KeyError(point)
        return 1.0 if point == P1 else 0.0

    @property
    def weights(self) -> tuple[float, float]:
        return self.w0, self.w1


def build_classical_system(v0: IncidentState) -> ClassicalLimitSystem:
    return ClassicalLimitSystem(v0.p0, v0.p1)


def classical_expectation(system: ClassicalLimitSystem) -> float:
    return sum(w * system.pointer(pt) for pt, w in zip(system.points, system.weights))


@dataclass(frozen=True)
class LimitFit:
    """Finite-size samples ``(n, <f_n>, kappa_n)`` for the law ``<f_n> = L (1 - kappa_n / n)``."""

    samples: tuple[tuple[int, float, int], ...]

    @classmethod
    def from_samples(cls, samples: Sequence[tuple[int, float, int]]) -> "LimitFit":
        return cls(tuple((int(n), float(f), int(k)) for n, f, k in samples))

    def design(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.array([1.0 - k / n for n, _, k in self.samples])
        y = np.array([f for _, f, _ in self.samples])
        return x, y


@dataclass(frozen=True)
class LimitEstimate:
    L_hat: float
    residual: float


def extrapolate_limit(fit: LimitFit) -> LimitEstimate:
    """Least-squares ``L`` in ``<f_n> = L (1 - kappa_n / n)``."""
    if len(fit.samples) < 2:
        raise ValueError("extrapolation needs at least two samples")
    x, y = fit.design()
    if np.ptp(x) == 0.0:
        raise ValueError("degenerate design: every sample has the same kappa_n / n")
    L_hat = float(np.dot(x, y) / np.dot(x, x))
    residual = float(np.max(np.abs(y - L_hat * x)))
    return LimitEstimate(L_hat, residual)

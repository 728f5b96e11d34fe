"""Apparatus patterns, cyclic shifts, orbits and combined-system states.

A pattern of ``n`` two-level particles is stored packed in a Python ``int``.
Particle 1 (the leftmost) is the most significant of the ``n`` bits, so
``format(bits, f"0{n}b")`` reads ``pi_1 ... pi_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

NORM_TOL = 1e-12

# enumeration of all 2**n strings is used below this size, Burnside above
ENUMERATION_CAP = 20


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % d for d in range(3, math.isqrt(n) + 1, 2))


def divisors(n: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


@dataclass(frozen=True)
class Pattern:
    """A basis configuration ``|pi_1 ... pi_n>`` of the apparatus."""

    bits: int
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"pattern length must be >= 2, got {self.n}")
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"bits {self.bits} do not fit in {self.n} positions")

    @classmethod
    def from_string(cls, s: str) -> "Pattern":
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a binary string: {s!r}")
        return cls(int(s, 2), len(s))

    @classmethod
    def from_bits(cls, seq: Sequence[int]) -> "Pattern":
        return cls.from_string("".join(str(int(b)) for b in seq))

    def __str__(self) -> str:
        return format(self.bits, f"0{self.n}b")

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, j: int) -> int:
        """Bit at 1-based position ``j`` (``j = 1`` is the leftmost particle)."""
        if not 1 <= j <= self.n:
            raise IndexError(j)
        return (self.bits >> (self.n - j)) & 1

    def to_array(self) -> np.ndarray:
        """Bits as a ``uint8`` array, index 0 holding particle 1."""
        nbytes = (self.n + 7) // 8
        raw = np.frombuffer(self.bits.to_bytes(nbytes, "big"), dtype=np.uint8)
        return np.unpackbits(raw)[nbytes * 8 - self.n:]

    def popcount(self) -> int:
        return self.bits.bit_count()

    def hamming(self, other: "Pattern") -> int:
        if other.n != self.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")
        return (self.bits ^ other.bits).bit_count()

    def rotate(self, m: int) -> "Pattern":
        """Apply the rightward cyclic shift ``m`` times."""
        n = self.n
        m %= n
        if m == 0:
            return self
        full = (1 << n) - 1
        return Pattern(((self.bits >> m) | (self.bits << (n - m))) & full, n)


def shift(p: Pattern) -> Pattern:
    """One time step of the apparatus: ``|pi_1 ... pi_n> -> |pi_n pi_1 ... pi_{n-1}>``."""
    return p.rotate(1)


def make_cocked_pattern(n: int) -> Pattern:
    """``1`` on the first ``n // 2`` particles and ``0`` on the rest."""
    if n < 2:
        raise ValueError(f"apparatus size must be >= 2, got {n}")
    h = n // 2
    return Pattern(((1 << h) - 1) << (n - h), n)


@dataclass(frozen=True)
class ApparatusSpec:
    n: int
    h0: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"apparatus size must be >= 2, got {self.n}")
        if not self.h0 > 0:
            raise ValueError(f"h0 must be positive, got {self.h0}")

    @property
    def h_n(self) -> float:
        """Renormalised action constant ``h0 / n``."""
        return self.h0 / self.n

    @property
    def prime_flag(self) -> bool:
        return is_prime(self.n)


@dataclass(frozen=True)
class OrbitBasis:
    """The cyclic orbit ``p, shift(p), shift^2(p), ...`` of a pattern.

    Members are generated on demand; only the representative is stored so
    that orbits of very long patterns stay cheap.
    """

    representative: Pattern
    period: int

    @property
    def n(self) -> int:
        return self.representative.n

    def member(self, j: int) -> Pattern:
        return self.representative.rotate(j % self.period)

    def __iter__(self) -> Iterator[Pattern]:
        p = self.representative
        for _ in range(self.period):
            yield p
            p = shift(p)

    def __len__(self) -> int:
        return self.period

    @cached_property
    def members(self) -> tuple[Pattern, ...]:
        return tuple(self)

    def index_array(self) -> np.ndarray:
        """Dense-basis indices (the packed integers) of the members, in order."""
        if self.n > 62:
            raise ValueError("dense indices only exist for small apparatus sizes")
        return np.array([p.bits for p in self], dtype=np.int64)


def orbit(p: Pattern) -> OrbitBasis:
    for d in divisors(p.n):
        if p.rotate(d) == p:
            return OrbitBasis(p, d)
    raise AssertionError("unreachable: rotate(n) is the identity")


def _count_orbits_enumerate(n: int) -> int:
    # a string is counted once: when it is the smallest of its rotations
    x = np.arange(1 << n, dtype=np.uint64)
    full = np.uint64((1 << n) - 1)
    canonical = np.ones(x.shape, dtype=bool)
    r = x.copy()
    for _ in range(n - 1):
        r = ((r >> np.uint64(1)) | (r << np.uint64(n - 1))) & full
        canonical &= x <= r
    return int(canonical.sum())


def _count_orbits_burnside(n: int) -> int:
    total = 0
    for d in divisors(n):
        # Euler phi of d
        phi, m, q = d, d, 2
        while q * q <= m:
            if m % q == 0:
                while m % q == 0:
                    m //= q
                phi -= phi // q
            q += 1
        if m > 1:
            phi -= phi // m
        total += phi * (1 << (n // d))
    return total // n


def count_orbits(n: int, method: str = "auto") -> int:
    """Number of cyclic orbits of length-``n`` binary strings."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if method == "auto":
        method = "enumerate" if n <= ENUMERATION_CAP else "burnside"
    if method == "enumerate":
        if n > ENUMERATION_CAP:
            raise ValueError(f"enumeration is capped at n = {ENUMERATION_CAP}")
        return _count_orbits_enumerate(n)
    if method == "burnside":
        return _count_orbits_burnside(n)
    raise ValueError(f"unknown method {method!r}")


def fermat_orbit_count(n: int) -> int:
    """``2 + (2**n - 2) / n``; only an orbit count when ``n`` is prime."""
    if not is_prime(n):
        raise ValueError(f"the closed-form count needs a prime n, got {n}")
    return 2 + ((1 << n) - 2) // n


@dataclass(frozen=True)
class IncidentState:
    """``a0 psi_0 + a1 psi_1`` for the incident particle."""

    a0: complex
    a1: complex

    def __post_init__(self):
        norm = abs(self.a0) ** 2 + abs(self.a1) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"incident amplitudes not normalised: |a0|^2+|a1|^2 = {norm!r}")

    @classmethod
    def from_probability(cls, a1_sq: float, phase: float = 0.0) -> "IncidentState":
        if not 0.0 <= a1_sq <= 1.0:
            raise ValueError(f"a1_sq must lie in [0, 1], got {a1_sq}")
        a1 = math.sqrt(a1_sq) * complex(math.cos(phase), math.sin(phase))
        return cls(complex(math.sqrt(1.0 - a1_sq)), a1)

    @property
    def p0(self) -> float:
        return abs(self.a0) ** 2

    @property
    def p1(self) -> float:
        return abs(self.a1) ** 2


@dataclass(frozen=True, eq=False)
class SectorState:
    """Apparatus state in one incident-particle sector.

    With ``orbit`` set the amplitudes are indexed by orbit members (fast
    path); with ``orbit=None`` they span all ``2**n`` patterns, indexed by
    the packed pattern integer (dense path).
    """

    amplitudes: np.ndarray
    n: int
    orbit: OrbitBasis | None = None

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        expected = self.orbit.period if self.orbit is not None else 1 << self.n
        if amps.shape != (expected,):
            raise ValueError(f"expected {expected} amplitudes, got shape {amps.shape}")
        if self.orbit is not None and self.orbit.n != self.n:
            raise ValueError("orbit length differs from sector size")
        norm = float(np.linalg.norm(amps))
        if norm != 0.0 and abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"sector state norm {norm!r} is neither 0 nor 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def is_dense(self) -> bool:
        return self.orbit is None

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def basis(cls, p: Pattern, dense: bool = False) -> "SectorState":
        if dense:
            amps = np.zeros(1 << p.n, dtype=complex)
            amps[p.bits] = 1.0
            return cls(amps, p.n)
        ob = orbit(p)
        amps = np.zeros(ob.period, dtype=complex)
        amps[0] = 1.0
        return cls(amps, p.n, ob)

    def to_dense(self) -> "SectorState":
        if self.is_dense:
            return self
        amps = np.zeros(1 << self.n, dtype=complex)
        amps[self.orbit.index_array()] = self.amplitudes
        return SectorState(amps, self.n)


@dataclass(frozen=True, eq=False)
class CombinedState:
    """``a0 psi_0 (x) sector0 + a1 psi_1 (x) sector1``."""

    a0: complex
    a1: complex
    sector0: SectorState
    sector1: SectorState
    n: int = field(init=False)

    def __post_init__(self):
        norm = abs(self.a0) ** 2 + abs(self.a1) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"incident amplitudes not normalised: {norm!r}")
        if self.sector0.n != self.sector1.n:
            raise ValueError("sectors describe apparatuses of different size")
        if self.sector0.is_dense != self.sector1.is_dense:
            raise ValueError("mixed dense/orbit sector representations are not allowed")
        object.__setattr__(self, "n", self.sector0.n)

    @property
    def is_dense(self) -> bool:
        return self.sector0.is_dense

    @classmethod
    def product(cls, v0: IncidentState, p: Pattern, dense: bool = False) -> "CombinedState":
        """``v0 (x) |p>``: both sectors hold the apparatus basis state ``p``."""
        s = SectorState.basis(p, dense=dense)
        return cls(v0.a0, v0.a1, s, s)

    def norm(self) -> float:
        return math.sqrt(
            abs(self.a0) ** 2 * self.sector0.norm() ** 2
            + abs(self.a1) ** 2 * self.sector1.norm() ** 2
        )

    def to_dense(self) -> "CombinedState":
        return CombinedState(self.a0, self.a1, self.sector0.to_dense(), self.sector1.to_dense())


def perturb_pattern(p: Pattern, defects: int, rng: np.random.Generator) -> Pattern:
    """Flip ``defects`` distinct, randomly chosen particles of ``p``."""
    if not 0 <= defects <= p.n:
        raise ValueError(f"cannot flip {defects} of {p.n} particles")
    flips = 0
    for j in rng.choice(p.n, size=defects, replace=False):
        flips |= 1 << (p.n - 1 - int(j))
    return Pattern(p.bits ^ flips, p.n)

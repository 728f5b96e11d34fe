"""The cocked set and the pointer observable ``f_n``.

"Negligible" is made concrete by a per-half defect budget ``floor(n**alpha)``:
a pattern is cocked when at most that many of the first ``n // 2`` particles
read 0 and at most that many of the remaining particles read 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .core import (
    ApparatusSpec,
    CombinedState,
    OrbitBasis,
    Pattern,
    SectorState,
    make_cocked_pattern,
)

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class CockedPolicy:
    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    def budget(self, n: int) -> int:
        """Allowed defects per half, ``floor(n**alpha)``; must stay below ``n/2``."""
        if self.alpha == 0.5:
            b = math.isqrt(n)
        else:
            # guard against n**alpha landing just under an integer
            b = math.floor(n ** self.alpha + 1e-9)
        if 2 * b >= n:
            raise ValueError(
                f"defect budget {b} is not below n/2 for n = {n}, alpha = {self.alpha}"
            )
        return b

    def reference(self, n: int) -> Pattern:
        return make_cocked_pattern(n)


@dataclass(frozen=True)
class CockedMembership:
    pattern: Pattern
    first_half_defects: int
    second_half_defects: int
    is_member: bool


def _half_masks(n: int) -> tuple[int, int]:
    h = n // 2
    first = ((1 << h) - 1) << (n - h)
    return first, ((1 << n) - 1) ^ first


def is_cocked(p: Pattern, policy: CockedPolicy, n: int | None = None) -> CockedMembership:
    if n is not None and n != p.n:
        raise ValueError(f"pattern length {p.n} does not match apparatus size {n}")
    b = policy.budget(p.n)
    first, second = _half_masks(p.n)
    mismatch = p.bits ^ policy.reference(p.n).bits
    d1 = (mismatch & first).bit_count()
    d2 = (mismatch & second).bit_count()
    return CockedMembership(p, d1, d2, d1 <= b and d2 <= b)


def rotation_defects(p: Pattern) -> tuple[np.ndarray, np.ndarray]:
    """Per-half defect counts of ``shift^m(p)`` for every ``m = 0..n-1``.

    Rotation ``m`` places ``p[(j - m) mod n]`` at position ``j``, so the ones
    landing in the first half are a cyclic window sum of ``p``; all ``n``
    windows come from one prefix sum.
    """
    n = p.n
    h = n // 2
    bits = p.to_array().astype(np.int64)
    prefix = np.concatenate(([0], np.cumsum(np.concatenate((bits, bits)))))
    m = np.arange(n)
    start = (n - m) % n
    ones_first = prefix[start + h] - prefix[start]
    return h - ones_first, p.popcount() - ones_first


def cocked_rotation_mask(p: Pattern, policy: CockedPolicy) -> np.ndarray:
    """Boolean mask over ``m = 0..n-1``: is ``shift^m(p)`` cocked?"""
    b = policy.budget(p.n)
    d1, d2 = rotation_defects(p)
    return (d1 <= b) & (d2 <= b)


@lru_cache(maxsize=64)
def cocked_members(ob: OrbitBasis, policy: CockedPolicy) -> np.ndarray:
    """Indices ``j < period`` of the orbit members lying in the cocked set."""
    mask = cocked_rotation_mask(ob.representative, policy)[: ob.period]
    idx = np.flatnonzero(mask)
    idx.setflags(write=False)
    return idx


def cocked_shift_count(spec: ApparatusSpec, policy: CockedPolicy) -> int:
    """``kappa_n``: how many of the ``n`` rotations of the cocked pattern stay cocked."""
    return int(cocked_rotation_mask(make_cocked_pattern(spec.n), policy).sum())


@lru_cache(maxsize=8)
def dense_cocked_mask(n: int, policy: CockedPolicy) -> np.ndarray:
    mask = np.array([is_cocked(Pattern(x, n), policy).is_member for x in range(1 << n)])
    mask.setflags(write=False)
    return mask


def sector_cocked_mass(state: SectorState, policy: CockedPolicy) -> float:
    probs = np.abs(state.amplitudes) ** 2
    if state.is_dense:
        return float(probs[dense_cocked_mask(state.n, policy)].sum())
    return float(probs[cocked_members(state.orbit, policy)].sum())


def f_n(cs: CombinedState, policy: CockedPolicy) -> float:
    """Pointer observable: one minus the amplitude mass on cocked basis vectors.

    The cocked set constrains apparatus bits only, so both incident sectors
    contribute.
    """
    norm = cs.norm()
    if abs(norm - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"f_n needs a normalised state, got norm {norm!r}")
    mass = abs(cs.a0) ** 2 * sector_cocked_mass(cs.sector0, policy)
    mass += abs(cs.a1) ** 2 * sector_cocked_mass(cs.sector1, policy)
    return min(1.0, max(0.0, 1.0 - mass))


# Macroscopicity diagnostics on product states ---------------------------------
#
# A product state is described by a prefix vector over the incident particle and
# the first ``n_o`` apparatus sites (length ``2**(n_o + 1)``, incident bit most
# significant) and a tail array of single-site states, shape ``(n, 2)``.

ProductFamily = Callable[[np.ndarray, int, np.ndarray], float]


def _poisson_binomial_cdf(p: np.ndarray, upto: int) -> np.ndarray:
    """``P(#successes <= k)`` for ``k = 0..upto`` with independent success probs ``p``."""
    # mass above ``upto`` is dropped; it never flows back below
    pmf = np.zeros(upto + 1)
    pmf[0] = 1.0
    for q in p:
        pmf = pmf * (1.0 - q) + np.concatenate(([0.0], pmf[:-1])) * q
    return np.cumsum(pmf)


def _split_prefix(prefix: np.ndarray, n_o: int) -> tuple[np.ndarray, np.ndarray]:
    """Probability of each apparatus prefix configuration (incident bit summed out)."""
    probs = np.abs(np.asarray(prefix, dtype=complex)) ** 2
    probs = probs.reshape(2, 1 << n_o).sum(axis=0)
    return probs, np.arange(1 << n_o)


def pointer_family(policy: CockedPolicy) -> ProductFamily:
    """The pointer observable ``f_N`` (``N = n_o + n``) evaluated on product states."""

    def value(prefix: np.ndarray, n_o: int, tail: np.ndarray) -> float:
        big_n = n_o + len(tail)
        h = big_n // 2
        b = policy.budget(big_n)
        p_one = np.abs(tail[:, 1]) ** 2
        positions = np.arange(n_o + 1, big_n + 1)
        # defect = 0 in the first half, 1 in the second half
        first = positions <= h
        q_first = 1.0 - p_one[first]
        q_second = p_one[~first]
        probs, configs = _split_prefix(prefix, n_o)
        cdf_first = _poisson_binomial_cdf(q_first, b)
        cdf_second = _poisson_binomial_cdf(q_second, b)
        mass = 0.0
        for prob, c in zip(probs, configs):
            if prob == 0.0:
                continue
            d1 = d2 = 0
            for j in range(1, n_o + 1):
                bit = (c >> (n_o - j)) & 1
                if j <= h:
                    d1 += bit == 0
                else:
                    d2 += bit == 1
            if d1 <= b and d2 <= b:
                mass += prob * cdf_first[b - d1] * cdf_second[b - d2]
        return 1.0 - mass

    return value


def constant_family(c: float) -> ProductFamily:
    return lambda prefix, n_o, tail: float(c)


def first_bit_family() -> ProductFamily:
    """Amplitude mass on patterns whose first apparatus bit is 1 (a local observable)."""

    def value(prefix: np.ndarray, n_o: int, tail: np.ndarray) -> float:
        if n_o == 0:
            return float(abs(tail[0, 1]) ** 2)
        probs, configs = _split_prefix(prefix, n_o)
        return float(probs[(configs >> (n_o - 1)) & 1 == 1].sum())

    return value


@dataclass(frozen=True)
class MacroscopicityReport:
    """Sampled prefix-independence diagnostic.  Heuristic: not a proof."""

    sizes: tuple[int, ...]
    estimates: np.ndarray  # shape (len(sizes), trials)
    prefix_lengths: tuple[int, ...]
    tol: float
    label: str = "heuristic"

    @property
    def spreads(self) -> np.ndarray:
        return self.estimates.max(axis=1) - self.estimates.min(axis=1)

    @property
    def passed(self) -> bool:
        return bool(self.spreads[-1] < self.tol)


def random_single_site_states(rng: np.random.Generator, count: int) -> np.ndarray:
    v = rng.normal(size=(count, 2)) + 1j * rng.normal(size=(count, 2))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def macroscopicity_check(
    family: ProductFamily,
    sizes: Sequence[int],
    trials: int,
    tol: float,
    rng: np.random.Generator,
    max_prefix: int = 3,
    tail: np.ndarray | None = None,
) -> MacroscopicityReport:
    """Evaluate ``family`` on ``v_o (x) v_{n_o+1} (x) ... (x) v_{n_o+n}`` for random prefixes.

    One tail sequence ``v_1, v_2, ...`` is drawn (or supplied) and shared by
    all prefixes; each trial draws ``n_o`` in ``0..max_prefix`` and a random
    ``v_o``.  The spread across trials at the largest size decides PASS.
    """
    if trials < 2:
        raise ValueError("need at least two prefix trials to measure a spread")
    sizes = tuple(sorted(sizes))
    longest = sizes[-1] + max_prefix
    if tail is None:
        tail = random_single_site_states(rng, longest)
    elif len(tail) < longest:
        raise ValueError(f"tail sequence needs at least {longest} sites")
    prefixes = []
    for _ in range(trials):
        n_o = int(rng.integers(0, max_prefix + 1))
        v = rng.normal(size=1 << (n_o + 1)) + 1j * rng.normal(size=1 << (n_o + 1))
        prefixes.append((n_o, v / np.linalg.norm(v)))
    estimates = np.empty((len(sizes), trials))
    for i, n in enumerate(sizes):
        for j, (n_o, v) in enumerate(prefixes):
            # tail sites are indexed absolutely: v_{n_o+1} .. v_{n_o+n}
            estimates[i, j] = family(v, n_o, tail[n_o : n_o + n])
    return MacroscopicityReport(sizes, estimates, tuple(n_o for n_o, _ in prefixes), tol)

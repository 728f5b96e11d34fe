"""Exact time evolution of the apparatus.

On an orbit of period ``l`` the shift is diagonalised by the discrete
Fourier transform.  Fourier component ``k`` (numpy's forward convention)
picks up the phase ``exp(-2 pi i k (n/l) t)``, so ``t = 1/n`` is exactly one
shift and the evolution has period 1.  The matching energies are
``k (n/l) h_n`` with ``h_n = h0 / n``.

Times may be given as :class:`fractions.Fraction` to get phases reduced
modulo 1 in exact integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.linalg

from .core import ApparatusSpec, CombinedState, OrbitBasis, Pattern, SectorState, orbit

DENSE_CAP = 12

Time = float | Fraction


def _frequencies(ob: OrbitBasis) -> np.ndarray:
    """Integer frequencies ``k * (n / l)`` of the orbit's Fourier modes."""
    return np.arange(ob.period, dtype=np.int64) * (ob.n // ob.period)


def eigenphases(ob: OrbitBasis, t: Time) -> np.ndarray:
    q = _frequencies(ob)
    if isinstance(t, Fraction):
        num, den = t.numerator % t.denominator, t.denominator
        frac = (q * num % den) / den
    else:
        frac = np.mod(q * np.mod(float(t), 1.0), 1.0)
    return np.exp(-2j * np.pi * frac)


def orbit_energies(ob: OrbitBasis, spec: ApparatusSpec) -> np.ndarray:
    return _frequencies(ob) * spec.h_n


@dataclass(frozen=True)
class OrbitPropagator:
    """Evolution restricted to one orbit, diagonal in its Fourier basis."""

    orbit: OrbitBasis
    spec: ApparatusSpec

    def __post_init__(self):
        if self.orbit.n != self.spec.n:
            raise ValueError("orbit length differs from the apparatus size")

    @property
    def energies(self) -> np.ndarray:
        return orbit_energies(self.orbit, self.spec)

    def apply(self, amplitudes: np.ndarray, t: Time) -> np.ndarray:
        spectrum = np.fft.fft(amplitudes)
        return np.fft.ifft(spectrum * eigenphases(self.orbit, t))


def evolve_orbit(state: SectorState, t: Time) -> SectorState:
    if state.is_dense:
        raise ValueError("evolve_orbit needs an orbit-supported state")
    amps = OrbitPropagator(state.orbit, ApparatusSpec(state.n)).apply(state.amplitudes, t)
    return SectorState(amps, state.n, state.orbit)


@dataclass(frozen=True, eq=False)
class DenseHamiltonian:
    """The apparatus Hamiltonian on all ``2**n`` patterns (oracle only)."""

    spec: ApparatusSpec
    matrix: np.ndarray
    orbits: tuple[OrbitBasis, ...]
    _eig: list = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return self.spec.n

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def block(self, ob: OrbitBasis) -> np.ndarray:
        idx = ob.index_array()
        return self.matrix[np.ix_(idx, idx)]

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        # generic Hermitian solver; knows nothing about the orbit structure
        if not self._eig:
            self._eig.append(scipy.linalg.eigh(self.matrix))
        return self._eig[0]

    def propagator(self, t: float) -> np.ndarray:
        w, v = self.eigh()
        phases = np.exp(-2j * np.pi * (w / self.spec.h_n) * float(t))
        return (v * phases) @ v.conj().T


def unitary_dft(size: int) -> np.ndarray:
    j = np.arange(size)
    return np.exp(-2j * np.pi * np.outer(j, j) / size) / np.sqrt(size)


@lru_cache(maxsize=8)
def build_dense_hamiltonian(spec: ApparatusSpec, cap: int = DENSE_CAP) -> DenseHamiltonian:
    n = spec.n
    if n > cap:
        raise ValueError(f"dense Hamiltonian refused for n = {n}: above the cap of {cap}")
    dim = 1 << n
    matrix = np.zeros((dim, dim), dtype=complex)
    seen = np.zeros(dim, dtype=bool)
    orbits = []
    for x in range(dim):
        if seen[x]:
            continue
        ob = orbit(Pattern(x, n))
        idx = ob.index_array()
        seen[idx] = True
        orbits.append(ob)
        f = unitary_dft(ob.period)
        matrix[np.ix_(idx, idx)] = f.conj().T @ np.diag(orbit_energies(ob, spec)) @ f
    return DenseHamiltonian(spec, matrix, tuple(orbits))


def evolve_dense(state: SectorState, t: Time, hamiltonian: DenseHamiltonian) -> SectorState:
    if not state.is_dense:
        raise ValueError("evolve_dense needs a dense state")
    if state.n != hamiltonian.n:
        raise ValueError(f"dimension mismatch: state n={state.n}, Hamiltonian n={hamiltonian.n}")
    w, v = hamiltonian.eigh()
    phases = np.exp(-2j * np.pi * (w / hamiltonian.spec.h_n) * float(t))
    amps = v @ (phases * (v.conj().T @ state.amplitudes))
    return SectorState(amps, state.n)


def evolve_combined(
    cs: CombinedState, t: Time, hamiltonian: DenseHamiltonian | None = None
) -> CombinedState:
    """Evolve the joint system; the particle-absent sector is frozen."""
    if cs.is_dense:
        if hamiltonian is None:
            hamiltonian = build_dense_hamiltonian(ApparatusSpec(cs.n))
        sector1 = evolve_dense(cs.sector1, t, hamiltonian)
    else:
        sector1 = evolve_orbit(cs.sector1, t)
    return CombinedState(cs.a0, cs.a1, cs.sector0, sector1)

"""Dense-oracle validation suite for small apparatus sizes."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from ..core import (
    ApparatusSpec,
    CombinedState,
    OrbitBasis,
    Pattern,
    SectorState,
    count_orbits,
    fermat_orbit_count,
    make_cocked_pattern,
    orbit,
)
from ..dynamics import (
    DENSE_CAP,
    build_dense_hamiltonian,
    evolve_dense,
    evolve_orbit,
    orbit_energies,
)
from ..observable import CockedPolicy, f_n

Evolve = Callable[[SectorState, float | Fraction], SectorState]

TOLERANCES = {
    "orbit_count": 0.0,
    "hermiticity": 1e-12,
    "spectrum": 1e-10,
    "unitarity_fast": 1e-12,
    "unitarity_dense": 1e-12,
    "shift_exactness": 1e-20,
    "periodicity": 1e-12,
    "path_equivalence": 1e-10,
    "f_n_fast_dense": 1e-10,
}


@dataclass(frozen=True)
class CheckResult:
    check: str
    n: int
    value: float
    tolerance: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)


def random_orbit_state(ob: OrbitBasis, rng: np.random.Generator) -> SectorState:
    v = rng.normal(size=ob.period) + 1j * rng.normal(size=ob.period)
    return SectorState(v / np.linalg.norm(v), ob.n, ob)


def random_pattern(n: int, rng: np.random.Generator) -> Pattern:
    return Pattern.from_bits(rng.integers(0, 2, size=n))


def _orbit_count_check(n: int) -> float:
    counted = count_orbits(n, method="enumerate")
    expected = fermat_orbit_count(n) if n > 2 and ApparatusSpec(n).prime_flag else count_orbits(n, "burnside")
    return float(abs(counted - expected))


def validate_size(
    n: int,
    policy: CockedPolicy,
    rng: np.random.Generator,
    evolve: Evolve = evolve_orbit,
    times: int = 20,
    amplitudes: int = 10,
) -> list[CheckResult]:
    if n > DENSE_CAP:
        raise ValueError(f"validation needs the dense oracle; n = {n} is above the cap {DENSE_CAP}")
    spec = ApparatusSpec(n)
    ham = build_dense_hamiltonian(spec)
    cocked_orbit = orbit(make_cocked_pattern(n))
    orbits = [cocked_orbit, orbit(random_pattern(n, rng))]
    out = [CheckResult("orbit_count", n, _orbit_count_check(n), TOLERANCES["orbit_count"])]
    out.append(CheckResult("hermiticity", n, ham.hermiticity_error(), TOLERANCES["hermiticity"]))

    spectrum_err = 0.0
    for ob in ham.orbits:
        if ob.period == n:
            w = np.linalg.eigvalsh(ham.block(ob))
            spectrum_err = max(spectrum_err, float(np.max(np.abs(w - orbit_energies(ob, spec)))))
    out.append(CheckResult("spectrum", n, spectrum_err, TOLERANCES["spectrum"]))

    t_samples = rng.uniform(-3.0, 3.0, size=times)
    unit_fast = unit_dense = periodic = equiv = 0.0
    for ob in orbits:
        for t in t_samples:
            state = random_orbit_state(ob, rng)
            fast = evolve(state, t)
            dense = evolve_dense(state.to_dense(), t, ham)
            unit_fast = max(unit_fast, abs(fast.norm() - 1.0))
            unit_dense = max(unit_dense, abs(dense.norm() - 1.0))
            later = evolve(state, t + 1.0)
            periodic = max(periodic, float(np.max(np.abs(later.amplitudes - fast.amplitudes))))
            equiv = max(equiv, float(np.max(np.abs(fast.to_dense().amplitudes - dense.amplitudes))))
    out += [
        CheckResult("unitarity_fast", n, unit_fast, TOLERANCES["unitarity_fast"]),
        CheckResult("unitarity_dense", n, unit_dense, TOLERANCES["unitarity_dense"]),
        CheckResult("periodicity", n, periodic, TOLERANCES["periodicity"]),
        CheckResult("path_equivalence", n, equiv, TOLERANCES["path_equivalence"]),
    ]

    off_mass = 0.0
    start = SectorState.basis(cocked_orbit.representative)
    for m in sorted({1, 2, n - 1}):
        moved = evolve(start, Fraction(m, n))
        probs = np.abs(moved.amplitudes) ** 2
        off_mass = max(off_mass, float(np.delete(probs, m % cocked_orbit.period).sum()))
    out.append(CheckResult("shift_exactness", n, off_mass, TOLERANCES["shift_exactness"]))

    f_err = 0.0
    for _ in range(amplitudes):
        a = rng.normal(size=2) + 1j * rng.normal(size=2)
        a /= np.linalg.norm(a)
        s0 = random_orbit_state(orbits[1], rng)
        s1 = random_orbit_state(cocked_orbit, rng)
        for t in t_samples:
            fast = CombinedState(a[0], a[1], s0, evolve(s1, t))
            dense = CombinedState(a[0], a[1], s0.to_dense(), evolve_dense(s1.to_dense(), t, ham))
            f_err = max(f_err, abs(f_n(fast, policy) - f_n(dense, policy)))
    out.append(CheckResult("f_n_fast_dense", n, f_err, TOLERANCES["f_n_fast_dense"]))
    return out

"""Acceptance suite.  Each criterion prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` or ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from minglab.averaging import time_average_quadrature, time_variance_scan, trajectory
from minglab.cli import main
from minglab.core import (
    ApparatusSpec,
    CombinedState,
    IncidentState,
    Pattern,
    SectorState,
    count_orbits,
    make_cocked_pattern,
    orbit,
)
from minglab.dynamics import build_dense_hamiltonian, evolve_combined, evolve_orbit
from minglab.limit import LimitFit, extrapolate_limit
from minglab.observable import CockedPolicy, f_n

POLICY = CockedPolicy(0.5)


def report(number, title, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})")
    assert ok, f"criterion {number} failed: {detail}"


@pytest.fixture(scope="module")
def sweep_1e2_to_1e5():
    v0 = IncidentState.from_probability(0.36)
    start = time.perf_counter()
    scan = time_variance_scan([ApparatusSpec(10**k) for k in range(2, 6)], POLICY, v0)
    return scan, time.perf_counter() - start


def test_criterion_01_limit_reproduction():
    v0 = IncidentState.from_probability(0.36)
    start = time.perf_counter()
    worst, samples = 0.0, []
    for n in (101, 1009, 10007):
        avg = time_average_quadrature(ApparatusSpec(n), POLICY, v0)
        worst = max(worst, abs(avg.mean - 0.36 * (1 - avg.kappa / n)))
        samples.append((n, avg.mean, avg.kappa))
    est = extrapolate_limit(LimitFit.from_samples(samples))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-10 and abs(est.L_hat - 0.36) < 1e-8 and elapsed < 60
    report(1, "limit reproduction", ok, f"max point error {worst:.2e}, L_hat {est.L_hat:.12f}, {elapsed:.1f}s")


def test_criterion_02_monotone_convergence(sweep_1e2_to_1e5):
    scan, elapsed = sweep_1e2_to_1e5
    devs = [abs(r.mean - 0.36) for r in scan]
    law = max(abs(d - 0.36 * r.kappa / r.n) for d, r in zip(devs, scan))
    ok = all(a > b for a, b in zip(devs, devs[1:])) and law < 1e-10 and elapsed < 300
    report(2, "monotone convergence", ok, f"deviations {['%.4g' % d for d in devs]}, {elapsed:.1f}s")


def _random_state(ob, rng):
    v = rng.normal(size=ob.period) + 1j * rng.normal(size=ob.period)
    return SectorState(v / np.linalg.norm(v), ob.n, ob)


def test_criterion_03_dense_equivalence():
    rng = np.random.default_rng(2024)
    worst_f = worst_mean = 0.0
    for n in (3, 5, 7, 11):
        h = build_dense_hamiltonian(ApparatusSpec(n))
        cocked = orbit(make_cocked_pattern(n))
        times = rng.uniform(0.0, 1.0, size=20)
        for _ in range(10):
            a = rng.normal(size=2) + 1j * rng.normal(size=2)
            a /= np.linalg.norm(a)
            s0 = _random_state(orbit(Pattern.from_bits(rng.integers(0, 2, size=n))), rng)
            cs = CombinedState(a[0], a[1], s0, _random_state(cocked, rng))
            dense = cs.to_dense()
            for t in times:
                fast = f_n(evolve_combined(cs, t), POLICY)
                slow = f_n(evolve_combined(dense, t, h), POLICY)
                worst_f = max(worst_f, abs(fast - slow))
            v0 = IncidentState(a[0], a[1])
            spec = ApparatusSpec(n)
            q_fast = time_average_quadrature(spec, POLICY, v0)
            q_dense = time_average_quadrature(spec, POLICY, v0, path="dense")
            worst_mean = max(worst_mean, abs(q_fast.mean - q_dense.mean))
    ok = worst_f < 1e-10 and worst_mean < 1e-10
    report(3, "dense-oracle equivalence", ok, f"f_n gap {worst_f:.2e}, mean gap {worst_mean:.2e}")


def test_criterion_04_shift_exactness():
    worst = on_target = 0.0
    for n in (5, 7, 101):
        start = SectorState.basis(make_cocked_pattern(n))
        for m in (1, 2, n - 1):
            probs = np.abs(evolve_orbit(start, Fraction(m, n)).amplitudes) ** 2
            worst = max(worst, float(np.delete(probs, m).sum()))
            on_target = max(on_target, abs(1.0 - probs[m]))
    ok = worst < 1e-20 and on_target < 1e-12
    report(4, "shift exactness", ok, f"max off-pattern mass {worst:.2e}, target error {on_target:.2e}")


def test_criterion_05_spectrum():
    worst = 0.0
    for n in (5, 7):
        spec = ApparatusSpec(n)
        h = build_dense_hamiltonian(spec)
        for ob in h.orbits:
            if ob.period == n:
                w = np.linalg.eigvalsh(h.block(ob))
                worst = max(worst, float(np.max(np.abs(w - np.arange(n) * spec.h_n))))
    report(5, "spectrum on full orbits", worst < 1e-10, f"max eigenvalue error {worst:.2e}")


def test_criterion_06_orbit_identity():
    got = {n: count_orbits(n, method="enumerate") for n in (2, 3, 5, 7, 11, 13)}
    ok = got[2] == 3 and all(got[p] == 2 + (2**p - 2) // p for p in (3, 5, 7, 11, 13))
    report(6, "orbit-count identity", ok, f"counts {got}")


def test_criterion_07_trivial_sector():
    v0 = IncidentState(1.0, 0.0)
    worst = 0.0
    for n in (5, 11, 101, 1009):
        spec = ApparatusSpec(n)
        f = trajectory(spec, POLICY, v0, [Fraction(j, 2 * n + 1) for j in range(2 * n + 1)])
        avg = time_average_quadrature(spec, POLICY, v0)
        worst = max(worst, float(np.max(np.abs(f))), abs(avg.mean), abs(avg.variance))
    report(7, "trivial sector", worst == 0.0, f"max |value| {worst:.2e}")


def test_criterion_08_quadrature_doubling():
    v0 = IncidentState.from_probability(0.36)
    worst = 0.0
    for n in (11, 101):
        spec = ApparatusSpec(n)
        for M in (2 * n + 1, 3 * n):
            a = time_average_quadrature(spec, POLICY, v0, M)
            b = time_average_quadrature(spec, POLICY, v0, 2 * M)
            worst = max(worst, abs(a.mean - b.mean))
    report(8, "quadrature doubling", worst < 1e-11, f"max mean change {worst:.2e}")


def test_criterion_09_noise_trend(sweep_1e2_to_1e5):
    scan, _ = sweep_1e2_to_1e5
    devs = [abs(r.mean - 0.36) for r in scan]
    variances = [r.variance for r in scan]
    ok = all(a > b for a, b in zip(devs, devs[1:])) and all(math.isfinite(v) for v in variances)
    report(9, "noise trend", ok, f"variances {['%.4g' % v for v in variances]}")


def test_criterion_10_determinism(tmp_path):
    runs = [
        ["average", "--n", "101", "1009", "--a1-sq", "0.36", "--defects", "3", "--seed", "7"],
        ["macro-check", "--n", "30", "100", "--seed", "7", "--trials", "4"],
        ["validate", "--n", "5", "--seed", "7"],
    ]
    same = True
    for i, args in enumerate(runs):
        a, b = tmp_path / f"{i}a.csv", tmp_path / f"{i}b.csv"
        codes = main(args + ["--output", str(a)]), main(args + ["--output", str(b)])
        same &= codes == (0, 0) and a.read_bytes() == b.read_bytes()
    report(10, "determinism", same, f"{len(runs)} commands compared byte for byte")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-s", "-q"]))

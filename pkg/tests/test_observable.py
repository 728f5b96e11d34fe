from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minglab.core import (
    ApparatusSpec,
    CombinedState,
    IncidentState,
    Pattern,
    SectorState,
    make_cocked_pattern,
    orbit,
)
from minglab.dynamics import build_dense_hamiltonian, evolve_combined
from minglab.observable import (
    CockedPolicy,
    cocked_rotation_mask,
    cocked_shift_count,
    constant_family,
    f_n,
    first_bit_family,
    is_cocked,
    macroscopicity_check,
    pointer_family,
    random_single_site_states,
)


def string_defects(s: str) -> tuple[int, int]:
    h = len(s) // 2
    return s[:h].count("0"), s[h:].count("1")


def brute_kappa(n: int, alpha: float) -> int:
    """Rotate the cocked string by hand and count defects per half."""
    b = int(np.floor(n**alpha + 1e-9))
    s = "1" * (n // 2) + "0" * (n - n // 2)
    count = 0
    for _ in range(n):
        d1, d2 = string_defects(s)
        count += d1 <= b and d2 <= b
        s = s[-1] + s[:-1]
    return count


def random_orbit_state(ob, rng):
    v = rng.normal(size=ob.period) + 1j * rng.normal(size=ob.period)
    return SectorState(v / np.linalg.norm(v), ob.n, ob)


class TestPolicy:
    def test_budget(self):
        pol = CockedPolicy()
        assert pol.budget(25) == 5 and pol.budget(101) == 10 and pol.budget(10**4) == 100
        assert CockedPolicy(1 / 3).budget(1000) == 10

    def test_budget_must_be_sublinear_at_n(self):
        with pytest.raises(ValueError):
            CockedPolicy().budget(4)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2])
    def test_alpha_range(self, alpha):
        with pytest.raises(ValueError):
            CockedPolicy(alpha)


class TestIsCocked:
    def test_reference_is_member(self):
        m = is_cocked(make_cocked_pattern(25), CockedPolicy())
        assert m.is_member and m.first_half_defects == m.second_half_defects == 0

    def test_all_zeros(self):
        m = is_cocked(Pattern(0, 25), CockedPolicy())
        assert m.first_half_defects == 12 and m.second_half_defects == 0
        assert not m.is_member

    def test_single_flip(self):
        p = make_cocked_pattern(25)
        m = is_cocked(Pattern(p.bits ^ 1, 25), CockedPolicy())
        assert m.is_member and m.second_half_defects == 1

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            is_cocked(make_cocked_pattern(25), CockedPolicy(), n=26)

    @settings(max_examples=200)
    @given(st.integers(5, 60).flatmap(lambda n: st.integers(0, (1 << n) - 1).map(lambda x: Pattern(x, n))))
    def test_matches_string_count(self, p):
        pol = CockedPolicy()
        d1, d2 = string_defects(str(p))
        m = is_cocked(p, pol)
        b = pol.budget(p.n)
        assert (m.first_half_defects, m.second_half_defects) == (d1, d2)
        assert m.is_member == (d1 <= b and d2 <= b)

    @given(st.integers(20, 80), st.data())
    def test_alpha_monotone(self, n, data):
        p = Pattern(data.draw(st.integers(0, (1 << n) - 1)), n)
        lo, hi = sorted(data.draw(st.lists(st.floats(0.05, 0.6), min_size=2, max_size=2)))
        assert not is_cocked(p, CockedPolicy(lo)).is_member or is_cocked(p, CockedPolicy(hi)).is_member


class TestKappa:
    def test_bounds(self):
        for n in (5, 11, 25, 64, 101):
            k = cocked_shift_count(ApparatusSpec(n), CockedPolicy())
            assert 1 <= k <= n

    def test_frozen_values(self):
        # brute_kappa(25, .5) == 11, brute_kappa(11, .5) == 7, brute_kappa(101, .5) == 21
        pol = CockedPolicy()
        assert cocked_shift_count(ApparatusSpec(25), pol) == 11
        assert cocked_shift_count(ApparatusSpec(11), pol) == 7
        assert cocked_shift_count(ApparatusSpec(101), pol) == 21

    @pytest.mark.parametrize("n", [5, 6, 11, 25, 30, 101, 256, 1000])
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
    def test_matches_brute_force(self, n, alpha):
        if 2 * int(np.floor(n**alpha + 1e-9)) >= n:
            pytest.skip("budget not sublinear at this size")
        assert cocked_shift_count(ApparatusSpec(n), CockedPolicy(alpha)) == brute_kappa(n, alpha)

    @given(st.integers(10, 200), st.integers(0, 2**64 - 1))
    def test_rotation_mask_matches_packed_scan(self, n, seed):
        rng = np.random.default_rng(seed)
        p = Pattern.from_bits(rng.integers(0, 2, size=n))
        pol = CockedPolicy()
        scan = [is_cocked(p.rotate(m), pol).is_member for m in range(n)]
        assert list(cocked_rotation_mask(p, pol)) == scan

    def test_kappa_fraction_decreases(self):
        pol = CockedPolicy()
        ratios = [cocked_shift_count(ApparatusSpec(n), pol) / n for n in (10**2, 10**3, 10**4, 10**5)]
        assert all(a > b for a, b in zip(ratios, ratios[1:]))


class TestPointer:
    def test_initial_state_is_zero(self):
        cs = CombinedState.product(IncidentState.from_probability(0.3), make_cocked_pattern(25))
        assert f_n(cs, CockedPolicy()) == 0.0

    def test_quarter_rotation_is_detected(self):
        n = 101
        cs = CombinedState.product(IncidentState(0.0, 1.0), make_cocked_pattern(n))
        out = evolve_combined(cs, Fraction(n // 4, n))
        assert f_n(out, CockedPolicy()) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("n", [5, 7, 11])
    def test_fast_equals_dense(self, n):
        rng = np.random.default_rng(n)
        pol = CockedPolicy()
        h = build_dense_hamiltonian(ApparatusSpec(n))
        for _ in range(10):
            a = rng.normal(size=2) + 1j * rng.normal(size=2)
            a /= np.linalg.norm(a)
            s0 = random_orbit_state(orbit(Pattern.from_bits(rng.integers(0, 2, size=n))), rng)
            s1 = random_orbit_state(orbit(make_cocked_pattern(n)), rng)
            cs = CombinedState(a[0], a[1], s0, s1)
            t = float(rng.uniform(0, 1))
            fast = f_n(evolve_combined(cs, t), pol)
            dense = f_n(evolve_combined(cs.to_dense(), t, h), pol)
            assert abs(fast - dense) < 1e-10

    def test_range_and_phase_invariance(self):
        rng = np.random.default_rng(5)
        pol = CockedPolicy()
        ob = orbit(make_cocked_pattern(31))
        for _ in range(50):
            s = random_orbit_state(ob, rng)
            a = rng.normal(size=2) + 1j * rng.normal(size=2)
            a /= np.linalg.norm(a)
            cs = CombinedState(a[0], a[1], s, s)
            v = f_n(cs, pol)
            assert -1e-12 <= v <= 1 + 1e-12
            phased = SectorState(s.amplitudes * np.exp(1j * rng.uniform(0, 6, size=31)), 31, ob)
            cs2 = CombinedState(a[0] * 1j, -a[1], phased, s)
            assert abs(f_n(cs2, pol) - v) < 1e-12

    def test_non_increasing_in_alpha(self):
        rng = np.random.default_rng(6)
        ob = orbit(make_cocked_pattern(200))
        s = random_orbit_state(ob, rng)
        cs = CombinedState(0.6, 0.8, s, s)
        values = [f_n(cs, CockedPolicy(a)) for a in (0.2, 0.35, 0.5, 0.65, 0.8)]
        assert all(x >= y - 1e-15 for x, y in zip(values, values[1:]))

    def test_absent_particle_stays_zero(self):
        cs = CombinedState.product(IncidentState(1.0, 0.0), make_cocked_pattern(41))
        for t in np.linspace(0, 1, 17):
            assert f_n(evolve_combined(cs, t), CockedPolicy()) == 0.0

    def test_rejects_unnormalised(self):
        s = SectorState.basis(make_cocked_pattern(9))
        empty = SectorState(np.zeros(9), 9, s.orbit)
        with pytest.raises(ValueError):
            f_n(CombinedState(0.0, 1.0, s, empty), CockedPolicy())


def dense_product_pointer(prefix, n_o, tail, policy):
    """Pointer value from the full product vector, membership via is_cocked."""
    vec = np.asarray(prefix, dtype=complex)
    for site in tail:
        vec = np.kron(vec, site)
    big_n = n_o + len(tail)
    probs = np.abs(vec) ** 2
    mask = np.array([is_cocked(Pattern(x, big_n), policy).is_member for x in range(1 << big_n)])
    return 1.0 - probs.reshape(2, -1)[:, mask].sum()


class TestMacroscopicity:
    @pytest.mark.parametrize("n_o", [0, 1, 2, 3])
    def test_pointer_family_matches_dense(self, n_o):
        rng = np.random.default_rng(n_o)
        pol = CockedPolicy()
        for big_n in (7, 9, 10):
            prefix = rng.normal(size=1 << (n_o + 1)) + 1j * rng.normal(size=1 << (n_o + 1))
            prefix /= np.linalg.norm(prefix)
            tail = random_single_site_states(rng, big_n - n_o)
            got = pointer_family(pol)(prefix, n_o, tail)
            assert abs(got - dense_product_pointer(prefix, n_o, tail, pol)) < 1e-12

    def test_constant_family_passes(self):
        rep = macroscopicity_check(constant_family(0.3), [10, 50, 100], 6, 1e-9, np.random.default_rng(0))
        assert rep.passed and np.all(rep.spreads == 0.0) and rep.label == "heuristic"

    def test_local_family_fails(self):
        rep = macroscopicity_check(first_bit_family(), [10, 50, 100], 12, 1e-3, np.random.default_rng(0))
        assert not rep.passed
        assert rep.spreads[-1] > 0.1

    def test_local_family_depends_on_tail(self):
        fam = first_bit_family()
        prefix = np.array([1.0, 0.0])
        ones = np.tile([0.0, 1.0], (20, 1))
        zeros = np.tile([1.0, 0.0], (20, 1))
        assert fam(prefix, 0, ones) - fam(prefix, 0, zeros) == 1.0

    def test_pointer_family_spread_shrinks(self):
        rep = macroscopicity_check(
            pointer_family(CockedPolicy()), [12, 30, 100, 400], 10, 1e-6, np.random.default_rng(3)
        )
        spreads = rep.spreads
        assert spreads[0] > spreads[-1]
        assert all(a >= b for a, b in zip(spreads, spreads[1:]))
        assert rep.passed

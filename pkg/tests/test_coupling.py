import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critshuffle._backend import HAS_NUMBA
from critshuffle.coupling import (
    couple_binom_poisson,
    couple_multinomial_poisson,
    couple_poisson_poisson,
    enumerate_binom_poisson_joint,
    repair_probability,
)
from critshuffle.distcore import make_binomial, make_poisson

SAMPLES = 50_000


class TestRepairProbability:
    def test_reference_value(self):
        assert repair_probability(0.5) == pytest.approx(0.17563936464994, rel=1e-11)

    @given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
    @settings(max_examples=200, deadline=None)
    def test_in_unit_interval(self, p):
        q = repair_probability(p)
        assert 0.0 <= q <= 1.0

    def test_rejects_endpoints(self):
        for p in (0.0, 1.0):
            with pytest.raises(ValueError):
                repair_probability(p)


class TestBinomPoisson:
    def test_determinism(self):
        a = couple_binom_poisson(20, 0.05, seed=11, n_samples=2000)
        b = couple_binom_poisson(20, 0.05, seed=11, n_samples=2000)
        assert a == b
        c = couple_binom_poisson(20, 0.05, seed=12, n_samples=2000)
        assert c.mismatch_freq != a.mismatch_freq or c.marginal_ks != a.marginal_ks

    def test_mismatch_within_bound(self):
        rep = couple_binom_poisson(50, 0.02, seed=7, n_samples=SAMPLES)
        assert rep.bound == pytest.approx(50 * 0.02 * (1 - math.exp(-0.02)), rel=1e-12)
        assert rep.within_bound

    def test_marginals_by_ks(self):
        rep = couple_binom_poisson(30, 0.04, seed=3, n_samples=SAMPLES)
        # Dvoretzky-Kiefer-Wolfowitz at confidence ~1e-6
        dkw = math.sqrt(math.log(2e6) / (2 * SAMPLES))
        assert rep.marginal_ks[0] <= dkw
        assert rep.marginal_ks[1] <= dkw

    def test_exact_enumeration_small_m(self):
        for m, p in ((2, 0.3), (4, 0.15), (6, 0.05)):
            joint, tail = enumerate_binom_poisson_joint(m, p)
            smarg = {}
            nmarg = {}
            mism = 0.0
            for (s, n), w in joint.items():
                smarg[s] = smarg.get(s, 0.0) + w
                nmarg[n] = nmarg.get(n, 0.0) + w
                if s != n:
                    mism += w
            binom = make_binomial(m, p)
            for k in range(m + 1):
                assert smarg.get(k, 0.0) == pytest.approx(binom.prob(k), abs=1e-12)
            pois = make_poisson(m * p, 1e-15)
            for k in sorted(nmarg):
                assert nmarg[k] == pytest.approx(pois.prob(k), abs=1e-10)
            assert mism <= m * p * (1 - math.exp(-p)) + 1e-12


class TestPoissonPoisson:
    def test_equal_rates_never_mismatch(self):
        rep = couple_poisson_poisson(1.0, 1.0, seed=5, n_samples=10_000)
        assert rep.mismatch_freq == 0.0

    def test_exact_mismatch_probability(self):
        rep = couple_poisson_poisson(1.0, 1.5, seed=5, n_samples=SAMPLES)
        exact = 1 - math.exp(-0.5)
        assert rep.extras["exact_mismatch_prob"] == pytest.approx(exact, rel=1e-12)
        assert abs(rep.mismatch_freq - exact) <= 3 * math.sqrt(exact * (1 - exact) / SAMPLES)

    def test_linear_bound(self):
        for x in (0.1, 0.5, 2.0):
            assert 1 - math.exp(-x) <= x

    def test_order_invariance_of_sides(self):
        a = couple_poisson_poisson(0.5, 2.0, seed=9, n_samples=5000)
        b = couple_poisson_poisson(2.0, 0.5, seed=9, n_samples=5000)
        assert a.mismatch_freq == b.mismatch_freq
        assert a.marginal_ks == tuple(reversed(b.marginal_ks))


class TestMultinomialPoisson:
    def test_single_rare_category_reduces_to_binomial_coupler(self):
        rep1 = couple_binom_poisson(40, 0.03, seed=21, n_samples=20_000)
        rep3 = couple_multinomial_poisson(40, [0.03, 0.97], [0], seed=21,
                                          n_samples=20_000)
        assert rep3.extras["total_mismatch_freq"] == rep1.mismatch_freq
        assert rep3.mismatch_freq == rep1.mismatch_freq

    def test_vector_mismatch_equals_total_mismatch(self):
        rep = couple_multinomial_poisson(
            100, [0.005, 0.005, 0.99], [0, 1], seed=7, n_samples=20_000)
        assert rep.mismatch_freq == rep.extras["total_mismatch_freq"]

    def test_bound_and_marginals(self):
        rep = couple_multinomial_poisson(
            100, [0.005, 0.005, 0.99], [0, 1], seed=7, n_samples=SAMPLES)
        assert rep.bound == pytest.approx(100 * 0.01 * (1 - math.exp(-0.01)), rel=1e-12)
        assert rep.within_bound
        dkw = math.sqrt(math.log(2e6) / (2 * SAMPLES))
        assert max(rep.marginal_ks) <= dkw

    def test_rejects_bad_rare_set(self):
        with pytest.raises(ValueError):
            couple_multinomial_poisson(10, [0.5, 0.5], [0, 1], seed=1, n_samples=10)
        with pytest.raises(ValueError):
            couple_multinomial_poisson(10, [0.5, 0.5], [], seed=1, n_samples=10)


@pytest.mark.skipif(not HAS_NUMBA, reason="needs both backends")
class TestBackendEquivalence:
    def test_reports_identical(self, monkeypatch):
        args = dict(m=25, p=0.04, seed=123, n_samples=4000)
        monkeypatch.setenv("CRITSHUFFLE_BACKEND", "numba")
        fast = couple_binom_poisson(**args)
        monkeypatch.setenv("CRITSHUFFLE_BACKEND", "numpy")
        slow = couple_binom_poisson(**args)
        assert fast == slow

    def test_multinomial_identical(self, monkeypatch):
        args = dict(m=30, probs=[0.01, 0.02, 0.97], rare_set=[0, 1],
                    seed=42, n_samples=3000)
        monkeypatch.setenv("CRITSHUFFLE_BACKEND", "numba")
        fast = couple_multinomial_poisson(**args)
        monkeypatch.setenv("CRITSHUFFLE_BACKEND", "numpy")
        slow = couple_multinomial_poisson(**args)
        assert fast == slow

    def test_poisson_identical(self, monkeypatch):
        monkeypatch.setenv("CRITSHUFFLE_BACKEND", "numba")
        fast = couple_poisson_poisson(0.8, 1.2, seed=6, n_samples=3000)
        monkeypatch.setenv("CRITSHUFFLE_BACKEND", "numpy")
        slow = couple_poisson_poisson(0.8, 1.2, seed=6, n_samples=3000)
        assert fast == slow

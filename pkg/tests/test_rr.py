import math

import numpy as np
import pytest

from critshuffle.distcore import tv_distance
from critshuffle.regimes import ks_standard_normal
from critshuffle.rr import (
    RRConfig,
    canonical_pair,
    composition_pair,
    likelihood_ratio_canonical,
    loglr_law,
    rr_config,
)


class TestConfig:
    def test_canonical_calibration(self):
        cfg = rr_config(100, c=1.0, k=0)
        assert cfg.delta_n == pytest.approx(1 / 101, rel=1e-14)
        assert cfg.a_n == pytest.approx(1.0, rel=1e-12)

    def test_explicit_level(self):
        cfg = rr_config(10, eps0=math.log(10), k=0)
        assert cfg.a_n == pytest.approx(1.0, rel=1e-12)

    def test_pi(self):
        assert rr_config(100, c=1.0, k=50).pi_n == 0.5

    def test_rejects(self):
        with pytest.raises(ValueError):
            rr_config(100, c=1.0, k=100)
        with pytest.raises(ValueError):
            rr_config(100, c=1.0, eps0=1.0)
        with pytest.raises(ValueError):
            rr_config(100)
        with pytest.raises(ValueError):
            RRConfig(n=0, eps0=1.0, k=0)


class TestCanonicalPair:
    def test_single_user(self):
        cfg = rr_config(1, eps0=math.log(3), k=0)
        P, Q = canonical_pair(cfg)
        d = cfg.delta_n
        assert P.prob(1) == pytest.approx(d, rel=1e-12)
        assert Q.prob(1) == pytest.approx(1 - d, rel=1e-12)

    def test_means(self):
        cfg = rr_config(50, c=1.0, k=0)
        P, Q = canonical_pair(cfg)
        d = cfg.delta_n
        assert P.mean() == pytest.approx(50 * d, rel=1e-11)
        assert Q.mean() == pytest.approx(49 * d + (1 - d), rel=1e-11)

    def test_zero_count_product_oracle(self):
        cfg = rr_config(100, c=1.0, k=0)
        P, _ = canonical_pair(cfg)
        assert P.prob(0) == pytest.approx((100 / 101) ** 100, rel=1e-12)

    def test_requires_k0(self):
        with pytest.raises(ValueError):
            canonical_pair(rr_config(10, c=1.0, k=1))

    def test_matches_composition_at_k0(self):
        cfg = rr_config(60, c=0.8, k=0)
        Pc, Qc = canonical_pair(cfg)
        Pd, Qd = composition_pair(cfg)
        assert tv_distance(Pc, Pd).lower <= 1e-12
        assert tv_distance(Qc, Qd).lower <= 1e-12


class TestCompositionPair:
    def test_support_range(self):
        cfg = rr_config(30, c=1.0, k=7)
        P, _ = composition_pair(cfg)
        assert P.offset >= -7
        assert P.hi <= 30 - 7

    def test_balanced_mean_zero(self):
        cfg = rr_config(100, c=1.0, k=50)
        P, _ = composition_pair(cfg)
        assert P.mean() == pytest.approx(0.0, abs=1e-12)

    def test_mean_variance_identities(self):
        cfg = rr_config(200, c=1.5, k=60)
        P, _ = composition_pair(cfg)
        d = cfg.delta_n
        assert P.mean() == pytest.approx((200 - 120) * d, rel=1e-9)
        assert P.variance() == pytest.approx(200 * d * (1 - d), rel=1e-9)

    def test_change_of_measure(self):
        cfg = rr_config(40, c=1.0, k=10)
        P, Q = composition_pair(cfg)
        lo = min(P.offset, Q.offset)
        hi = max(P.hi, Q.hi)
        total = 0.0
        for x in range(lo, hi + 1):
            p = P.prob(x)
            if p > 0:
                total += Q.prob(x)
        assert total == pytest.approx(1.0, abs=1e-9)


class TestLikelihoodRatio:
    def test_endpoints(self):
        cfg = rr_config(20, eps0=1.7, k=0)
        assert likelihood_ratio_canonical(cfg, 0) == pytest.approx(math.exp(-1.7), rel=1e-12)
        assert likelihood_ratio_canonical(cfg, 20) == pytest.approx(math.exp(1.7), rel=1e-12)

    def test_formula_value(self):
        cfg = rr_config(10, eps0=math.log(10), k=0)
        assert likelihood_ratio_canonical(cfg, 5) == pytest.approx(5.05, rel=1e-12)

    def test_affine_slope_exact(self):
        cfg = rr_config(25, c=1.0, k=0)
        e = math.exp(cfg.eps0)
        slope = (e - 1 / e) / 25
        vals = [likelihood_ratio_canonical(cfg, m) for m in range(26)]
        diffs = np.diff(vals)
        np.testing.assert_allclose(diffs, slope, rtol=1e-9)

    def test_agrees_with_pmf_ratio(self):
        cfg = rr_config(40, c=1.0, k=0)
        P, Q = canonical_pair(cfg)
        for m in range(0, 41, 5):
            assert likelihood_ratio_canonical(cfg, m) == pytest.approx(
                Q.prob(m) / P.prob(m), rel=1e-9)

    def test_domain(self):
        cfg = rr_config(10, c=1.0, k=0)
        with pytest.raises(ValueError):
            likelihood_ratio_canonical(cfg, 11)


class TestLogLRLaw:
    def test_unit_mean_under_null(self):
        cfg = rr_config(80, c=1.0, k=20)
        law = loglr_law(cfg, "null")
        mean_e = float(np.sum(np.exp(law.values) * law.probs))
        assert mean_e == pytest.approx(1.0 - law.defect, abs=1e-9)

    def test_weights_come_from_hypothesis(self):
        cfg = rr_config(50, c=1.0, k=10)
        null = loglr_law(cfg, "null")
        alt = loglr_law(cfg, "alt")
        np.testing.assert_allclose(null.values, alt.values, rtol=1e-12)
        # under the alternative the law tilts toward larger values
        assert float(np.sum(alt.values * alt.probs)) > float(
            np.sum(null.values * null.probs))

    def test_standardization_constants(self):
        cfg = rr_config(100, eps0=0.5 * math.log(100), k=0)
        law = loglr_law(cfg)
        d = cfg.delta_n
        assert law.shift == pytest.approx(1 - 2 * d, rel=1e-14)
        assert law.variance == pytest.approx(100 * d * (1 - d), rel=1e-14)
        assert law.scale == pytest.approx(law.shift / math.sqrt(law.variance), rel=1e-14)

    def test_ks_to_normal_decreases(self):
        ks = []
        for n in (100, 1000, 10_000):
            cfg = rr_config(n, eps0=0.5 * math.log(n), k=0)
            law = loglr_law(cfg, "null")
            x = (law.values + 0.5 * law.scale**2) / law.scale
            ks.append(ks_standard_normal(x, law.probs))
        assert ks[0] > ks[1] > ks[2]

    def test_rejects_unknown_hypothesis(self):
        with pytest.raises(ValueError):
            loglr_law(rr_config(10, c=1.0, k=0), "both")

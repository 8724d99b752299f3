import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.integrate
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from critshuffle.distcore import (
    IntDist,
    affine_map,
    bessel_i,
    convolve,
    make_bernoulli,
    make_binomial,
    make_poisson,
    make_skellam,
    point_mass,
    poisson_upper_tail,
    std_normal_cdf,
    tv_distance,
)


def exact_binomial_fraction(m, p_frac):
    """Independent oracle: exact binomial pmf in rational arithmetic."""
    out = []
    for k in range(m + 1):
        out.append(math.comb(m, k) * p_frac**k * (1 - p_frac) ** (m - k))
    return out


class TestBinomial:
    def test_empty_sum(self):
        d = make_binomial(0, 0.3)
        assert d.offset == 0 and d.mass.tolist() == [1.0]

    def test_degenerate_p(self):
        assert make_binomial(10, 0.0).prob(0) == 1.0
        assert make_binomial(10, 1.0).prob(10) == 1.0

    def test_small_case_product_oracle(self):
        d = make_binomial(10, 0.1)
        assert d.prob(0) == pytest.approx(0.9**10, rel=1e-13)
        assert d.prob(0) == pytest.approx(0.34867844010, rel=1e-10)

    @pytest.mark.parametrize("m,p", [(5, Fraction(1, 4)), (30, Fraction(1, 10)),
                                     (50, Fraction(3, 7))])
    def test_rational_oracle_relative_error(self, m, p):
        d = make_binomial(m, float(p))
        exact = exact_binomial_fraction(m, p)
        for k in range(m + 1):
            assert d.prob(k) == pytest.approx(float(exact[k]), rel=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError):
            make_binomial(-1, 0.5)
        with pytest.raises(ValueError):
            make_binomial(10, 1.5)

    def test_large_m_normalization(self):
        d = make_binomial(100_000, 1e-4)
        assert abs(math.fsum(d.mass.tolist()) - 1.0) < 1e-9


class TestPoisson:
    def test_zero_rate(self):
        assert make_poisson(0.0).mass.tolist() == [1.0]

    def test_analytic_p0(self):
        assert make_poisson(1.0).prob(0) == pytest.approx(math.exp(-1), rel=1e-14)

    def test_tail_contract(self):
        d = make_poisson(2.0, tail_eps=1e-14)
        assert math.fsum(d.mass.tolist()) >= 1 - 1e-14
        assert d.tail_mass <= 1e-14
        # T minimal: removing the last point must violate the tolerance
        assert 1.0 - math.fsum(d.mass[:-1].tolist()) > 1e-14

    def test_errors(self):
        with pytest.raises(ValueError):
            make_poisson(-0.5)
        with pytest.raises(ValueError):
            make_poisson(1.0, tail_eps=1e-3)


class TestSkellam:
    def test_one_sided_is_poisson(self):
        s = make_skellam(1.0, 0.0)
        p = make_poisson(1.0)
        assert s.offset == 0
        np.testing.assert_allclose(s.mass, p.mass, rtol=0, atol=1e-15)

    def test_exchange_symmetry(self):
        s = make_skellam(1.0, 1.0)
        for d in range(0, 6):
            assert s.prob(d) == pytest.approx(s.prob(-d), rel=1e-12)

    def test_center_value_convolution_oracle(self):
        # P(D=0) = e^{-2} sum_k 1/(k!)^2, cross-checked against e^{-2} I_0(2)
        s = make_skellam(1.0, 1.0)
        oracle = math.exp(-2) * math.fsum(1.0 / math.factorial(k) ** 2
                                          for k in range(40))
        assert s.prob(0) == pytest.approx(oracle, rel=1e-12)
        assert s.prob(0) == pytest.approx(math.exp(-2) * scipy.special.iv(0, 2.0),
                                          rel=1e-12)

    @pytest.mark.parametrize("lam0", [0.25, 1.0, 4.0])
    @pytest.mark.parametrize("lam1", [0.25, 1.0, 4.0])
    def test_methods_agree(self, lam0, lam1):
        a = make_skellam(lam0, lam1, method="convolution")
        b = make_skellam(lam0, lam1, method="bessel")
        lo, hi = max(a.offset, b.offset), min(a.hi, b.hi)
        for d in range(lo, hi + 1):
            assert abs(a.prob(d) - b.prob(d)) < 1e-10

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            make_skellam(-1.0, 1.0)


class TestConvolveAffine:
    def test_identity_element(self):
        d = make_binomial(5, 0.3)
        c = convolve(point_mass(0), d)
        assert c.offset == d.offset
        np.testing.assert_array_equal(c.mass, d.mass)

    def test_two_coins(self):
        c = convolve(make_bernoulli(0.5), make_bernoulli(0.5))
        assert c.offset == 0
        np.testing.assert_allclose(c.mass, [0.25, 0.5, 0.25], rtol=1e-15)

    def test_poisson_additivity_oracle(self):
        c = convolve(make_poisson(1.0), make_poisson(2.0))
        p3 = make_poisson(3.0)
        lo, hi = max(c.offset, p3.offset), min(c.hi, p3.hi)
        for x in range(lo, hi + 1):
            assert abs(c.prob(x) - p3.prob(x)) < 1e-12

    def test_affine_identity_shift_reflection(self):
        d = make_poisson(1.5)
        same = affine_map(d, 1, 0)
        assert same.offset == d.offset
        shifted = affine_map(d, 1, 1)
        assert shifted.prob(1) == d.prob(0)
        refl = affine_map(d, -1, 0)
        assert refl.prob(-3) == d.prob(3)
        with pytest.raises(ValueError):
            affine_map(d, 2, 0)


class TestTV:
    def test_self_distance(self):
        d = make_poisson(1.0)
        tv = tv_distance(d, d)
        assert tv.lower == 0.0
        assert tv.upper <= 2 * d.tail_mass + 1e-18

    def test_disjoint_points(self):
        tv = tv_distance(point_mass(0), point_mass(1))
        assert tv.lower == 1.0 and tv.upper == 1.0

    def test_binomial_poisson_bound(self):
        # explicit coupling bound m p (1 - e^{-p}) dominates the exact value
        tv = tv_distance(make_binomial(10, 0.1), make_poisson(1.0))
        bound = 10 * 0.1 * (1 - math.exp(-0.1))
        assert tv.lower <= bound
        # brute-force half-L1 oracle
        b = make_binomial(10, 0.1)
        p = make_poisson(1.0)
        lo = min(b.offset, p.offset)
        hi = max(b.hi, p.hi)
        oracle = 0.5 * sum(abs(b.prob(x) - p.prob(x)) for x in range(lo, hi + 1))
        assert tv.lower == pytest.approx(oracle, rel=1e-12)


@st.composite
def small_dists(draw):
    size = draw(st.integers(min_value=1, max_value=6))
    raw = draw(st.lists(st.integers(min_value=1, max_value=100),
                        min_size=size, max_size=size))
    offset = draw(st.integers(min_value=-5, max_value=5))
    total = sum(raw)
    return IntDist(offset=offset, mass=np.array([r / total for r in raw]))


class TestProperties:
    @given(small_dists(), small_dists())
    @settings(max_examples=60, deadline=None)
    def test_convolution_commutes(self, a, b):
        ab = convolve(a, b)
        ba = convolve(b, a)
        assert ab.offset == ba.offset
        np.testing.assert_allclose(ab.mass, ba.mass, atol=1e-12)

    @given(small_dists(), small_dists(), small_dists())
    @settings(max_examples=40, deadline=None)
    def test_convolution_associative(self, a, b, c):
        left = convolve(convolve(a, b), c)
        right = convolve(a, convolve(b, c))
        assert left.offset == right.offset
        np.testing.assert_allclose(left.mass, right.mass, atol=1e-12)

    @given(small_dists(), small_dists(), small_dists())
    @settings(max_examples=40, deadline=None)
    def test_tv_metric(self, a, b, c):
        ab = tv_distance(a, b).lower
        ba = tv_distance(b, a).lower
        assert ab == ba
        assert ab <= tv_distance(a, c).lower + tv_distance(c, b).lower + 1e-12
        assert tv_distance(a, a).lower == 0.0

    @given(small_dists(), small_dists(), st.integers(-3, 3))
    @settings(max_examples=40, deadline=None)
    def test_tv_invariant_under_affine(self, a, b, shift):
        base = tv_distance(a, b).lower
        for scale in (1, -1):
            mapped = tv_distance(affine_map(a, scale, shift),
                                 affine_map(b, scale, shift)).lower
            assert mapped == pytest.approx(base, abs=1e-14)

    @given(small_dists(), small_dists(), small_dists(), small_dists())
    @settings(max_examples=40, deadline=None)
    def test_tensorization_through_difference(self, a1, b1, a2, b2):
        # TV of the difference of independent pairs is at most the sum of
        # the marginal TVs
        d_a = convolve(a1, affine_map(a2, -1, 0))
        d_b = convolve(b1, affine_map(b2, -1, 0))
        lhs = tv_distance(d_a, d_b).lower
        rhs = tv_distance(a1, b1).lower + tv_distance(a2, b2).lower
        assert lhs <= rhs + 1e-12


class TestSpecialFunctions:
    def test_bessel_trivial(self):
        assert bessel_i(0, 0.0) == 1.0
        assert bessel_i(1, 0.0) == 0.0

    def test_bessel_series_value(self):
        assert bessel_i(0, 2.0) == pytest.approx(2.2795853023360673, rel=1e-12)
        assert bessel_i(0, 2.0) == pytest.approx(scipy.special.iv(0, 2.0), rel=1e-12)
        assert bessel_i(3, 7.5) == pytest.approx(scipy.special.iv(3, 7.5), rel=1e-12)

    def test_bessel_domain(self):
        with pytest.raises(ValueError):
            bessel_i(0, 51.0)
        with pytest.raises(ValueError):
            bessel_i(-1, 1.0)
        with pytest.raises(ValueError):
            bessel_i(0, -1.0)

    def test_normal_cdf_symmetry(self):
        assert std_normal_cdf(0.0) == pytest.approx(0.5, abs=1e-15)
        for x in (0.3, 1.0, 2.5):
            assert std_normal_cdf(x) + std_normal_cdf(-x) == pytest.approx(1.0, abs=1e-14)

    def test_normal_cdf_quadrature_oracle(self):
        def phi(t):
            return math.exp(-t * t / 2) / math.sqrt(2 * math.pi)

        val, _ = scipy.integrate.quad(phi, -10, 1.959964)
        assert std_normal_cdf(1.959964) == pytest.approx(val, abs=1e-10)
        assert std_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)

    def test_poisson_upper_tail(self):
        lam = 2.0
        d = make_poisson(lam, 1e-14)
        for m in (0, 1, 3, 7):
            brute = 1.0 - math.fsum(d.mass[:m].tolist())
            assert poisson_upper_tail(lam, m) == pytest.approx(brute, rel=1e-10)
        # deep-tail value keeps relative precision
        assert poisson_upper_tail(1.0, 40) == pytest.approx(
            math.exp(-1) * math.fsum(1 / math.factorial(k) for k in range(40, 60)),
            rel=1e-10)

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tailfit.distributions import (
    PledParams,
    TpaParams,
    pled_ccdf,
    pled_log_ccdf,
    pled_normalizer,
    pled_pmf,
    tabulate,
    tpa_ccdf,
    tpa_log_ccdf,
    tpa_log_pmf,
    tpa_p_a2,
    tpa_pmf,
    tpa_tail_ratio,
)
from tailfit.distributions import _euler_maclaurin_tail, _tail_sum, _upper_gamma
from tailfit.errors import (
    DegenerateSupportError,
    DomainError,
    InvalidParameterError,
    InvalidToleranceError,
)

from oracles import pled_brute_sum, pled_mp_sum, tpa_brute_pmf, tpa_exact_pmf

# 40-digit brute-force sums (mpmath), frozen
P_A2_FIG2 = 0.00037549433946259503491
PLED_A_FIG3 = 0.89112574088552539963
PLED_CCDF50_FIG3 = 0.064810193995711231517
PLED_PMF100_FIG3 = 0.00036800595899146724223


tpa_params = st.builds(
    TpaParams,
    a2=st.integers(1, 400),
    w=st.floats(0.05, 20.0),
    d_min=st.integers(1, 6),
)


class TestTailRatio:
    def test_symmetric(self):
        assert tpa_tail_ratio(TpaParams(1, 1.0)) == 0.5

    def test_figure_parameters(self):
        assert tpa_tail_ratio(TpaParams(90, 0.83)) == pytest.approx(90 / 90.83, rel=1e-15)
        assert tpa_tail_ratio(TpaParams(90, 0.83)) == pytest.approx(0.9908620, abs=1e-7)

    def test_heavy_tempering(self):
        assert tpa_tail_ratio(TpaParams(90, 9e6)) == pytest.approx(90 / 9000090, rel=1e-14)

    @given(tpa_params)
    def test_strictly_inside_unit_interval(self, p):
        assert 0 < p.q < 1


class TestPA2:
    def test_geometric_reduction(self):
        assert tpa_p_a2(TpaParams(1, 1.0, 1)) == pytest.approx(0.5, rel=1e-15)

    def test_small_exact(self):
        # 1/(1-q) + 2 + 6 = 12 with q = 3/4
        assert tpa_p_a2(TpaParams(3, 1.0, 1)) == pytest.approx(1 / 12, rel=1e-14)
        brute = tpa_brute_pmf(3, 1.0, 1)
        assert tpa_p_a2(TpaParams(3, 1.0, 1)) == pytest.approx(brute[3], rel=1e-12)

    def test_figure_configuration(self):
        p = TpaParams(90, 0.83, 2)
        assert tpa_p_a2(p) == pytest.approx(P_A2_FIG2, rel=1e-12)
        assert tpa_p_a2(p) == pytest.approx(tpa_brute_pmf(90, 0.83, 2)[90], rel=1e-11)

    def test_d_min_above_threshold_is_geometric(self):
        p = TpaParams(3, 1.0, 6)
        q = 0.75
        assert tpa_p_a2(p) == pytest.approx((1 - q) * q ** (3 - 6), rel=1e-14)
        for x in range(6, 20):
            assert tpa_pmf(p, x) == pytest.approx((1 - q) * q ** (x - 6), rel=1e-13)

    def test_invalid_d_min(self):
        with pytest.raises(DegenerateSupportError):
            TpaParams(3, 1.0, 0)


class TestTpaPmf:
    def test_geometric(self):
        p = TpaParams(1, 1.0, 1)
        for i in range(1, 30):
            assert tpa_pmf(p, i) == pytest.approx(2.0**-i, rel=1e-14)

    def test_head_ratio(self):
        p = TpaParams(3, 1.0, 1)
        assert tpa_pmf(p, 1) / tpa_pmf(p, 2) == pytest.approx(3.0, rel=1e-14)

    def test_one_tail_step(self):
        p = TpaParams(90, 0.83, 2)
        assert tpa_pmf(p, 91) == pytest.approx(p.q * tpa_p_a2(p), rel=1e-14)

    def test_branches_meet_at_threshold(self):
        p = TpaParams(40, 1.7, 2)
        assert tpa_pmf(p, 40) == pytest.approx(tpa_p_a2(p), rel=1e-14)

    def test_exact_rational(self):
        exact, _ = tpa_exact_pmf(5, 2, 1, 30)
        p = TpaParams(5, 2.0, 1)
        for x in range(1, 30):
            assert tpa_pmf(p, x) == pytest.approx(float(exact[x]), rel=1e-13)

    def test_vectorized_matches_scalar(self):
        p = TpaParams(25, 0.6, 2)
        xs = np.arange(2, 80)
        vec = tpa_pmf(p, xs)
        assert vec.shape == xs.shape
        assert all(vec[i] == tpa_pmf(p, int(x)) for i, x in enumerate(xs))

    def test_below_support(self):
        with pytest.raises(DomainError):
            tpa_pmf(TpaParams(5, 1.0, 2), 1)

    def test_non_integer_degree(self):
        with pytest.raises(DomainError):
            tpa_pmf(TpaParams(5, 1.0, 1), 2.5)

    def test_large_threshold_does_not_overflow(self):
        p = TpaParams(10**6, 3.0, 1)
        assert 0 < tpa_p_a2(p) < 1
        assert math.isfinite(tpa_log_pmf(p, 1))
        assert tpa_ccdf(p, 1) == 1.0


class TestTpaCcdf:
    @pytest.mark.parametrize("a2,w,d_min", [(1, 1.0, 1), (3, 1.0, 1), (90, 0.83, 2), (7, 0.2, 9)])
    def test_unit_at_d_min(self, a2, w, d_min):
        assert tpa_ccdf(TpaParams(a2, w, d_min), d_min) == pytest.approx(1.0, abs=1e-12)

    def test_geometric(self):
        p = TpaParams(1, 1.0, 1)
        for x in range(1, 40):
            assert tpa_ccdf(p, x) == pytest.approx(2.0 ** -(x - 1), rel=1e-14)

    def test_exact_tail_sum(self):
        # Fraction oracle: ccdf(3) = (1/10 + 1/20 + 1/10) / (3/2) = 1/6
        exact, q = tpa_exact_pmf(5, 2, 1, 5)
        expected = sum(v for k, v in exact.items() if 3 <= k < 5) + exact[5] / (1 - q)
        assert expected == Fraction(1, 6)
        assert tpa_ccdf(TpaParams(5, 2.0, 1), 3) == pytest.approx(1 / 6, rel=1e-14)

    def test_matches_brute_force(self):
        brute = tpa_brute_pmf(90, 0.83, 2)
        p = TpaParams(90, 0.83, 2)
        top = max(brute)
        for x in (2, 3, 10, 50, 89, 90, 91, 200, 600):
            expected = math.fsum(v for k, v in brute.items() if k >= x)
            assert tpa_ccdf(p, x) == pytest.approx(expected, rel=1e-10), x
        assert top > 90

    def test_branch_selection(self):
        p = TpaParams(12, 0.9, 2)
        head = tpa_ccdf(p, 12, branch="head")
        tail = tpa_ccdf(p, 12, branch="tail")
        assert head == pytest.approx(tail, rel=1e-15)
        assert head == pytest.approx(tpa_p_a2(p) / (1 - p.q), rel=1e-14)
        with pytest.raises(DomainError):
            tpa_ccdf(p, 13, branch="head")
        with pytest.raises(DomainError):
            tpa_ccdf(p, 11, branch="tail")
        with pytest.raises(ValueError):
            tpa_ccdf(p, 12, branch="middle")


class TestTpaInvariants:
    @settings(max_examples=60, deadline=None)
    @given(tpa_params, st.integers(0, 200))
    def test_normalization(self, p, extra):
        top = max(p.a2, p.d_min) + extra
        xs = np.arange(p.d_min, top + 1)
        total = math.fsum(tpa_pmf(p, xs)) + tpa_ccdf(p, top + 1)
        assert total == pytest.approx(1.0, abs=1e-10)

    @settings(max_examples=60, deadline=None)
    @given(tpa_params)
    def test_branch_agreement(self, p):
        if p.d_min > p.a2:
            return
        head = tpa_log_ccdf(p, p.a2, branch="head")
        tail = tpa_log_ccdf(p, p.a2, branch="tail")
        assert math.exp(head - tail) == pytest.approx(1.0, rel=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(tpa_params)
    def test_geometric_tail(self, p):
        start = max(p.a2, p.d_min)
        xs = np.arange(start, start + 60)
        c = tpa_ccdf(p, xs)
        pm = tpa_pmf(p, xs)
        np.testing.assert_allclose(c[1:] / c[:-1], p.q, rtol=1e-12)
        np.testing.assert_allclose(pm[1:] / pm[:-1], p.q, rtol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(tpa_params)
    def test_head_recursion(self, p):
        if p.a2 - p.d_min < 1:
            return
        i = np.arange(p.d_min, p.a2)
        ratio = tpa_pmf(p, i + 1) / tpa_pmf(p, i)
        np.testing.assert_allclose(ratio, i / (i + p.w + 1), rtol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(tpa_params)
    def test_ccdf_pmf_consistency(self, p):
        xs = np.arange(p.d_min, max(p.a2, p.d_min) + 40)
        c = tpa_ccdf(p, np.append(xs, xs[-1] + 1))
        pm = tpa_pmf(p, xs)
        # differences are measured on the scale of ccdf(x)
        assert np.all(np.abs((c[:-1] - c[1:]) - pm) <= 1e-12 * c[:-1])

    def test_asymptotic_exponent(self):
        p = TpaParams(10**4, 0.83, 1)
        x = np.arange(100, 5001)
        slope = np.polyfit(np.log(x), tpa_log_pmf(p, x), 1)[0]
        assert slope == pytest.approx(-(1 + p.w), abs=0.02)
        assert p.gamma == pytest.approx(1.83)


class TestTpaValidation:
    @pytest.mark.parametrize("w", [0.0, -1.0, float("inf"), float("nan")])
    def test_rejects_bad_w(self, w):
        with pytest.raises(InvalidParameterError):
            TpaParams(5, w)

    @pytest.mark.parametrize("a2", [0, -3, 2.5, True])
    def test_rejects_bad_a2(self, a2):
        with pytest.raises(InvalidParameterError):
            TpaParams(a2, 1.0)

    def test_a1_is_metadata_only(self):
        a = TpaParams(90, 0.83, 2, a1_meta=187)
        b = TpaParams(90, 0.83, 2)
        assert tpa_ccdf(a, 50) == tpa_ccdf(b, 50)
        assert "a1_meta=187" in a.digest()


# ---------------------------------------------------------------------------
# PLED
# ---------------------------------------------------------------------------


class TestPledNormalizer:
    def test_geometric_closed_form(self):
        a = pled_normalizer(PledParams(0.0, 350.0, 2))
        assert a == pytest.approx((1 - math.exp(-1 / 350)) * math.exp(2 / 350), rel=1e-12)

    def test_figure_parameters(self):
        p = PledParams(1.63, 350.0, 2)
        assert pled_normalizer(p) == pytest.approx(PLED_A_FIG3, rel=1e-12)
        assert pled_normalizer(p) == pytest.approx(1 / pled_brute_sum(1.63, 350.0, 2), rel=1e-10)

    def test_tolerance_self_consistency(self):
        p = PledParams(1.63, 350.0, 2)
        assert pled_normalizer(p, 1e-9) == pytest.approx(pled_normalizer(p, 1e-12), rel=1e-8)

    @pytest.mark.parametrize("tol", [0.0, -1e-9, 1e-5, 1.0])
    def test_invalid_tolerance(self, tol):
        with pytest.raises(InvalidToleranceError):
            pled_normalizer(PledParams(1.63, 350.0, 2), tol)

    @pytest.mark.parametrize("b,c", [(1.63, 350.0), (0.5, 2000.0), (3.0, 50.0), (-0.5, 40.0)])
    def test_halving_tolerance(self, b, c):
        p = PledParams(b, c, 2)
        for tol in (1e-7, 1e-10, 1e-13):
            a1, a2 = pled_normalizer(p, tol), pled_normalizer(p, tol / 2)
            assert abs(a1 - a2) / a2 < tol
            c1, c2 = pled_ccdf(p, 40, tol), pled_ccdf(p, 40, tol / 2)
            assert abs(c1 - c2) / c2 < tol

    def test_slow_decay_uses_integral_tail(self):
        # geometric bound alone would need millions of terms here
        b, c = 1.2, 5e4
        expected = pled_brute_sum(b, c, 2, stop=6 * 10**6)
        assert pled_normalizer(PledParams(b, c, 2)) == pytest.approx(1 / expected, rel=1e-11)

    def test_integral_tail_against_mpmath(self):
        b, c, start = 1.63, 3e3, 40000
        with mpmath.workdps(40):
            f = lambda x: x ** (-mpmath.mpf(b)) * mpmath.exp(-x / c)
            ref = mpmath.nsum(f, [start, mpmath.inf])
        assert _euler_maclaurin_tail(b, c, start) == pytest.approx(float(ref), rel=1e-12)

    @pytest.mark.parametrize("a", [0.5, 2.5, -0.63, -1.0, -2.0, -3.0001])
    @pytest.mark.parametrize("x", [1e-3, 0.15, 1.5, 15.0, 40.0])
    def test_upper_gamma(self, a, x):
        ref = float(mpmath.gammainc(a, x))
        assert _upper_gamma(a, x) == pytest.approx(ref, rel=1e-11)

    def test_remainder_is_small_after_truncation(self):
        s_trunc = _tail_sum(2.0, 100.0, 2, 1e-12)
        s_ref = float(pled_mp_sum(2.0, 100.0, 2, 6000))
        assert 0 <= (s_ref - s_trunc) / s_ref <= 1e-12 + 1e-15


class TestPledPmf:
    def test_geometric(self):
        p = PledParams(0.0, 350.0, 2)
        for x in (2, 3, 10, 400):
            expected = (1 - math.exp(-1 / 350)) * math.exp(-(x - 2) / 350)
            assert pled_pmf(p, x) == pytest.approx(expected, rel=1e-12)

    def test_power_law_limit(self):
        p = PledParams(1.63, 1e12, 2)
        for x in (10, 100, 1000):
            assert pled_pmf(p, 2 * x) / pled_pmf(p, x) == pytest.approx(2**-1.63, rel=1e-8)
        assert 0 < pled_pmf(p, 2) < 1

    def test_figure_parameters(self):
        p = PledParams(1.63, 350.0, 2)
        assert pled_pmf(p, 100) == pytest.approx(PLED_PMF100_FIG3, rel=1e-12)
        brute = 100**-1.63 * math.exp(-100 / 350) / pled_brute_sum(1.63, 350.0, 2)
        assert pled_pmf(p, 100) == pytest.approx(brute, rel=1e-10)

    def test_below_support(self):
        with pytest.raises(DomainError):
            pled_pmf(PledParams(1.63, 350.0, 2), 1)


class TestPledCcdf:
    @pytest.mark.parametrize("b,c,d_min", [(1.63, 350.0, 2), (0.0, 10.0, 1), (2.5, 20.0, 5)])
    def test_unit_at_d_min(self, b, c, d_min):
        assert pled_ccdf(PledParams(b, c, d_min), d_min) == pytest.approx(1.0, abs=1e-10)

    def test_geometric(self):
        p = PledParams(0.0, 350.0, 2)
        for x in (2, 3, 50, 1000):
            assert pled_ccdf(p, x) == pytest.approx(math.exp(-(x - 2) / 350), rel=1e-12)

    def test_figure_parameters(self):
        p = PledParams(1.63, 350.0, 2)
        assert pled_ccdf(p, 50) == pytest.approx(PLED_CCDF50_FIG3, rel=1e-12)
        brute = pled_brute_sum(1.63, 350.0, 50) / pled_brute_sum(1.63, 350.0, 2)
        assert pled_ccdf(p, 50) == pytest.approx(brute, rel=1e-10)

    def test_vectorized_log_ccdf(self):
        p = PledParams(1.63, 350.0, 2)
        xs = np.array([2, 5, 50, 500, 3000])
        np.testing.assert_allclose(np.exp(pled_log_ccdf(p, xs)), pled_ccdf(p, xs), rtol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-1.0, 4.0), st.floats(5.0, 5000.0), st.integers(1, 5))
    def test_ccdf_pmf_consistency(self, b, c, d_min):
        p = PledParams(b, c, d_min)
        xs = np.arange(d_min, d_min + 60)
        ev = tabulate(p, np.append(xs, xs[-1] + 1))
        diff = ev.ccdf[:-1] - ev.ccdf[1:]
        assert np.all(np.abs(diff - ev.pmf[:-1]) <= 1e-12 * ev.ccdf[:-1])
        single = pled_ccdf(p, xs)
        np.testing.assert_allclose(single, ev.ccdf[:-1], rtol=1e-12)

    def test_invalid_c(self):
        with pytest.raises(InvalidParameterError):
            PledParams(1.0, 0.0)


class TestTabulate:
    def test_tpa_geometric(self):
        ev = tabulate(TpaParams(1, 1.0, 1), [1, 2, 3])
        np.testing.assert_allclose(ev.pmf, [0.5, 0.25, 0.125], rtol=1e-14)
        np.testing.assert_allclose(ev.ccdf, [1.0, 0.5, 0.25], rtol=1e-14)
        assert ev.model_id == "TPA"
        assert ev.params_digest == "TPA(a2=1,w=1.0,d_min=1)"

    def test_pled_geometric(self):
        ev = tabulate(PledParams(0.0, 350.0, 2), [2, 3])
        np.testing.assert_allclose(ev.ccdf, [1.0, math.exp(-1 / 350)], rtol=1e-12)
        assert ev.model_id == "PLED"

    def test_tpa_monotone(self):
        ev = tabulate(TpaParams(90, 0.83, 2), np.arange(2, 1001))
        assert np.all(np.diff(ev.ccdf) <= 0)
        assert np.all(ev.pmf > 0) and np.all(ev.pmf <= 1)

    def test_rejects_unsorted_and_low_degrees(self):
        with pytest.raises(DomainError):
            tabulate(TpaParams(5, 1.0, 2), [3, 2])
        with pytest.raises(DomainError):
            tabulate(TpaParams(5, 1.0, 2), [1, 2])

    def test_immutable(self):
        ev = tabulate(TpaParams(5, 1.0, 1), [1, 2])
        with pytest.raises(ValueError):
            ev.pmf[0] = 0.0

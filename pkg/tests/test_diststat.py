"""Moments, JB, chi-square, and the two-step transform search."""

import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import assume, given, settings, strategies as st

from dwe import diststat

# Published (skewness, excess kurtosis, N, statistic) check rows for the
# JB formula; the statistic column carries the original 2-decimal rounding,
# hence the 0.1% slack.
JB_CHECKS = [
    (1.291, 3.417, 9825, 7509.01),
    (0.649, 14.069, 160172, 1332241.06),
    (1.865, 8.340, 4653, 16182.46),
    (1.348, 2.429, 3777, 2072.39),
    (2.606, 20.306, 178427, 3267433.88),
]


class TestMoments:
    def test_three_zeros_one_one(self):
        # hand-worked: g1 = 2/sqrt(3)·(4·3)^.5/2 → 2; kurt exactly 4
        m = diststat.moments([0.0, 0.0, 0.0, 1.0])
        assert m.skewness == pytest.approx(2.0, rel=1e-12)
        assert m.excess_kurtosis == pytest.approx(4.0, rel=1e-12)

    def test_symmetric_sample_zero_skew(self):
        m = diststat.moments([-2.0, -1.0, 0.0, 1.0, 2.0])
        assert m.skewness == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=60)
    @given(st.lists(st.floats(min_value=-50, max_value=50), min_size=5,
                    max_size=120))
    def test_matches_scipy_bias_corrected(self, xs):
        assume(len(set(xs)) > 1)
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            ref_skew = scipy.stats.skew(xs, bias=False)
            ref_kurt = scipy.stats.kurtosis(xs, bias=False, fisher=True)
        # the reference itself underflows on pathological spreads
        assume(math.isfinite(ref_skew) and math.isfinite(ref_kurt))
        m = diststat.moments(xs)
        assert m.skewness == pytest.approx(ref_skew, rel=1e-9, abs=1e-9)
        assert m.excess_kurtosis == pytest.approx(ref_kurt, rel=1e-9,
                                                 abs=1e-9)

    def test_small_or_constant_rejected(self):
        with pytest.raises(ValueError):
            diststat.moments([1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            diststat.moments([5.0, 5.0, 5.0, 5.0])


class TestJarqueBera:
    @pytest.mark.parametrize("skew,kurt,n,expected", JB_CHECKS)
    def test_frozen_reference_rows(self, skew, kurt, n, expected):
        m = diststat.MomentSummary(n=n, mean=0.0, skewness=skew,
                                   excess_kurtosis=kurt)
        result = diststat.jarque_bera(m)
        assert result.statistic == pytest.approx(expected, rel=1e-3)
        assert result.df == 2
        assert result.critical_value == 5.99
        assert result.reject_null

    def test_normalish_sample_accepts(self):
        rng = np.random.default_rng(5)
        xs = rng.normal(size=2000)
        result = diststat.jarque_bera(diststat.moments(xs))
        assert not result.reject_null

    @given(st.integers(min_value=4, max_value=10**6),
           st.floats(min_value=-5, max_value=5),
           st.floats(min_value=-5, max_value=30))
    def test_formula(self, n, skew, kurt):
        m = diststat.MomentSummary(n=n, mean=0.0, skewness=skew,
                                   excess_kurtosis=kurt)
        expect = n * (skew ** 2 / 6.0 + kurt ** 2 / 24.0)
        assert diststat.jarque_bera(m).statistic \
            == pytest.approx(expect, rel=1e-12)


class TestChiSquare:
    def test_fixed_criticals(self):
        assert diststat.chi_square_critical(2) == 5.99
        assert diststat.chi_square_critical(4) == 9.49
        assert diststat.chi_square_critical(6) == 12.59

    def test_other_df_uses_distribution(self):
        got = diststat.chi_square_critical(10)
        assert got == pytest.approx(scipy.stats.chi2.ppf(0.95, 10),
                                    rel=1e-9)

    def test_uniform_counts_score_zero(self):
        result = diststat.chi_square_uniformity((10,) * 7)
        assert result.statistic == 0.0
        assert result.df == 6
        assert not result.reject_null

    def test_hand_worked_statistic(self):
        # counts (16,5,2,0,2,0,1), total 26, E = 26/7
        counts = (16, 5, 2, 0, 2, 0, 1)
        e = 26 / 7
        expect = sum((o - e) ** 2 / e for o in counts)
        result = diststat.chi_square_uniformity(counts)
        assert result.statistic == pytest.approx(expect, rel=1e-12)
        assert result.reject_null

    @given(st.lists(st.integers(min_value=0, max_value=99), min_size=7,
                    max_size=7).filter(lambda c: sum(c) > 0),
           st.randoms(use_true_random=False))
    def test_permutation_invariant(self, counts, rnd):
        shuffled = list(counts)
        rnd.shuffle(shuffled)
        a = diststat.chi_square_uniformity(tuple(counts))
        b = diststat.chi_square_uniformity(tuple(shuffled))
        assert a.statistic == pytest.approx(b.statistic, rel=1e-12)


class TestApplyTransform:
    def test_log_shift_spec(self):
        # frozen parameter set: log10(y) - 0.06 then lambda2 = 1.82
        spec = diststat.TransformSpec(step1_family="log10-shift",
                                      step1_param=-0.06, step2_power=1.82)
        y = 7.0
        y_star = math.log10(y) - 0.06
        expect = ((y_star + 1.0) ** 1.82 - 1.0) / 1.82
        got = diststat.apply_transform(y, spec)
        assert got == pytest.approx(expect, rel=1e-12)
        assert got == pytest.approx(1.02799, abs=1e-4)

    def test_power_spec(self):
        spec = diststat.TransformSpec(step1_family="power",
                                      step1_param=4.0, step2_power=-0.954)
        y = 1.75
        y_star = (y ** 4 - 1.0) / 4.0
        expect = ((y_star + 1.0) ** -0.954 - 1.0) / -0.954
        assert diststat.apply_transform(y, spec) \
            == pytest.approx(expect, rel=1e-12)

    def test_zero_powers_mean_log(self):
        spec = diststat.TransformSpec(step1_family="power",
                                      step1_param=0.0, step2_power=0.0)
        y = 3.0
        expect = math.log(math.log(y) + 1.0)
        assert diststat.apply_transform(y, spec) \
            == pytest.approx(expect, rel=1e-12)

    @given(st.floats(min_value=0.05, max_value=40.0),
           st.floats(min_value=0.05, max_value=40.0),
           st.sampled_from(["log10-shift", "power"]),
           st.floats(min_value=-1.5, max_value=3.0),
           st.floats(min_value=-1.5, max_value=2.5))
    def test_strictly_monotone(self, a, b, family, p1, p2):
        assume(abs(a - b) > 1e-9)
        spec = diststat.TransformSpec(step1_family=family, step1_param=p1,
                                      step2_power=p2)
        try:
            fa = diststat.apply_transform(a, spec)
            fb = diststat.apply_transform(b, spec)
        except ValueError:
            assume(False)
        assert (fa < fb) == (a < b)

    def test_domain_error_names_value(self):
        spec = diststat.TransformSpec(step1_family="log10-shift",
                                      step1_param=-2.0, step2_power=1.0)
        # log10(0.01) - 2 = -4; y*+1 < 0 breaks step 2 for fractional powers
        bad = diststat.TransformSpec(step1_family="log10-shift",
                                     step1_param=-2.0, step2_power=0.5)
        with pytest.raises(ValueError):
            diststat.apply_transform(0.0, spec)
        with pytest.raises(ValueError):
            diststat.apply_transform(0.01, bad)

    def test_array_matches_scalar(self):
        spec = diststat.TransformSpec(step1_family="power",
                                      step1_param=0.8, step2_power=0.75)
        values = [0.3, 1.0, 2.5, 7.0]
        arr = diststat.apply_transform_array(np.asarray(values), spec)
        for v, a in zip(values, arr):
            assert a == pytest.approx(diststat.apply_transform(v, spec),
                                      rel=1e-12)


class TestFitTransform:
    def test_lognormal_gets_large_reduction(self):
        rng = np.random.default_rng(1234)
        sample = np.exp(rng.normal(0.0, 0.8, size=4000))
        raw_jb = diststat.jarque_bera(diststat.moments(sample)).statistic
        fit = diststat.fit_transform_spec(sample)
        assert fit.jb_statistic < 0.1 * raw_jb

    def test_never_worse_than_identity(self):
        rng = np.random.default_rng(99)
        sample = rng.uniform(0.2, 5.0, size=300)
        raw_jb = diststat.jarque_bera(
            diststat.moments(sample - 1.0)).statistic
        fit = diststat.fit_transform_spec(sample)
        assert fit.jb_statistic <= raw_jb + 1e-9

    def test_grid_parameters_on_grid(self):
        rng = np.random.default_rng(7)
        sample = np.exp(rng.normal(0.0, 0.5, size=500))
        fit = diststat.fit_transform_spec(sample)
        s = fit.spec
        if s.step1_family == "log10-shift":
            assert -0.2 <= s.step1_param <= 0.2
            assert round(s.step1_param / 0.01) \
                == pytest.approx(s.step1_param / 0.01, abs=1e-6)
        else:
            assert -8.0 <= s.step1_param <= 8.0
        assert -2.0 <= s.step2_power <= 3.0

    def test_already_normal_keeps_small_jb(self):
        rng = np.random.default_rng(42)
        sample = rng.normal(10.0, 1.0, size=3000)
        fit = diststat.fit_transform_spec(sample)
        m = diststat.moments(
            diststat.apply_transform_array(sample, fit.spec))
        assert diststat.jarque_bera(m).statistic == pytest.approx(
            fit.jb_statistic, rel=1e-9)
        assert fit.jb_statistic < 20.0

    def test_too_small_sample_rejected(self):
        with pytest.raises(ValueError):
            diststat.fit_transform_spec([1.0, 2.0, 3.0])

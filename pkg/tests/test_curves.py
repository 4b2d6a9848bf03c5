import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sulfexp.curves import (
    ExpansionSeries,
    cluster_features,
    failure_point,
    smooth,
    smoothing_weights,
)
from sulfexp.errors import (
    InvalidAlpha,
    NonPositiveTrend,
    TooFewSamples,
    ValidationError,
)


def series(ts, es, mid="s"):
    return ExpansionSeries(mixture_id=mid, samples=tuple(zip(ts, es)))


def linear_ramp(slope, ts, mid="ramp"):
    return series(ts, [slope * t for t in ts], mid=mid)


class TestSeriesValidation:
    def test_times_must_increase(self):
        with pytest.raises(ValidationError):
            series([0.0, 1.0, 1.0], [0.0, 0.1, 0.2])

    def test_negative_values_kept_and_flagged(self):
        s = series([0.0, 1.0, 2.0], [0.0, -0.01, 0.02])
        assert s.has_negative_values
        assert s.values[1] == -0.01


class TestSmooth:
    def test_constant_series_fixed_point(self):
        s = series([0.0, 1.0, 2.5, 7.0], [3.0] * 4)
        for alpha in (0.0, 0.3, 0.5, 1.0):
            assert np.array_equal(smooth(s, alpha).values, s.values)

    def test_uniform_spacing_hand_value(self):
        # weights 0.35 / 0.3 / 0.35 on (0, 1, 0) give 0.3 in the middle
        s = series([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])
        out = smooth(s, 0.3)
        assert out.values[1] == pytest.approx(0.3, abs=1e-15)
        assert out.values[0] == 0.0 and out.values[2] == 0.0

    def test_nonuniform_spacing_hand_value(self):
        # t = (0, 1, 3): the *following* interval weights the previous sample,
        # so the middle is (2/3)*0.7*0 + 0.3*1 + (1/3)*0.7*0 = 0.3
        s = series([0.0, 1.0, 3.0], [0.0, 1.0, 0.0])
        out = smooth(s, 0.3)
        assert out.values[1] == pytest.approx(0.3, abs=1e-15)

    def test_nonuniform_cross_weighting_direction(self):
        # same spacing, asymmetric values: prev sample must get the *next*
        # interval's share (2/3 of 0.7)
        s = series([0.0, 1.0, 3.0], [1.0, 0.0, 0.0])
        out = smooth(s, 0.3)
        assert out.values[1] == pytest.approx((2 / 3) * 0.7, abs=1e-15)

    def test_alpha_one_is_identity(self):
        rng = np.random.default_rng(0)
        s = series(np.cumsum(rng.uniform(0.5, 2.0, 8)), rng.normal(size=8))
        assert np.array_equal(smooth(s, 1.0).values, s.values)

    def test_endpoints_and_times_preserved(self):
        s = series([0.0, 2.0, 3.0, 9.0], [0.1, 0.4, 0.2, 0.8])
        out = smooth(s, 0.3)
        assert np.array_equal(out.times, s.times)
        assert out.values[0] == s.values[0]
        assert out.values[-1] == s.values[-1]
        assert len(out) == len(s)

    def test_affine_series_fixed_point_any_spacing(self):
        ts = [0.0, 1.0, 1.5, 4.0, 4.25, 10.0]
        s = series(ts, [2.0 * t + 0.7 for t in ts])
        out = smooth(s, 0.3)
        assert np.allclose(out.values, s.values, atol=1e-14)

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            smooth(series([0.0, 1.0], [0.0, 0.1]))

    def test_alpha_out_of_range(self):
        s = series([0.0, 1.0, 2.0], [0.0, 0.1, 0.2])
        with pytest.raises(InvalidAlpha):
            smooth(s, 1.5)
        with pytest.raises(InvalidAlpha):
            smooth(s, -0.1)

    @settings(max_examples=200)
    @given(
        alpha=st.floats(min_value=0.0, max_value=1.0),
        dt_prev=st.floats(min_value=1e-3, max_value=1e3),
        dt_next=st.floats(min_value=1e-3, max_value=1e3),
    )
    def test_weights_sum_to_one(self, alpha, dt_prev, dt_next):
        assert sum(smoothing_weights(alpha, dt_prev, dt_next)) == pytest.approx(1.0, abs=1e-12)


class TestFailurePoint:
    def test_linear_ramp_crossing(self):
        s = linear_ramp(0.025, np.arange(0.0, 41.0, 5.0))
        fp = failure_point(s, 0.5)
        assert fp.t_fail == pytest.approx(20.0, abs=1e-12)
        assert fp.slope == pytest.approx(0.025, abs=1e-12)
        assert not fp.censored

    def test_censored_extrapolation(self):
        # ends at 0.4 rising 0.01/yr over (35, 40): crossing at 40 + 0.1/0.01
        s = series([30.0, 35.0, 40.0], [0.3, 0.35, 0.4])
        fp = failure_point(s, 0.5)
        assert fp.censored
        assert fp.t_fail == pytest.approx(50.0, abs=1e-9)
        assert fp.slope == pytest.approx(0.01, abs=1e-12)

    def test_first_sample_already_beyond_threshold(self):
        s = series([2.0, 4.0], [0.6, 0.9])
        fp = failure_point(s, 0.5)
        assert fp.t_fail == 2.0
        assert fp.slope == pytest.approx(0.15)
        assert not fp.censored

    def test_extrapolation_capped(self):
        s = series([0.0, 20.0, 40.0], [0.0, 1e-5, 2e-5])
        fp = failure_point(s, 0.5)
        assert fp.censored
        assert fp.t_fail == 200.0

    def test_flat_series_has_no_crossing(self):
        s = series([0.0, 10.0, 20.0], [0.0, 0.0, 0.0])
        with pytest.raises(NonPositiveTrend):
            failure_point(s, 0.5)

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            ts = np.cumsum(rng.uniform(0.5, 3.0, 10))
            vals = np.cumsum(rng.uniform(0.01, 0.1, 10))
            s = series(ts, vals)
            lows = failure_point(s, 0.3).t_fail
            highs = failure_point(s, 0.6).t_fail
            assert highs >= lows


class TestClusterFeatures:
    def test_linear_ramps(self):
        ts = np.arange(0.0, 41.0, 5.0)
        assert np.allclose(cluster_features(linear_ramp(0.025, ts)), [20.0, 0.025])
        assert np.allclose(cluster_features(linear_ramp(0.1, ts)), [5.0, 0.1])

    def test_censored_series_features(self):
        s = series([30.0, 35.0, 40.0], [0.3, 0.35, 0.4])
        assert np.allclose(cluster_features(s), [50.0, 0.01])

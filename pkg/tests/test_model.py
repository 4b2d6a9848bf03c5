import dataclasses
import math

import numpy as np
import pytest

from sulfexp.curves import ExpansionSeries
from sulfexp.dataio import generate_synthetic
from sulfexp.errors import (
    AlreadyFailed,
    EmptyGroup,
    MissingField,
    NegativeTime,
    NonIncreasing,
    NonPositiveTrend,
    ValidationError,
)
from sulfexp.mixtures import GroupLabel, Mixture
from sulfexp.model import (
    PipelineConfig,
    classify_mixture,
    fit_pipeline,
    default_bundle,
    predict_curve,
    predict_expansion,
    predicted_failure_time,
    refit_r2_report,
    validate_holdout,
)

LL, ML, HN = GroupLabel.LL, GroupLabel.ML, GroupLabel.HN


class TestDefaultBundle:
    def test_shipped_coefficients(self):
        b = default_bundle()
        assert b.models[LL].coefficients.tolist() == [0.0157, 0.0305]
        assert b.models[ML].coefficients.tolist() == [0.0293, 0.000975, 0.0216]
        assert b.models[HN].coefficients.tolist() == [11.20, -5.68, -3.66]
        assert b.models[HN].form == "log-linear"
        assert b.models[LL].form == "linear"

    def test_shipped_boundaries(self):
        b = default_bundle()
        assert b.boundary_first.weights.tolist() == [1.0, 1.241]
        assert b.boundary_first.bias == -8.697
        assert b.boundary_second.weights.tolist() == [1.0, 387.3]
        assert b.boundary_second.bias == -233.6
        assert b.boundary_first_simplified.bias == -8.0
        assert b.failure_threshold == 0.5
        assert b.provenance == "default"

    def test_log_linear_only_for_hn(self):
        b = default_bundle()
        for g, model in b.models.items():
            assert (model.form == "log-linear") == (g is HN)


class TestClassifyMixture:
    def test_simplified_rule_examples(self):
        assert classify_mixture(Mixture(id="a", wc=0.5, c3a=9.0, c3s=40.0)) is HN
        assert classify_mixture(Mixture(id="b", wc=0.481, c3a=5.1, c3s=50.0)) is ML
        assert classify_mixture(Mixture(id="c", wc=0.45, c3a=5.0, c3s=55.0)) is LL

    def test_raw_first_boundary(self):
        mix = Mixture(id="a", wc=0.5, c3a=10.0, c3s=40.0)
        assert classify_mixture(mix, use_simplified_first=False) is HN

    def test_simplified_threshold_is_strict(self):
        # c3a exactly 8 goes to the linear groups
        mix = Mixture(id="edge", wc=0.481, c3a=8.0, c3s=50.0)
        assert classify_mixture(mix) in (ML, LL)

    def test_second_boundary_tie_is_ml(self):
        # choose c3s so the decision value is exactly 0
        wc = 0.5
        c3s = 233.6 - 387.3 * wc
        mix = Mixture(id="tie", wc=wc, c3a=5.0, c3s=c3s)
        assert classify_mixture(mix) is ML

    def test_missing_field(self):
        with pytest.raises(MissingField):
            classify_mixture(Mixture(id="x", wc=0.5))

    def test_depends_only_on_classification_fields(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            wc = rng.uniform(0.41, 0.6)
            c3a = rng.uniform(1.0, 12.0)
            c3s = rng.uniform(20.0, 70.0)
            base = classify_mixture(Mixture(id="b", wc=wc, c3a=c3a, c3s=c3s))
            perturbed = classify_mixture(Mixture(
                id="p", wc=wc, c3a=c3a, c3s=c3s,
                c2s=rng.uniform(0, 100), c4af=rng.uniform(0, 100),
                cement_content=rng.uniform(0, 1), air=rng.uniform(0, 100),
            ))
            assert base is perturbed

    def test_exhaustive_single_label(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            mix = Mixture(id="r", wc=rng.uniform(0.3, 0.7),
                          c3a=rng.uniform(0, 14), c3s=rng.uniform(0, 100))
            assert classify_mixture(mix) in (HN, ML, LL)


class TestPredictExpansion:
    def test_ll_hand_evaluation(self):
        got = predict_expansion(Mixture(id="1000", wc=0.49), LL, t=40.0)
        assert got == pytest.approx(0.0157 * 0.49 * 40 + 0.0305, rel=1e-12)

    def test_ml_hand_evaluation(self):
        got = predict_expansion(Mixture(id="1018", wc=0.481, c3a=5.1), ML, t=20.0)
        assert got == pytest.approx(0.402916, rel=1e-9)

    def test_hn_hand_evaluation(self):
        got = predict_expansion(Mixture(id="1033", cement_content=0.589), HN, t=5.0)
        assert got == pytest.approx(math.exp(11.20 * 0.589 * 5 - 5.68 * 5 - 3.66), rel=1e-9)
        assert got == pytest.approx(2.5194, rel=1e-4)

    def test_negative_time(self):
        with pytest.raises(NegativeTime):
            predict_expansion(Mixture(id="x", wc=0.5), LL, t=-1.0)

    def test_missing_field(self):
        with pytest.raises(MissingField):
            predict_expansion(Mixture(id="x", wc=0.5), HN, t=1.0)

    def test_linear_groups_affine_in_time(self):
        mix = Mixture(id="x", wc=0.52, c3a=6.0)
        for group in (LL, ML):
            values = [predict_expansion(mix, group, t=t) for t in np.arange(0, 41, 2.0)]
            second = np.diff(values, n=2)
            assert np.abs(second).max() <= 1e-12

    def test_hn_log_affine_in_time(self):
        mix = Mixture(id="x", cement_content=0.6)
        values = [predict_expansion(mix, HN, t=t) for t in np.arange(0, 10.5, 0.5)]
        second = np.diff(np.log(values), n=2)
        assert np.abs(second).max() <= 1e-10

    def test_monotone_in_wc_and_c3a(self):
        t = 15.0
        for group in (LL, ML):
            lo = predict_expansion(Mixture(id="a", wc=0.45, c3a=5.0), group, t=t)
            hi = predict_expansion(Mixture(id="b", wc=0.55, c3a=5.0), group, t=t)
            assert hi > lo
        lo = predict_expansion(Mixture(id="a", wc=0.5, c3a=4.0), ML, t=t)
        hi = predict_expansion(Mixture(id="b", wc=0.5, c3a=7.0), ML, t=t)
        assert hi > lo


class TestPredictCurve:
    def test_ll_sampled_curve(self):
        series = predict_curve(Mixture(id="1000", wc=0.49, c3a=5.0, c3s=40.0),
                               horizon=40.0, step=10.0)
        assert series.group == "LL"
        expected = [0.0157 * 0.49 * t + 0.0305 for t in (0, 10, 20, 30, 40)]
        assert np.allclose(series.values, expected, rtol=1e-12)
        assert series.times.tolist() == [0.0, 10.0, 20.0, 30.0, 40.0]

    def test_step_beyond_horizon_clamps(self):
        series = predict_curve(Mixture(id="x", wc=0.49, c3a=5.0, c3s=40.0),
                               horizon=40.0, step=50.0)
        assert series.times.tolist() == [0.0, 40.0]

    def test_unaligned_horizon_excluded(self):
        series = predict_curve(Mixture(id="x", wc=0.49, c3a=5.0, c3s=40.0),
                               horizon=40.0, step=7.0)
        assert series.times.tolist() == [0.0, 7.0, 14.0, 21.0, 28.0, 35.0]

    def test_time_zero_is_intercept(self):
        series = predict_curve(Mixture(id="x", wc=0.49, c3a=5.0, c3s=40.0),
                               horizon=10.0, step=10.0)
        assert series.values[0] == pytest.approx(0.0305, abs=1e-15)

    def test_bad_grid(self):
        with pytest.raises(ValidationError):
            predict_curve(Mixture(id="x", wc=0.49, c3a=5.0, c3s=40.0), step=0.0)


class TestPredictedFailureTime:
    def test_ll_closed_form(self):
        t = predicted_failure_time(Mixture(id="1000", wc=0.49), group=LL)
        assert t == pytest.approx((0.5 - 0.0305) / (0.0157 * 0.49), rel=1e-12)
        assert t == pytest.approx(61.03, abs=0.005)

    def test_ml_closed_form(self):
        t = predicted_failure_time(Mixture(id="1018", wc=0.481, c3a=5.1), group=ML)
        assert t == pytest.approx(25.09, abs=0.005)

    def test_hn_closed_form(self):
        t = predicted_failure_time(Mixture(id="1033", cement_content=0.589), group=HN)
        assert t == pytest.approx((math.log(0.5) + 3.66) / (11.20 * 0.589 - 5.68), rel=1e-12)
        assert t == pytest.approx(3.236, abs=0.001)

    def test_non_increasing_hn(self):
        # 11.20 * cc - 5.68 <= 0 for cc <= 0.5071: no failure ever predicted
        with pytest.raises(NonIncreasing):
            predicted_failure_time(Mixture(id="x", cement_content=0.45), group=HN)

    def test_already_failed(self):
        bundle = dataclasses.replace(default_bundle(), failure_threshold=0.02)
        with pytest.raises(AlreadyFailed):
            predicted_failure_time(Mixture(id="x", wc=0.49), bundle, group=LL)

    def test_inversion_consistency_across_groups(self):
        rng = np.random.default_rng(7)
        bundle = default_bundle()
        for _ in range(100):
            group = (HN, ML, LL)[int(rng.integers(3))]
            mix = Mixture(
                id="r",
                wc=rng.uniform(0.42, 0.6),
                c3a=rng.uniform(3.0, 12.0),
                cement_content=rng.uniform(0.55, 0.65),
            )
            t_fail = predicted_failure_time(mix, bundle, group=group)
            back = predict_expansion(mix, group, bundle, t_fail)
            assert back == pytest.approx(0.5, abs=1e-9)


class TestFitPipeline:
    def test_noiseless_round_trip_small(self):
        ds = generate_synthetic((6, 8, 6), noise=0.0, seed=11)
        bundle = fit_pipeline(ds.pairs, PipelineConfig())
        assert np.abs(bundle.models[LL].coefficients - [0.0157, 0.0305]).max() <= 1e-8
        assert bundle.diagnostics.cluster_sizes == {HN: 6, ML: 8, LL: 6}
        assert all(bundle.diagnostics.assignments[m] is lab for m, lab in ds.labels.items())
        assert not bundle.partial
        assert bundle.provenance.startswith("fitted")

    def test_single_group_k1_partial(self):
        ds = generate_synthetic((0, 0, 8), noise=0.0, seed=3)
        bundle = fit_pipeline(ds.pairs, PipelineConfig(k=1))
        assert bundle.partial
        assert bundle.boundary_first is None
        assert bundle.boundary_second is None
        assert len(bundle.models) == 1

    def test_constant_zero_series_surfaces_trend_error(self):
        pairs = []
        for i in range(4):
            mix = Mixture(id=f"z{i}", wc=0.5, c3a=5.0, c3s=50.0, cement_content=0.6)
            samples = tuple((float(t), 0.0) for t in range(0, 45, 5))
            pairs.append((mix, ExpansionSeries(mixture_id=mix.id, samples=samples)))
        with pytest.raises(NonPositiveTrend) as excinfo:
            fit_pipeline(pairs, PipelineConfig())
        assert "z0" in str(excinfo.value)
        assert "features" in str(excinfo.value)

    def test_too_small_cluster_is_an_error(self):
        # 2 archetypes only, k = 3: some cluster gets < 2 members
        ds = generate_synthetic((1, 8, 8), noise=0.0, seed=5)
        with pytest.raises(EmptyGroup):
            fit_pipeline(ds.pairs, PipelineConfig())

    def test_deterministic(self):
        ds = generate_synthetic((6, 8, 6), noise=0.02, seed=9)
        b1 = fit_pipeline(ds.pairs, PipelineConfig(seed=5))
        b2 = fit_pipeline(ds.pairs, PipelineConfig(seed=5))
        assert b1 == b2

    def test_data_driven_variables_mode(self):
        ds = generate_synthetic((6, 8, 6), noise=0.0, seed=11)
        bundle = fit_pipeline(ds.pairs, PipelineConfig(data_driven_variables=True))
        for model in bundle.models.values():
            assert model.variable_roles[-1] == "const"
            assert len(model.variable_roles) >= 2


class TestValidateHoldout:
    def holdout(self, n_hn=4, n_ml=4, n_ll=7, seed=21):
        ds = generate_synthetic((n_hn, n_ml, n_ll), noise=0.0, seed=seed)
        return ds

    def test_perfect_agreement(self):
        ds = self.holdout()
        report = validate_holdout(default_bundle(), ds.pairs, ds.labels)
        assert report.agreement == 1.0

    def test_planted_disagreements_bookkeeping(self):
        ds = self.holdout()
        pairs = list(ds.pairs)
        # push three LL mixtures across the first boundary: reference stays LL
        flipped = 0
        for i, (mix, series) in enumerate(pairs):
            if ds.labels[mix.id] is LL and flipped < 3:
                pairs[i] = (dataclasses.replace(mix, c3a=9.5), series)
                flipped += 1
        report = validate_holdout(default_bundle(), pairs, ds.labels)
        assert flipped == 3
        assert report.agreement == pytest.approx(12 / 15)
        assert report.confusion[(LL, HN)] == 3

    def test_all_mislabeled(self):
        ds = self.holdout()
        wrong = {mid: (HN if lab is not HN else ML) for mid, lab in ds.labels.items()}
        report = validate_holdout(default_bundle(), ds.pairs, wrong)
        assert report.agreement == 0.0

    def test_empty_holdout(self):
        with pytest.raises(ValidationError):
            validate_holdout(default_bundle(), [], {})


class TestRefitR2Report:
    def test_zero_delta_when_boundaries_match_clustering(self):
        ds = generate_synthetic((6, 8, 6), noise=0.0, seed=11)
        bundle = fit_pipeline(ds.pairs, PipelineConfig())
        report = refit_r2_report(bundle, ds.pairs)
        for refit in report.values():
            assert refit.delta == pytest.approx(0.0, abs=1e-12)

    def test_small_delta_with_one_planted_misclassification(self):
        ds = generate_synthetic((6, 16, 6), noise=0.02, seed=13)
        bundle = fit_pipeline(ds.pairs, PipelineConfig())
        pairs = list(ds.pairs)
        for i, (mix, series) in enumerate(pairs):
            if ds.labels[mix.id] is LL:
                # push one slow mixture across the second boundary into ML;
                # its linear series only mildly dilutes the pooled ML fit
                pairs[i] = (dataclasses.replace(mix, c3s=233.6 - 387.3 * mix.wc + 5.0), series)
                break
        report = refit_r2_report(bundle, pairs)
        for refit in report.values():
            assert abs(refit.delta) <= 0.05

    def test_empty_reassigned_group(self):
        ds = generate_synthetic((6, 8, 6), noise=0.0, seed=11)
        bundle = fit_pipeline(ds.pairs, PipelineConfig())
        # force everything to the HN side of the simplified first boundary
        broken = dataclasses.replace(
            bundle,
            boundary_first_simplified=dataclasses.replace(
                bundle.boundary_first_simplified, bias=0.0),
        )
        with pytest.raises(EmptyGroup):
            refit_r2_report(broken, ds.pairs)

    def test_requires_fitted_bundle(self):
        ds = generate_synthetic((3, 3, 3), noise=0.0, seed=2)
        with pytest.raises(ValidationError):
            refit_r2_report(default_bundle(), ds.pairs)

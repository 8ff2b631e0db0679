"""Experiment orchestration: determinism, conservation, parallel equivalence."""

import numpy as np
import pytest

from iwrisk import (
    ExperimentConfig,
    run_model_selection,
    run_risk_distribution,
    run_weight_histogram,
)

SMALL = ExperimentConfig(master_seed=7, repetitions=300, sample_sizes=(2, 8))


class TestExperimentConfig:
    def test_defaults_reproduce_reference_setting(self):
        cfg = ExperimentConfig()
        assert cfg.repetitions == 10_000
        assert cfg.sample_sizes == (2, 4, 8, 16, 32, 64)
        assert cfg.sigma_source == 0.75
        assert cfg.sigma_target == 1.0
        assert cfg.theta_fixed == pytest.approx(0.28209479177387814, rel=1e-15)
        assert (cfg.lambda_grid.min, cfg.lambda_grid.max, cfg.lambda_grid.step) == (
            -5.0, 5.0, 0.01,
        )
        assert cfg.selection_method == "grid"
        assert cfg.bins == 50
        assert cfg.weight_sample_size == 10_000

    @pytest.mark.parametrize("kwargs", [
        {"repetitions": 0},
        {"sample_sizes": ()},
        {"sample_sizes": (4, 0)},
        {"sigma_source": 0.0},
        {"sigma_target": -1.0},
        {"selection_method": "random"},
        {"bins": 0},
        {"weight_sample_size": 0},
        {"body_tail_risk": "median"},
        {"threads": 0},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            ExperimentConfig(**kwargs)


class TestWeightHistogramExperiment:
    def test_weights_bounded_below_and_skewed(self):
        res = run_weight_histogram(ExperimentConfig())
        assert np.all(res.weights >= 0.75)
        assert res.weights.min() - 0.75 < 1e-3
        assert res.moments.skewness_g1 > 0.0
        assert res.histogram.counts.sum() == 10_000

    def test_equal_domains_collapse_to_unit_weight(self):
        cfg = ExperimentConfig(sigma_source=1.0, sigma_target=1.0,
                               weight_sample_size=500)
        res = run_weight_histogram(cfg)
        assert np.all(res.weights == 1.0)
        assert np.count_nonzero(res.histogram.counts) == 1

    def test_deterministic(self):
        a = run_weight_histogram(SMALL)
        b = run_weight_histogram(SMALL)
        np.testing.assert_array_equal(a.weights, b.weights)


class TestRiskDistributionExperiment:
    def test_deterministic(self):
        a = run_risk_distribution(SMALL)
        b = run_risk_distribution(SMALL)
        for ra, rb in zip(a, b):
            np.testing.assert_array_equal(ra.risks, rb.risks)

    def test_thread_count_does_not_change_results(self):
        serial = run_risk_distribution(SMALL)
        threaded = run_risk_distribution(
            ExperimentConfig(master_seed=7, repetitions=300, sample_sizes=(2, 8),
                             threads=4)
        )
        for rs, rt in zip(serial, threaded):
            np.testing.assert_array_equal(rs.risks, rt.risks)

    def test_sizes_and_records(self):
        results = run_risk_distribution(SMALL)
        assert [r.n for r in results] == [2, 8]
        for res in results:
            records = list(res.records())
            assert len(records) == 300
            assert records[5].rep == 5
            assert records[0].lambda_hat is None
            assert records[0].part is None
            assert records[0].risk == res.risks[0]

    def test_oracles_attached(self):
        res = run_risk_distribution(SMALL)[0]
        assert res.oracle_mean == pytest.approx(0.761267585362157, abs=1e-9)
        assert res.oracle_variance > 0.0
        # third weighted moment diverges in the reference setting
        assert not res.oracle_skewness.converged

    def test_distinct_sizes_use_distinct_streams(self):
        a, b = run_risk_distribution(SMALL)
        assert not np.array_equal(a.risks, b.risks)


class TestModelSelectionExperiment:
    def test_deterministic(self):
        a = run_model_selection(SMALL)
        b = run_model_selection(SMALL)
        for ra, rb in zip(a, b):
            np.testing.assert_array_equal(ra.lambda_hats, rb.lambda_hats)
            np.testing.assert_array_equal(ra.risks_min, rb.risks_min)
            np.testing.assert_array_equal(ra.part, rb.part)

    def test_thread_count_does_not_change_results(self):
        serial = run_model_selection(SMALL)
        threaded = run_model_selection(
            ExperimentConfig(master_seed=7, repetitions=300, sample_sizes=(2, 8),
                             threads=3)
        )
        for rs, rt in zip(serial, threaded):
            np.testing.assert_array_equal(rs.lambda_hats, rt.lambda_hats)
            np.testing.assert_array_equal(rs.part, rt.part)

    def test_record_conservation(self):
        for res in run_model_selection(SMALL):
            body = int(np.count_nonzero(res.part == "body"))
            tail = int(np.count_nonzero(res.part == "tail"))
            assert body == res.body_summary.count
            assert tail == res.tail_summary.count
            assert body + tail + res.degenerate_count == 300
            assert body == res.split.body_indices.size
            assert tail == res.split.tail_indices.size

    def test_split_threshold_is_mean_of_split_risks(self):
        res = run_model_selection(SMALL)[0]
        # degenerate-free run: threshold is the mean over all repetitions
        assert res.degenerate_count == 0
        recomputed = np.concatenate([
            res.split.body_indices, res.split.tail_indices,
        ])
        assert recomputed.size == 300

    def test_minimized_split_mode(self):
        cfg = ExperimentConfig(master_seed=7, repetitions=300, sample_sizes=(2,),
                               body_tail_risk="minimized")
        res = run_model_selection(cfg)[0]
        split = res.risks_min[res.split.body_indices]
        assert np.all(split < res.split.threshold)
        assert res.split.threshold == pytest.approx(res.risks_min.mean(), rel=1e-12)

    def test_closed_form_method(self):
        cfg = ExperimentConfig(master_seed=7, repetitions=200, sample_sizes=(4,),
                               selection_method="closed_form")
        res = run_model_selection(cfg)[0]
        assert res.degenerate_count == 0
        assert np.all(np.isfinite(res.lambda_hats))

    def test_records_have_selection_fields(self):
        res = run_model_selection(SMALL)[0]
        rec = next(res.records())
        assert rec.experiment == "model_selection"
        assert rec.lambda_hat is not None
        assert rec.part in ("body", "tail")

    def test_degenerate_repetition_flagged_and_excluded(self, monkeypatch):
        """An all-zero-inputs draw (measure zero in the wild) must be flagged,
        kept out of the body/tail split, and excluded from the summaries."""
        from iwrisk import LabeledDataset, draw_dataset as real_draw
        from iwrisk import experiments as exp_mod

        def rigged_draw(problem, domain, n, seed):
            if seed.stream_id == 3:
                return LabeledDataset(xs=np.zeros(n), ys=np.ones(n), domain=domain)
            return real_draw(problem, domain, n, seed)

        monkeypatch.setattr(exp_mod, "draw_dataset", rigged_draw)
        cfg = ExperimentConfig(master_seed=7, repetitions=20, sample_sizes=(4,),
                               selection_method="closed_form")
        res = run_model_selection(cfg)[0]
        assert res.degenerate_count == 1
        assert res.part[3] == "degenerate"
        assert np.isnan(res.lambda_hats[3]) and np.isnan(res.risks_min[3])
        assert res.body_summary.count + res.tail_summary.count == 19
        assert 3 not in res.split.body_indices
        assert 3 not in res.split.tail_indices
        assert np.isfinite(res.body_summary.mean_lambda)

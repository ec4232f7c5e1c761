import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from core.exceptions import ConfigurationException, MetricException
from estimators.types import ActivityMap, Estimator
from metrics.ssim import SsimParams, ssi_map
from metrics.statistics import (
    Roi,
    activity_time_series,
    aligned_block_means,
    estimate_histogram,
    joint_histograms,
    region_contrast,
    roi_mean,
)


def amap(values, valid=None):
    values = np.asarray(values, dtype=np.float64)
    if valid is None:
        valid = np.ones(values.shape, dtype=bool)
    return ActivityMap(values, Estimator.S1, 10, valid)


@pytest.fixture
def textured():
    rng = np.random.default_rng(77)
    return rng.random((32, 40)) * 20.0 + 5.0


class TestSsi:
    def test_identical_maps(self, textured):
        report = ssi_map(amap(textured), amap(textured))
        assert report.mean_ssi == 1.0
        assert np.all(report.ssi_map == 1.0)

    def test_symmetric(self, textured):
        other = textured + np.random.default_rng(1).normal(0.0, 2.0, textured.shape)
        ab = ssi_map(textured, other)
        ba = ssi_map(other, textured)
        np.testing.assert_array_equal(ab.ssi_map, ba.ssi_map)
        assert ab.mean_ssi == ba.mean_ssi

    def test_offset_lowers_similarity(self, textured):
        assert ssi_map(textured, textured + 10.0).mean_ssi < 1.0

    def test_noise_lowers_similarity_more(self, textured):
        rng = np.random.default_rng(2)
        mild = ssi_map(textured, textured + rng.normal(0.0, 1.0, textured.shape)).mean_ssi
        strong = ssi_map(textured, textured + rng.normal(0.0, 8.0, textured.shape)).mean_ssi
        assert strong < mild < 1.0

    def test_bounds(self, textured):
        report = ssi_map(textured, -textured)
        values = report.ssi_map[report.valid_mask]
        assert values.min() >= -1.0
        assert values.max() <= 1.0

    def test_dimension_mismatch(self, textured):
        with pytest.raises(MetricException):
            ssi_map(textured, textured[:, :-1])

    def test_zero_range(self):
        flat = np.full((8, 8), 3.0)
        report = ssi_map(flat, flat)
        assert report.mean_ssi == 1.0
        assert report.data_range == 0.0
        with pytest.raises(MetricException):
            ssi_map(flat, np.full((8, 8), 4.0), SsimParams(data_range=0.0))

    def test_explicit_data_range(self, textured):
        other = textured * 0.9
        report = ssi_map(textured, other, SsimParams(data_range=100.0))
        assert report.data_range == 100.0
        assert report.summary()["data_range"] == 100.0

    @pytest.mark.parametrize("window", [4, 1, 10])
    def test_window_must_be_odd(self, window):
        with pytest.raises(ValidationError):
            SsimParams(window=window)

    def test_default_params(self):
        params = SsimParams()
        assert params.window == 11
        assert params.constants(1.0) == pytest.approx((1e-4, 9e-4))

    def test_invalid_pixels_are_excluded(self, textured):
        valid = np.ones(textured.shape, dtype=bool)
        valid[:, :5] = False
        wrecked = textured.copy()
        wrecked[:, :5] = 1e6
        report = ssi_map(amap(textured, valid), amap(wrecked, valid))
        assert report.mean_ssi == 1.0
        assert np.all(np.isnan(report.ssi_map[:, :5]))
        assert report.valid_mask.sum() == valid.sum()

    def test_nan_pixels_in_arrays_are_invalid(self, textured):
        holey = textured.copy()
        holey[0, 0] = np.nan
        report = ssi_map(textured, holey)
        assert not report.valid_mask[0, 0]
        assert np.isfinite(report.mean_ssi)

    def test_no_shared_valid_pixels(self):
        a = amap(np.ones((4, 4)), np.zeros((4, 4), dtype=bool))
        with pytest.raises(MetricException):
            ssi_map(a, a)

    def test_non_finite_valid_values(self):
        values = np.ones((4, 4))
        values[1, 1] = np.inf
        with pytest.raises(MetricException):
            ssi_map(amap(values), amap(np.ones((4, 4))))


class TestHistograms:
    def test_counts_cover_valid_pixels(self, textured):
        valid = textured > 10.0
        hist = estimate_histogram(amap(textured, valid), n_bins=16)
        assert hist.total == valid.sum()
        assert hist.edges[0] == textured[valid].min()
        assert hist.edges[-1] == textured[valid].max()
        assert hist.mean == pytest.approx(textured[valid].mean())
        assert len(hist.to_frame()) == 16

    def test_explicit_range_clips_into_edge_bins(self):
        hist = estimate_histogram(amap([[0.0, 5.0, 10.0]]), n_bins=2, value_range=(2.0, 8.0))
        assert hist.counts.tolist() == [1, 2]

    def test_density_integrates_to_one(self, textured):
        hist = estimate_histogram(amap(textured), n_bins=10)
        assert (hist.density() * np.diff(hist.edges)).sum() == pytest.approx(1.0)

    def test_linear_scaling(self, textured):
        base = estimate_histogram(amap(textured), n_bins=8)
        scaled = estimate_histogram(amap(textured).scaled(3.0), n_bins=8)
        np.testing.assert_array_equal(base.counts, scaled.counts)
        np.testing.assert_allclose(scaled.edges, 3.0 * base.edges)
        assert scaled.std == pytest.approx(3.0 * base.std)

    def test_joint_histograms_share_edges(self, textured):
        hists = joint_histograms([amap(textured), amap(textured * 0.5)], n_bins=12)
        np.testing.assert_array_equal(hists[0].edges, hists[1].edges)
        assert joint_histograms([]) == []

    def test_empty_map(self):
        with pytest.raises(MetricException):
            estimate_histogram(amap(np.ones((2, 2)), np.zeros((2, 2), dtype=bool)))


class TestRoi:
    def test_parse_and_format(self):
        roi = Roi.parse("3, 4, 10, 6")
        assert roi == Roi(3, 4, 10, 6)
        assert str(roi) == "3,4,10,6"

    @pytest.mark.parametrize("text", ["1,2,3", "a,b,c,d", "0,0,0,5", "-1,0,2,2"])
    def test_bad_roi(self, text):
        with pytest.raises(ConfigurationException):
            Roi.parse(text)

    def test_centered(self):
        assert Roi.centered((582, 780), 100) == Roi(340, 241, 100, 100)
        assert Roi.centered((10, 10), 20) == Roi(0, 0, 20, 20)

    def test_roi_mean(self):
        values = np.arange(20, dtype=float).reshape(4, 5)
        assert roi_mean(amap(values), Roi(1, 1, 2, 2)) == pytest.approx((6 + 7 + 11 + 12) / 4)

    def test_roi_skips_invalid(self):
        values = np.array([[1.0, 100.0], [3.0, 5.0]])
        valid = np.array([[True, False], [True, True]])
        assert roi_mean(amap(values, valid), Roi(0, 0, 2, 2)) == 3.0

    def test_roi_outside_map(self):
        with pytest.raises(MetricException):
            roi_mean(amap(np.ones((4, 4))), Roi(2, 2, 3, 3))

    def test_roi_without_valid_pixels(self):
        with pytest.raises(MetricException):
            roi_mean(amap(np.ones((2, 2)), np.zeros((2, 2), dtype=bool)), Roi(0, 0, 2, 2))

    def test_roi_mean_is_linear(self, textured):
        roi = Roi(2, 3, 10, 8)
        assert roi_mean(amap(textured).scaled(2.5), roi) == pytest.approx(2.5 * roi_mean(amap(textured), roi))


class TestTimeSeries:
    def test_series(self):
        maps = [amap(np.full((4, 4), float(v))) for v in (5, 4, 3)]
        series = activity_time_series(maps, Roi(0, 0, 4, 4))
        assert series.tolist() == [5.0, 4.0, 3.0]
        assert series.index.name == "set"
        assert series.name == "roi_mean"

    def test_empty(self):
        series = activity_time_series([], Roi(0, 0, 1, 1))
        assert series.empty
        assert isinstance(series, pd.Series)

    def test_mixed_dims(self):
        with pytest.raises(MetricException):
            activity_time_series([amap(np.ones((4, 4))), amap(np.ones((4, 5)))], Roi(0, 0, 2, 2))


class TestRegions:
    def test_region_contrast(self):
        values = np.ones((4, 4))
        values[:2] = 3.0
        top = np.zeros((4, 4), dtype=bool)
        top[:2] = True
        assert region_contrast(amap(values), top, ~top) == 3.0

    def test_overlapping_masks(self):
        mask = np.ones((2, 2), dtype=bool)
        with pytest.raises(MetricException):
            region_contrast(amap(np.ones((2, 2))), mask, mask)

    def test_empty_mask(self):
        mask = np.zeros((2, 2), dtype=bool)
        with pytest.raises(MetricException):
            region_contrast(amap(np.ones((2, 2))), mask, ~mask)

    def test_zero_denominator(self):
        values = np.array([[1.0, 0.0]])
        with pytest.raises(MetricException):
            region_contrast(amap(values), np.array([[True, False]]), np.array([[False, True]]))

    def test_aligned_block_means(self):
        values = np.arange(16 * 24, dtype=float).reshape(16, 24)
        mask = np.zeros((16, 24), dtype=bool)
        mask[:8, :16] = True
        mask[8:, 3:11] = True
        means = aligned_block_means(amap(values), mask)
        assert means.shape == (2, 3)
        assert means[0, 0] == pytest.approx(values[:8, :8].mean())
        assert means[0, 1] == pytest.approx(values[:8, 8:16].mean())
        assert np.isnan(means[0, 2])
        assert np.all(np.isnan(means[1]))

    def test_blocks_need_room(self):
        with pytest.raises(MetricException):
            aligned_block_means(amap(np.ones((4, 4))), np.ones((4, 4), dtype=bool))

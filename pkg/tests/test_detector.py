"""Detector readout chain: sampling, classification, calibration, confusion."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockscan import (
    CalibrationError,
    ConfusionMatrix,
    DetectorModel,
    ThresholdSet,
    add_dark_counts,
    calibrate_thresholds,
    classify,
    confusion_matrix,
    sample_pulse_height,
    scan_histogram,
)
from fockscan.detector import gaussian_valley

P0_DARK_002 = 0.9801986733067553  # e^-0.02, frozen from mpmath


def norm_cdf(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


class TestDetectorModel:
    def test_defaults_valid(self):
        det = DetectorModel()
        assert det.gain == 1.0 and det.sigma1 < det.gain / 2

    @pytest.mark.parametrize("kwargs", [
        {"gain": 0.0}, {"sigma1": 0.0}, {"sigma1": 0.6},
        {"sigma0": -0.1}, {"dark_mean": -1.0},
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            DetectorModel(**kwargs)

    def test_peak_width_law(self):
        det = DetectorModel()
        assert det.peak_sigma(0) == det.sigma0
        assert det.peak_sigma(9) == pytest.approx(3 * det.sigma1, rel=1e-15)


class TestThresholdSet:
    def test_rejects_nonincreasing(self):
        with pytest.raises(ValueError):
            ThresholdSet(np.array([0.5, 0.5, 1.5]))

    def test_rejects_nonpositive_first(self):
        with pytest.raises(ValueError):
            ThresholdSet(np.array([0.0, 1.0]))


class TestSamplePulseHeight:
    def test_noiseless_pedestal_is_exactly_zero(self):
        det = DetectorModel(sigma0=0.0)
        rng = np.random.default_rng(1)
        assert sample_pulse_height(0, det, rng) == 0.0

    def test_mean_of_four_photon_peak(self):
        det = DetectorModel()
        rng = np.random.default_rng(2)
        heights = sample_pulse_height(np.full(10**6, 4), det, rng)
        # std of the sample mean is 2*sigma1/1e3
        assert abs(heights.mean() - 4 * det.gain) < 5 * (2 * det.sigma1 / 1e3)

    def test_sqrt_n_broadening(self):
        det = DetectorModel()
        rng = np.random.default_rng(3)
        heights = sample_pulse_height(np.full(10**6, 9), det, rng)
        assert heights.std() == pytest.approx(3 * det.sigma1, rel=0.02)

    def test_rejects_negative_k(self):
        with pytest.raises(ValueError):
            sample_pulse_height(-1, DetectorModel(), np.random.default_rng(0))


class TestAddDarkCounts:
    def test_zero_dark_mean_is_identity(self):
        det = DetectorModel(dark_mean=0.0)
        assert add_dark_counts(2, det, np.random.default_rng(0)) == 2

    def test_vacuum_survival_probability(self):
        det = DetectorModel(dark_mean=0.02)
        rng = np.random.default_rng(4)
        dark = add_dark_counts(np.zeros(10**6, dtype=int), det, rng)
        assert np.mean(dark == 0) == pytest.approx(P0_DARK_002, abs=5e-4)

    def test_empirical_dark_mean(self):
        det = DetectorModel(dark_mean=0.02)
        rng = np.random.default_rng(5)
        dark = add_dark_counts(np.zeros(10**6, dtype=int), det, rng)
        assert abs(dark.mean() - 0.02) < 0.0015


HALF_STEP_LADDER = ThresholdSet(np.arange(7) + 0.5)


class TestClassify:
    def test_between_levels(self):
        # between L_2 (1.5) and L_3 (2.5)
        assert classify(2.1, HALF_STEP_LADDER) == 2

    def test_below_all_levels(self):
        assert classify(-5.0, HALF_STEP_LADDER) == 0

    def test_overflow_recorded_as_top_class(self):
        assert classify(100.0, HALF_STEP_LADDER) == 7

    def test_vectorized(self):
        got = classify(np.array([-1.0, 0.6, 6.2, 400.0]), HALF_STEP_LADDER)
        assert got.tolist() == [0, 1, 6, 7]

    @given(st.lists(st.floats(-5, 15, allow_nan=False), min_size=2, max_size=50))
    @settings(max_examples=100, deadline=None)
    def test_monotone_in_height(self, heights):
        heights = np.sort(np.asarray(heights))
        classes = classify(heights, HALF_STEP_LADDER)
        assert np.all(np.diff(classes) >= 0)


class TestCalibrateThresholds:
    def test_symmetric_peaks_give_midpoint(self):
        level = gaussian_valley(3.0, 0.15, 0.5, 4.0, 0.15, 0.5, xatol=1e-6)
        assert level == pytest.approx(3.5, abs=1e-4)

    def test_degenerate_widths_fall_back_to_midpoint(self):
        det = DetectorModel(sigma1=1e-9, sigma0=0.0)
        levels = calibrate_thresholds(det, 7, ref_mean=3.95).levels
        assert np.allclose(levels, np.arange(7) + 0.5)

    def test_wider_upper_peak_pulls_valley_down(self):
        # equal weights, k=3 -> k=4 boundary at gain 1, sigma1 0.15
        level = gaussian_valley(
            3.0, math.sqrt(3) * 0.15, 0.5, 4.0, 2 * 0.15, 0.5, xatol=1e-6
        )
        # independent oracle: dense-grid argmin of the same mixture
        x = np.linspace(3.0, 4.0, 400001)
        f = (np.exp(-0.5 * ((x - 3) / (math.sqrt(3) * 0.15)) ** 2) / (math.sqrt(3) * 0.15)
             + np.exp(-0.5 * ((x - 4) / 0.3) ** 2) / 0.3)
        assert level == pytest.approx(x[np.argmin(f)], abs=1e-4)
        assert level < 3.5

    def test_levels_interior_and_increasing(self, default_detector):
        levels = calibrate_thresholds(default_detector, 7, ref_mean=3.95).levels
        assert np.all(np.diff(levels) > 0)
        for k, level in enumerate(levels):
            assert k * 1.0 < level < (k + 1) * 1.0

    def test_merged_peaks_raise(self):
        det = DetectorModel(sigma1=0.49)
        with pytest.raises(CalibrationError):
            calibrate_thresholds(det, 7, ref_mean=3.95)


class TestScanHistogram:
    def test_empty_stream(self):
        hist = scan_histogram([], bin_width=0.02)
        assert hist.counts.sum() == 0

    def test_single_peak_mode_near_gain(self):
        det = DetectorModel()
        rng = np.random.default_rng(6)
        heights = sample_pulse_height(np.ones(10**6, dtype=int), det, rng)
        hist = scan_histogram(heights, bin_width=0.02)
        centers = 0.5 * (hist.bin_edges[:-1] + hist.bin_edges[1:])
        mode = centers[np.argmax(hist.counts)]
        assert abs(mode - det.gain) <= 0.02

    def test_poisson_mixture_shows_resolved_peaks(self):
        det = DetectorModel()
        rng = np.random.default_rng(7)
        photons = rng.poisson(3.95, 10**6)
        heights = sample_pulse_height(add_dark_counts(photons, det, rng), det, rng)
        hist = scan_histogram(heights, bin_width=0.02)
        counts = hist.counts.astype(float)
        floor = 0.01 * counts.max()
        maxima = 0
        for i in range(2, counts.size - 2):
            window = counts[i - 2 : i + 3]
            if counts[i] >= floor and counts[i] == window.max() and counts[i] > window.min():
                maxima += np.argmax(window) == 2
        assert maxima >= 4

    def test_rejects_nonpositive_bin_width(self):
        with pytest.raises(ValueError):
            scan_histogram([1.0], bin_width=0.0)


class TestConfusionMatrix:
    def test_vanishing_width_gives_identity(self):
        det = DetectorModel(sigma1=1e-12, sigma0=0.0)
        thresholds = ThresholdSet(np.arange(7) + 0.5)
        cm = confusion_matrix(det, thresholds)
        assert np.allclose(cm.p, np.eye(8), atol=1e-15)

    def test_rows_sum_to_one(self, default_detector, default_thresholds):
        cm = confusion_matrix(default_detector, default_thresholds)
        assert np.allclose(cm.p.sum(axis=1), 1.0, atol=1e-9)

    def test_diagonal_degrades_with_k(self, default_detector, default_thresholds):
        cm = confusion_matrix(default_detector, default_thresholds)
        diag = np.diag(cm.p)
        assert np.all(np.diff(diag) <= 1e-12)
        # independent Gaussian-CDF oracle for p11 and p44
        levels = default_thresholds.levels
        s1, s4 = 0.15, 2 * 0.15
        p11 = norm_cdf((levels[1] - 1) / s1) - norm_cdf((levels[0] - 1) / s1)
        p44 = norm_cdf((levels[4] - 4) / s4) - norm_cdf((levels[3] - 4) / s4)
        assert cm.p[1, 1] == pytest.approx(p11, rel=1e-12)
        assert cm.p[4, 4] == pytest.approx(p44, rel=1e-12)
        assert cm.p[1, 1] > cm.p[4, 4]

    def test_monte_carlo_agreement(self, default_detector, default_thresholds):
        cm = confusion_matrix(default_detector, default_thresholds)
        n = 10**5
        rng = np.random.default_rng(8)
        for k in range(8):
            heights = sample_pulse_height(np.full(n, k), default_detector, rng)
            classes = classify(heights, default_thresholds)
            freq = np.bincount(classes, minlength=8) / n
            sigma = np.sqrt(cm.p[k] * (1 - cm.p[k]) / n)
            assert np.all(np.abs(freq - cm.p[k]) <= 4 * sigma + 1e-12)

    def test_mismatched_k_max_rejected(self, default_detector, default_thresholds):
        with pytest.raises(ValueError):
            confusion_matrix(default_detector, default_thresholds, k_max=9)

    def test_invariant_rejects_bad_rows(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(np.array([[0.5, 0.4], [0.0, 1.0]]))


class TestNoiselessChainIdentity:
    def test_chain_is_identity_below_top_class(self, ideal_detector):
        thresholds = calibrate_thresholds(ideal_detector, 7, ref_mean=3.95)
        rng = np.random.default_rng(9)
        ks = np.arange(8)
        true_k = add_dark_counts(ks, ideal_detector, rng)
        heights = sample_pulse_height(true_k, ideal_detector, rng)
        assert classify(heights, thresholds).tolist() == ks.tolist()

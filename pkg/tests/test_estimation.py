"""Brightness fitting, count correction, and phase-sensitivity formulas."""

import math

import numpy as np
import pytest

from fockscan import (
    ConfusionMatrix,
    DetectorModel,
    ScanResult,
    ThresholdSet,
    calibrate_thresholds,
    confusion_matrix,
    correct_counts,
    default_phase_grid,
    expected_rate,
    fit_nmax,
    optimal_phase,
    run_scan,
    sensitivity_curve,
    sensitivity_fock,
    sensitivity_mean,
    singular_phase,
)

from conftest import ideal_config

FIG4_BRIGHTNESSES = [0.463, 0.99, 1.99, 3.95, 7.18]


def analytic_result(n_max, n_points=100, n_pulses=10**6, k_max=12, phi0=0.0):
    """Noiseless ScanResult whose count columns follow the ideal rates."""
    phases = default_phase_grid(n_points)
    probs = np.stack([
        expected_rate(k, n_max, phases - phi0) for k in range(k_max + 1)
    ], axis=1)
    counts = np.rint(probs * n_pulses).astype(np.int64)
    # absorb rounding into the vacuum column so rows still sum to n_pulses
    counts[:, 0] += n_pulses - counts.sum(axis=1)
    return ScanResult(
        phases=phases, counts=counts, pulses_per_point=n_pulses,
        rep_rate=1.0, config_fingerprint="analytic",
    )


class TestFitNmax:
    @pytest.mark.parametrize("n_max", FIG4_BRIGHTNESSES)
    def test_recovers_noiseless_brightness(self, n_max):
        fit = fit_nmax(analytic_result(n_max))
        assert fit.converged
        assert fit.n_max_hat == pytest.approx(n_max, abs=2e-4 * n_max)

    def test_noiseless_round_trip_is_tight(self):
        fit = fit_nmax(analytic_result(3.95))
        assert fit.n_max_hat == pytest.approx(3.95, abs=1e-6)
        assert abs(fit.phase_offset_hat) < 1e-6
        assert fit.amplitude_scale_hat == pytest.approx(1.0, rel=1e-6)

    def test_recovers_phase_offset(self):
        fit = fit_nmax(analytic_result(1.99, phi0=0.7))
        assert fit.n_max_hat == pytest.approx(1.99, abs=1e-5)
        assert fit.phase_offset_hat == pytest.approx(0.7, abs=1e-5)

    def test_monte_carlo_round_trip_within_two_percent(self):
        result = run_scan(ideal_config(1.99, 10**5, seed=21))
        fit = fit_nmax(result)
        assert fit.converged
        assert fit.n_max_hat == pytest.approx(1.99, rel=0.02)

    def test_all_zero_column_is_domain_error(self):
        result = ScanResult(
            phases=default_phase_grid(16),
            counts=np.tile([10, 0, 0], (16, 1)),
            pulses_per_point=10, rep_rate=1.0, config_fingerprint="x",
        )
        with pytest.raises(ValueError):
            fit_nmax(result)

    def test_too_few_points_rejected(self):
        result = ScanResult(
            phases=np.linspace(0, 1, 5),
            counts=np.tile([5, 5], (5, 1)),
            pulses_per_point=10, rep_rate=1.0, config_fingerprint="x",
        )
        with pytest.raises(ValueError):
            fit_nmax(result)


class TestCorrectCounts:
    def test_identity_matrix_returns_input(self):
        cm = ConfusionMatrix(np.eye(4))
        observed = np.array([0.4, 0.3, 0.2, 0.1])
        corrected, clipped = correct_counts(observed, cm)
        assert np.allclose(corrected, observed)
        assert not clipped

    def test_forward_mix_round_trip(self, default_detector, default_thresholds):
        cm = confusion_matrix(default_detector, default_thresholds)
        truth = np.array([0.05, 0.1, 0.2, 0.25, 0.2, 0.12, 0.05, 0.03])
        observed = truth @ cm.p
        corrected, clipped = correct_counts(observed, cm)
        assert np.allclose(corrected, truth, atol=1e-9)
        assert not clipped

    def test_noisy_observation_clips_and_renormalizes(self, default_detector,
                                                      default_thresholds):
        cm = confusion_matrix(default_detector, default_thresholds)
        truth = np.array([0.9, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        observed = truth @ cm.p
        observed[5] += 1e-4  # noise beyond what the chain can produce
        corrected, clipped = correct_counts(observed, cm)
        assert clipped
        assert np.all(corrected >= 0)
        assert corrected.sum() == pytest.approx(observed.sum(), rel=1e-12)

    def test_ill_conditioned_matrix_rejected(self):
        p = np.array([[0.5 + 1e-14, 0.5 - 1e-14], [0.5, 0.5]])
        cm = ConfusionMatrix(p)
        with pytest.raises(np.linalg.LinAlgError):
            correct_counts(np.array([0.5, 0.5]), cm)


class TestSensitivityMean:
    def test_quarter_case(self):
        assert sensitivity_mean(4.0, 0.0) == 0.5

    def test_unit_case(self):
        assert sensitivity_mean(1.0, 0.0) == 1.0

    def test_blind_at_bright_fringe(self):
        assert sensitivity_mean(4.0, math.pi) == math.inf

    def test_zero_brightness_is_domain_error(self):
        with pytest.raises(ValueError):
            sensitivity_mean(0.0, 1.0)


class TestSensitivityFock:
    def test_worst_point_diverges(self):
        # detected mean equals k: rate curve is stationary, blind readout
        assert sensitivity_fock(2, 4.0, math.pi / 2, 1) == math.inf
        assert sensitivity_fock(4, 4.0, math.pi, 1) == math.inf

    def test_single_photon_matches_mean_readout_at_dark_fringe(self):
        got = sensitivity_fock(1, 4.0, 1e-4, 1)
        want = sensitivity_mean(4.0, 1e-4)
        assert got == pytest.approx(want, rel=1e-3)

    @pytest.mark.parametrize("k", [1, 2, 4])
    def test_never_better_than_mean_readout(self, k):
        phis = np.linspace(1e-3, 2 * math.pi - 1e-3, 1000)
        fock = sensitivity_fock(k, 4.0, phis, 1)
        mean = sensitivity_mean(4.0, phis)
        both = np.isfinite(fock) & np.isfinite(mean)
        assert np.all(mean[both] <= fock[both] * (1 + 1e-12))

    def test_matches_error_propagation_oracle(self):
        # Delta(R_k)/|dR_k/dphi| with binomial variance and an exact derivative
        n_max, n = 3.95, 1
        for k in (1, 2, 3, 7):
            for phi in (0.4, 1.1, 2.0, 2.9):
                s = math.sin(phi / 2) ** 2
                ns = n_max * s
                pk = float(expected_rate(k, n_max, phi))
                dpk = pk * (k / ns - 1.0) * n_max * math.sin(phi) / 2.0
                want = math.sqrt(pk * (1 - pk) / n) / abs(dpk)
                got = sensitivity_fock(k, n_max, phi, n)
                assert got == pytest.approx(want, rel=1e-9)

    def test_scales_inverse_sqrt_pulses(self):
        one = sensitivity_fock(3, 4.0, 1.0, 1)
        many = sensitivity_fock(3, 4.0, 1.0, 10000)
        assert many == pytest.approx(one / 100.0, rel=1e-12)

    def test_k_zero_unsupported(self):
        with pytest.raises(ValueError):
            sensitivity_fock(0, 4.0, 1.0, 1)


class TestSingularAndOptimalPhase:
    def test_singular_phase_location(self):
        phi = singular_phase(2, 4.0)
        assert 4.0 * math.sin(phi / 2) ** 2 == pytest.approx(2.0, rel=1e-12)

    def test_singular_phase_absent_above_brightness(self):
        assert singular_phase(5, 4.0) is None

    def test_optimal_phase_beats_dense_grid(self):
        for k, n_max in ((1, 4.0), (2, 4.0), (3, 7.18)):
            phi_star = optimal_phase(k, n_max)
            best = sensitivity_fock(k, n_max, phi_star, 1)
            grid = np.linspace(1e-6, math.pi - 1e-6, 20000)
            vals = sensitivity_fock(k, n_max, grid, 1)
            assert best <= np.min(vals[np.isfinite(vals)]) * (1 + 1e-6)

    def test_single_photon_optimum_is_near_dark_fringe(self):
        phi_star = optimal_phase(1, 4.0)
        assert phi_star < 0.01

    def test_two_photon_optimum_avoids_worst_point(self):
        phi_star = optimal_phase(2, 4.0)
        assert abs(phi_star - singular_phase(2, 4.0)) > 0.1

    def test_optimum_invariant_under_pulse_count(self):
        a = optimal_phase(2, 4.0, n_pulses=1)
        b = optimal_phase(2, 4.0, n_pulses=10**6)
        assert a == pytest.approx(b, abs=1e-5)


class TestSensitivityCurve:
    def test_mean_scheme_scales_with_pulses(self):
        phases = np.linspace(0.1, 3.0, 50)
        one = sensitivity_curve("mean-photon", 4.0, phases, 1)
        many = sensitivity_curve("mean-photon", 4.0, phases, 100)
        assert np.allclose(many.delta_phi, one.delta_phi / 10.0)

    def test_fock_scheme_parses_k(self):
        phases = np.linspace(0.1, 3.0, 50)
        curve = sensitivity_curve("fock-2", 4.0, phases, 1)
        assert np.allclose(
            curve.delta_phi, sensitivity_fock(2, 4.0, phases, 1), equal_nan=True
        )

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValueError):
            sensitivity_curve("median-photon", 4.0, np.array([1.0]), 1)

    def test_infinities_mark_blind_points(self):
        phases = np.array([math.pi / 2, math.pi])
        curve = sensitivity_curve("fock-2", 4.0, phases, 1)
        assert np.isinf(curve.delta_phi).all()

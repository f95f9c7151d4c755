"""Shifted superposition, harmonic analysis, and fringe-spacing synthesis."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockscan import (
    Pattern,
    bentley_absorption,
    boto_pattern,
    expected_rate,
    fringe_spacing,
    harmonic_spectrum,
    pattern_from_function,
    pattern_from_values,
    residual_variation,
    superimpose,
    visibility,
)

P = 720
PHI = np.arange(P) * 2 * np.pi / P


def rate_pattern(k, n_max, grid_size=P):
    return pattern_from_function(lambda phi: expected_rate(k, n_max, phi), grid_size)


class TestPattern:
    def test_uniform_grid(self):
        pat = pattern_from_values(np.ones(8))
        assert np.allclose(np.diff(pat.phases), 2 * np.pi / 8)

    @pytest.mark.parametrize("values", [
        np.array([1.0]), np.array([1.0, -0.5]), np.array([1.0, np.nan]),
    ])
    def test_rejects_invalid_values(self, values):
        with pytest.raises(ValueError):
            Pattern(values)


class TestSuperimpose:
    def test_single_shift_is_identity(self):
        base = rate_pattern(3, 3.95)
        assert np.array_equal(superimpose(base, 1).values, base.values)

    def test_complementary_fringes_sum_to_constant(self):
        base = pattern_from_function(lambda phi: np.cos(phi / 2) ** 2)
        sup = superimpose(base, 2)
        assert np.allclose(sup.values, 1.0, atol=1e-12)

    def test_non_divisor_rejected(self):
        with pytest.raises(ValueError):
            superimpose(rate_pattern(1, 1.0), 7)  # 7 does not divide 720

    def test_shift_theorem_support(self):
        # superposition multiplies c_m by sum_s exp(2pi i m s / n), which
        # vanishes unless n divides m and equals n when it does
        base = rate_pattern(7, 3.95)
        sup = superimpose(base, 5)
        mags_base = harmonic_spectrum(base).magnitudes
        mags_sup = harmonic_spectrum(sup).magnitudes
        off = np.array([m for m in range(1, mags_sup.size) if m % 5 != 0])
        assert np.all(mags_sup[off] <= 1e-10 * mags_sup.max())
        on = np.arange(0, mags_sup.size, 5)
        assert np.allclose(mags_sup[on], 5 * mags_base[on], rtol=1e-9, atol=1e-12)

    def test_invariant_under_grid_rotation(self):
        base = rate_pattern(7, 3.95)
        rotated = pattern_from_values(np.roll(base.values, P // 5))
        a = superimpose(base, 5).values
        b = superimpose(rotated, 5).values
        assert np.allclose(np.roll(b, -P // 5), a, atol=1e-12)

    @given(n=st.sampled_from([1, 2, 3, 4, 5, 6, 8, 9, 10, 12]))
    @settings(max_examples=30, deadline=None)
    def test_shift_theorem_on_random_patterns(self, n):
        rng = np.random.default_rng(n)
        base = pattern_from_values(rng.random(360))
        mags = harmonic_spectrum(superimpose(base, n)).magnitudes
        off = np.array([m for m in range(1, mags.size) if m % n != 0])
        if off.size:
            assert np.all(mags[off] <= 1e-10 * max(mags.max(), 1e-300))


class TestHarmonicSpectrum:
    def test_constant_pattern_is_pure_dc(self):
        mags = harmonic_spectrum(pattern_from_values(np.full(64, 2.5))).magnitudes
        assert mags[0] == pytest.approx(2.5, rel=1e-12)
        assert np.all(mags[1:] <= 1e-12)

    @pytest.mark.parametrize("n", [1, 3, 5])
    def test_squared_cosine_splits_into_dc_and_nth(self, n):
        mags = harmonic_spectrum(boto_pattern(n, P)).magnitudes
        assert mags[0] == pytest.approx(0.5, abs=1e-12)
        assert mags[n] == pytest.approx(0.5, abs=1e-12)
        rest = np.delete(mags, [0, n])
        assert np.all(rest <= 1e-12)

    def test_single_photon_curve_is_manifestly_nonsinusoidal(self):
        mags = harmonic_spectrum(rate_pattern(1, 3.95)).magnitudes
        assert mags[2] / mags[1] > 0.1

    def test_parseval_consistency(self):
        rng = np.random.default_rng(0)
        values = rng.random(P)
        mags = harmonic_spectrum(pattern_from_values(values)).magnitudes
        power = mags[0] ** 2 + 0.5 * np.sum(mags[1:-1] ** 2) + mags[-1] ** 2
        assert power == pytest.approx(np.mean(values**2), rel=1e-9)


class TestResidualVariation:
    def test_constant_pattern_has_none(self):
        assert residual_variation(pattern_from_values(np.full(60, 3.0)), 5) == 0.0

    def test_matched_cosine_survives_fully(self):
        pat = boto_pattern(5, P)
        assert residual_variation(pat, 5) == pytest.approx(2.0, abs=1e-9)

    def test_unmatched_harmonics_cancel(self):
        pat = boto_pattern(3, P)  # harmonic 3 is killed by 5-fold shifts
        assert residual_variation(pat, 5) == pytest.approx(0.0, abs=1e-12)

    def test_top_rate_pattern_retains_fifth_harmonic(self):
        assert residual_variation(rate_pattern(7, 3.95), 5) > 0.01


class TestFringeSpacing:
    def test_ordinary_fringe_sits_at_rayleigh_limit(self):
        pat = pattern_from_function(lambda phi: np.cos(phi / 2) ** 2)
        assert fringe_spacing(pat, 780e-9) == pytest.approx(390e-9, rel=1e-12)

    def test_superimposed_top_rate_reaches_factor_five(self):
        sup = superimpose(rate_pattern(7, 3.95), 5)
        assert fringe_spacing(sup, 780e-9) == pytest.approx(78e-9, rel=1e-12)

    def test_third_harmonic_reference(self):
        assert fringe_spacing(boto_pattern(3, P), 780e-9) == pytest.approx(
            130e-9, rel=1e-12
        )

    def test_flat_pattern_is_domain_error(self):
        with pytest.raises(ValueError):
            fringe_spacing(pattern_from_values(np.full(32, 1.0)), 780e-9)


class TestBotoPattern:
    def test_unit_order_is_ordinary_fringe(self):
        pat = boto_pattern(1, P)
        assert np.allclose(pat.values, np.cos(PHI / 2) ** 2)

    def test_fifth_order_zero(self):
        pat = boto_pattern(5, 10)
        # phi = pi/5 is the 2nd grid point of a 10-point grid
        assert pat.values[1] == pytest.approx(0.0, abs=1e-15)

    def test_unit_visibility_for_all_orders(self):
        for n in (1, 2, 3, 5, 9):
            assert visibility(boto_pattern(n, P)) == pytest.approx(1.0, abs=1e-12)


class TestBentleyAbsorption:
    def test_first_order_is_intensity_sum(self):
        assert bentley_absorption(1, [0.5, 1.5, 2.0]) == pytest.approx(4.0)

    def test_equal_intensities(self):
        assert bentley_absorption(7, np.full(5, 2.0)) == pytest.approx(5 * 2.0**7)

    def test_shifted_pulses_expose_only_fifth_harmonics(self):
        # five pulses with fringes shifted by 2pi/5, seventh-order absorber
        intensities = np.stack([
            np.cos((PHI + 2 * np.pi * i / 5) / 2) ** 2 for i in range(5)
        ])
        exposure = bentley_absorption(7, intensities)
        mags = harmonic_spectrum(pattern_from_values(exposure)).magnitudes
        off = np.array([m for m in range(1, mags.size) if m % 5 != 0])
        assert np.all(mags[off] <= 1e-10 * mags.max())
        # identical to superimposing the single-pulse exposure pattern
        single = pattern_from_function(lambda phi: np.cos(phi / 2) ** 14)
        assert np.allclose(exposure, superimpose(single, 5).values, atol=1e-12)

    def test_rejects_bad_order(self):
        with pytest.raises(ValueError):
            bentley_absorption(0, [1.0])


class TestVisibilityTradeoff:
    def test_superposition_visibility_below_entangled_reference(self):
        sup = superimpose(rate_pattern(7, 3.95), 5)
        vis = visibility(sup)
        assert vis < 1.0
        assert vis > 0.0
        assert visibility(boto_pattern(5, P)) == pytest.approx(1.0, abs=1e-12)

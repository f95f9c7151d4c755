"""Shifted-superposition synthesis of sub-Rayleigh fringe patterns.

A k-photon count-rate curve is sharply peaked and therefore rich in
harmonics of the fringe frequency.  Summing n copies of the curve, each
rotated by 2*pi/n, cancels every harmonic that is not a multiple of n
(the DFT shift theorem) and leaves a pattern whose dominant fringe is n
times finer than the underlying two-beam fringe.  With the position
mapping phi = 2*pi*x / lambda, an ordinary fringe has spacing lambda/2
(the Rayleigh limit) and the superposition reaches (lambda/2)/n.

Patterns live on a uniform grid over [0, 2*pi); shifts are exact grid
rotations, so the supported shift counts are the divisors of the grid
length (the default 720 is divisible by 2, 3, 4, 5, 6, ...).
Superpositions are sums, not averages; pass normalize=True for
side-by-side plots on a common scale.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEFAULT_GRID_SIZE",
    "Pattern",
    "HarmonicSpectrum",
    "pattern_from_values",
    "pattern_from_function",
    "superimpose",
    "harmonic_spectrum",
    "residual_variation",
    "fringe_spacing",
    "visibility",
    "boto_pattern",
    "bentley_absorption",
]

DEFAULT_GRID_SIZE = 720


@dataclass(frozen=True)
class Pattern:
    """Periodic non-negative curve sampled on a uniform grid over [0, 2*pi)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("pattern needs a 1-D grid of at least 2 samples")
        if not np.all(np.isfinite(values)):
            raise ValueError("pattern values must be finite")
        if np.any(values < 0):
            raise ValueError("pattern values must be non-negative")

    @property
    def grid_size(self) -> int:
        return self.values.size

    @property
    def phases(self) -> np.ndarray:
        return np.arange(self.grid_size) * (2.0 * np.pi / self.grid_size)


@dataclass(frozen=True)
class HarmonicSpectrum:
    """Real-DFT magnitudes |c_m|, m = 0..P/2, of a sampled pattern.

    Normalized so that a pure cos(m*phi) component of amplitude A gives
    |c_m| = A (and |c_0| is the mean value).
    """

    magnitudes: np.ndarray

    def __post_init__(self):
        mags = np.asarray(self.magnitudes, dtype=float)
        object.__setattr__(self, "magnitudes", mags)
        if np.any(mags < 0):
            raise ValueError("magnitudes must be non-negative")

    @property
    def fundamental(self) -> float:
        return float(self.magnitudes[1])


def pattern_from_values(values) -> Pattern:
    """Wrap already-sampled values (e.g. a measured rate column)."""
    return Pattern(np.asarray(values, dtype=float))


def pattern_from_function(fn, grid_size: int = DEFAULT_GRID_SIZE) -> Pattern:
    """Sample fn(phi) on the uniform [0, 2*pi) grid."""
    phases = np.arange(grid_size) * (2.0 * np.pi / grid_size)
    return Pattern(np.asarray(fn(phases), dtype=float))


def _check_divides(n: int, grid_size: int):
    if n < 1:
        raise ValueError(f"shift count must be >= 1, got {n}")
    if grid_size % n != 0:
        raise ValueError(
            f"shift count {n} must divide the grid size {grid_size} "
            "(shifts are exact grid rotations; no resampling)"
        )


def superimpose(base: Pattern, n_shifts: int) -> Pattern:
    """Sum of n_shifts copies of the pattern, rotated by 2*pi/n_shifts each.

    The sum is not normalized (its scale grows with n_shifts); harmonics
    whose index is not a multiple of n_shifts cancel exactly.
    """
    _check_divides(n_shifts, base.grid_size)
    step = base.grid_size // n_shifts
    out = np.zeros_like(base.values)
    for s in range(n_shifts):
        out += np.roll(base.values, -s * step)
    return Pattern(out)


def harmonic_spectrum(pattern: Pattern) -> HarmonicSpectrum:
    """Cosine-amplitude magnitudes of the pattern's real DFT."""
    p = pattern.grid_size
    mags = np.abs(np.fft.rfft(pattern.values)) / p
    mags[1:] *= 2.0
    if p % 2 == 0:
        mags[-1] /= 2.0  # Nyquist term is not doubled
    return HarmonicSpectrum(mags)


def residual_variation(pattern: Pattern, n: int) -> float:
    """Peak-to-peak variation surviving an n-fold shifted superposition,
    normalized by the superposition's mean.

    Zero exactly when the pattern has no harmonic content at nonzero
    multiples of n; any surviving variation measures the harmonics at
    and above n.
    """
    sup = superimpose(pattern, n).values
    mean = sup.mean()
    if mean == 0.0:
        return 0.0
    return float((sup.max() - sup.min()) / mean)


def fringe_spacing(pattern: Pattern, wavelength: float) -> float:
    """Spatial period of the pattern's dominant fringe.

    Maps phase to position via phi = 2*pi*x / wavelength, so harmonic m
    corresponds to fringes of spacing (wavelength/2)/m; m = 1 is the
    Rayleigh limit.  Raises ValueError for a flat pattern (no nonzero
    harmonic).
    """
    if wavelength <= 0:
        raise ValueError(f"wavelength must be > 0, got {wavelength}")
    mags = harmonic_spectrum(pattern).magnitudes
    scale = max(float(mags[0]), np.finfo(float).tiny)
    if mags[1:].size == 0 or mags[1:].max() <= 1e-12 * scale:
        raise ValueError("pattern is flat; it has no fringe spacing")
    m_star = 1 + int(np.argmax(mags[1:]))
    return (wavelength / 2.0) / m_star


def visibility(pattern: Pattern) -> float:
    """(max - min) / (max + min) of the fringe pattern."""
    hi = float(pattern.values.max())
    lo = float(pattern.values.min())
    if hi + lo == 0.0:
        return 0.0
    return (hi - lo) / (hi + lo)


def boto_pattern(n: int, grid_size: int = DEFAULT_GRID_SIZE) -> Pattern:
    """Reference n-photon absorption pattern cos^2(n*phi/2) of the
    path-entangled state proposal; unit visibility for every n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return pattern_from_function(lambda phi: np.cos(n * phi / 2.0) ** 2, grid_size)


def bentley_absorption(m: int, intensities):
    """M-photon exposure of a resist point under a sequence of pulses.

    Sums I_i^m over pulses i, where I_i = |E_i|^2 is the pulse intensity
    at the point.  A 2-D input (pulses x positions) sums along axis 0
    and returns the exposure per position, which is how the shifted
    classical-pulse scheme builds its pattern.
    """
    if m < 1:
        raise ValueError(f"absorption order must be >= 1, got {m}")
    intensities = np.asarray(intensities, dtype=float)
    if np.any(intensities < 0):
        raise ValueError("intensities must be non-negative")
    out = np.sum(intensities**m, axis=0)
    if np.ndim(out) == 0:
        return float(out)
    return out

"""Pulse-height model of a photon-number-resolving avalanche detector.

An absorbed photon triggers an avalanche of roughly `gain` electrons;
independent avalanches add, so k photons give a pulse of mean k*gain
whose multiplication noise grows as sqrt(k) times the single-photon
width.  Dark events are Poisson photon-equivalents added before the
avalanche, so they fall into the real photon peaks.  Pulse heights are
classified into photon numbers by comparing against a ladder of
threshold levels; pulses above the top level are recorded as the top
class rather than discarded.

Default widths (sigma1 = 0.15*gain, sigma0 = 0.08*gain, dark_mean =
0.02) are engineering choices that keep adjacent peaks resolvable below
k = 5; the gain is normalized to 1.0 in arbitrary electron units.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import ndtr

from .coherent import poisson_pmf

__all__ = [
    "DetectorModel",
    "ThresholdSet",
    "PulseHeightHistogram",
    "ConfusionMatrix",
    "CalibrationError",
    "sample_pulse_height",
    "add_dark_counts",
    "classify",
    "gaussian_valley",
    "calibrate_thresholds",
    "scan_histogram",
    "confusion_matrix",
]

DEFAULT_GAIN = 1.0
DEFAULT_SIGMA1 = 0.15
DEFAULT_SIGMA0 = 0.08
DEFAULT_DARK_MEAN = 0.02
DEFAULT_SATURATION_RATE = 5e6  # Hz, advisory only


class CalibrationError(RuntimeError):
    """Raised when adjacent pulse-height peaks have merged and no
    interior decision level exists between them."""


@dataclass(frozen=True)
class DetectorModel:
    """Readout-chain parameters of the avalanche detector.

    Parameters
    ----------
    gain: float
        Mean electrons per single-photon avalanche, > 0.
    sigma1: float
        Std of the one-photon peak in electrons; must be < gain/2 so
        that the k=0 and k=1 peaks stay distinguishable.
    sigma0: float
        Electronic-noise std of the no-photon pedestal, >= 0.
    dark_mean: float
        Mean dark events per detection gate (Poisson), >= 0.
    saturation_rate: float
        Advisory count-rate limit in Hz; exceeding it only triggers a
        warning, there is no pile-up model.
    """

    gain: float = DEFAULT_GAIN
    sigma1: float = DEFAULT_SIGMA1
    sigma0: float = DEFAULT_SIGMA0
    dark_mean: float = DEFAULT_DARK_MEAN
    saturation_rate: float = DEFAULT_SATURATION_RATE

    def __post_init__(self):
        if self.gain <= 0:
            raise ValueError(f"gain must be > 0, got {self.gain}")
        if self.sigma1 <= 0:
            raise ValueError(f"sigma1 must be > 0, got {self.sigma1}")
        if self.sigma1 >= self.gain / 2:
            raise ValueError(
                f"sigma1 must be < gain/2 for resolvable peaks, "
                f"got sigma1={self.sigma1} gain={self.gain}"
            )
        if self.sigma0 < 0:
            raise ValueError(f"sigma0 must be >= 0, got {self.sigma0}")
        if self.dark_mean < 0:
            raise ValueError(f"dark_mean must be >= 0, got {self.dark_mean}")

    def peak_sigma(self, k) -> np.ndarray:
        """Width of the k-photon peak: sigma0 for k=0, sqrt(k)*sigma1 above."""
        k = np.asarray(k)
        return np.where(k == 0, self.sigma0, self.sigma1 * np.sqrt(np.maximum(k, 1)))


@dataclass(frozen=True)
class ThresholdSet:
    """Strictly increasing decision levels L_1..L_K in electrons.

    A pulse of height h is classified as k when L_k <= h < L_{k+1},
    as 0 below L_1 and as K at or above L_K.
    """

    levels: np.ndarray

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        object.__setattr__(self, "levels", levels)
        if levels.ndim != 1 or levels.size < 1:
            raise ValueError("need at least one threshold level")
        if not np.all(np.isfinite(levels)):
            raise ValueError("threshold levels must be finite")
        if levels[0] <= 0:
            raise ValueError(f"L_1 must be > 0, got {levels[0]}")
        if np.any(np.diff(levels) <= 0):
            raise ValueError("threshold levels must be strictly increasing")

    @property
    def k_max(self) -> int:
        """Top photon-number class K (= number of levels)."""
        return self.levels.size


@dataclass(frozen=True)
class PulseHeightHistogram:
    """Histogram of pulse heights: counts between consecutive bin edges."""

    bin_edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)
        if edges.ndim != 1 or edges.size < 2:
            raise ValueError("need at least two bin edges")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if counts.size != edges.size - 1:
            raise ValueError("need exactly one count per bin")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")


@dataclass(frozen=True)
class ConfusionMatrix:
    """p[k, j] = probability that a true k-photon event is classified as j."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "p", p)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("confusion matrix must be square")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("entries must lie in [0, 1]")
        rowsums = p.sum(axis=1)
        if np.any(np.abs(rowsums - 1.0) > 1e-9):
            raise ValueError(f"rows must sum to 1, got {rowsums}")


def sample_pulse_height(true_k, model: DetectorModel, rng: np.random.Generator):
    """Draw pulse heights for events of true photon number `true_k`.

    k >= 1 events draw from Normal(k*gain, sqrt(k)*sigma1); k = 0 draws
    from the pedestal Normal(0, sigma0).  `true_k` already includes any
    dark events.  Accepts a scalar or an array of photon numbers and
    consumes exactly one standard-normal variate per event.
    """
    k = np.asarray(true_k)
    if np.any(k < 0):
        raise ValueError("true_k must be >= 0")
    z = rng.standard_normal(size=k.shape if k.ndim else None)
    heights = k * model.gain + model.peak_sigma(k) * z
    if k.ndim == 0:
        return float(heights)
    return heights


def add_dark_counts(photon_k, model: DetectorModel, rng: np.random.Generator):
    """Add a Poisson(dark_mean) number of dark photon-equivalents."""
    k = np.asarray(photon_k)
    if np.any(k < 0):
        raise ValueError("photon_k must be >= 0")
    dark = rng.poisson(model.dark_mean, size=k.shape if k.ndim else None)
    out = k + dark
    if k.ndim == 0:
        return int(out)
    return out


def classify(height, thresholds: ThresholdSet):
    """Map pulse heights to photon-number classes 0..K.

    Heights below L_1 are class 0; heights at or above the top level are
    recorded as the top class K (overflow pulses are binned, not
    dropped, which is what inflates the top count rate when higher
    photon numbers are present).
    """
    cls = np.digitize(height, thresholds.levels)
    if np.ndim(height) == 0:
        return int(cls)
    return cls


def gaussian_valley(mu_lo, sigma_lo, w_lo, mu_hi, sigma_hi, w_hi, xatol):
    """Valley of a two-Gaussian mixture density between the peak centers.

    Returns the deepest interior local minimum of
    w_lo*N(mu_lo, sigma_lo) + w_hi*N(mu_hi, sigma_hi) on
    (mu_lo, mu_hi), located by a fine grid scan and refined by bounded
    minimization.  With lopsided weights the restricted *global*
    minimum can sit at the dimmer peak's center, which is not a usable
    decision level, so the interior valley is what is returned.  Falls
    back to the midpoint when the density underflows across the whole
    interior (vanishing widths: any level works), and raises
    CalibrationError when no interior valley exists (merged peaks).
    """
    # floor the widths so degenerate sigma=0 components still evaluate
    span = mu_hi - mu_lo
    slo = max(sigma_lo, 1e-12 * span)
    shi = max(sigma_hi, 1e-12 * span)

    def density(x):
        zlo = (x - mu_lo) / slo
        zhi = (x - mu_hi) / shi
        return (w_lo * np.exp(-0.5 * zlo * zlo) / slo
                + w_hi * np.exp(-0.5 * zhi * zhi) / shi)

    mid = 0.5 * (mu_lo + mu_hi)
    grid = np.linspace(mu_lo, mu_hi, 2001)
    f = density(grid)
    # local minima strictly below the left neighbor (plateaus count once)
    is_valley = (f[1:-1] < f[:-2]) & (f[1:-1] <= f[2:])
    candidates = np.flatnonzero(is_valley) + 1
    if candidates.size == 0:
        raise CalibrationError(
            f"no interior valley between peaks at {mu_lo} and {mu_hi}; "
            "peaks have merged"
        )
    i = int(candidates[np.argmin(f[candidates])])
    if f[i] == 0.0 and density(mid) == 0.0:
        return mid
    res = minimize_scalar(
        lambda x: float(density(x)),
        bounds=(grid[i - 1], grid[i + 1]), method="bounded",
        options={"xatol": xatol},
    )
    x_star = float(res.x) if res.fun <= f[i] else float(grid[i])
    # keep the level strictly inside the open interval
    eps = 1e-9 * span
    return min(max(x_star, mu_lo + eps), mu_hi - eps)


def calibrate_thresholds(model: DetectorModel, k_max: int = 7,
                         ref_mean: float = 4.0) -> ThresholdSet:
    """Place decision levels at the valleys between adjacent photon peaks.

    For each boundary k -> k+1 the level is the minimizer of the
    two-component mixture w_k*N(k*gain, sigma_k) + w_{k+1}*N((k+1)*gain,
    sigma_{k+1}) on (k*gain, (k+1)*gain), with weights w taken from a
    Poisson distribution of mean `ref_mean`.  Set `ref_mean` to the
    bright-fringe detected mean of the scan the thresholds will serve.

    When the reference light barely populates a pair of peaks the
    weighted mixture can be monotone across the boundary (the dim peak
    is drowned, not merged); such a boundary falls back to the
    equal-weight valley, which depends only on the peak geometry.

    Raises CalibrationError when any adjacent pair of peaks has merged.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    if ref_mean < 0:
        raise ValueError(f"ref_mean must be >= 0, got {ref_mean}")
    weights = poisson_pmf(float(ref_mean), np.arange(k_max + 1))
    weights = np.atleast_1d(weights)
    xatol = 1e-3 * model.gain
    levels = []
    for k in range(k_max):
        pair = dict(
            mu_lo=k * model.gain,
            sigma_lo=float(model.peak_sigma(k)),
            mu_hi=(k + 1) * model.gain,
            sigma_hi=float(model.peak_sigma(k + 1)),
            xatol=xatol,
        )
        try:
            level = gaussian_valley(
                w_lo=float(weights[k]), w_hi=float(weights[k + 1]), **pair
            )
        except CalibrationError:
            level = gaussian_valley(w_lo=0.5, w_hi=0.5, **pair)
        levels.append(level)
    return ThresholdSet(np.asarray(levels))


def scan_histogram(heights, bin_width: float) -> PulseHeightHistogram:
    """Histogram pulse heights on a uniform grid of width `bin_width`.

    Emulates sweeping a window comparator of width `bin_width` across
    the height axis and counting pulses inside the window; the result is
    an ordinary histogram whose bin edges are the swept window
    positions, aligned to multiples of the bin width.
    """
    if bin_width <= 0:
        raise ValueError(f"bin_width must be > 0, got {bin_width}")
    heights = np.asarray(heights, dtype=float)
    if heights.size == 0:
        edges = np.array([0.0, bin_width])
        return PulseHeightHistogram(edges, np.zeros(1, dtype=np.int64))
    lo = math.floor(heights.min() / bin_width)
    hi = math.floor(heights.max() / bin_width) + 1
    edges = np.arange(lo, hi + 1) * bin_width
    counts, _ = np.histogram(heights, bins=edges)
    return PulseHeightHistogram(edges, counts.astype(np.int64))


def confusion_matrix(model: DetectorModel, thresholds: ThresholdSet,
                     k_max: int | None = None) -> ConfusionMatrix:
    """Analytic classification probabilities from the Gaussian peak model.

    Row k integrates the k-photon peak density over each threshold
    interval (below L_1, between consecutive levels, at or above the top
    level), so rows sum to one by construction.  A zero-width peak
    (sigma0 = 0 pedestal) puts all mass in the interval containing its
    center.
    """
    if k_max is None:
        k_max = thresholds.k_max
    if k_max != thresholds.k_max:
        raise ValueError(
            f"k_max must match the threshold ladder ({thresholds.k_max}), "
            f"got {k_max}"
        )
    edges = np.concatenate([[-np.inf], thresholds.levels, [np.inf]])
    p = np.zeros((k_max + 1, k_max + 1))
    for k in range(k_max + 1):
        mu = k * model.gain
        sigma = float(model.peak_sigma(k))
        if sigma > 0:
            cdf = ndtr((edges - mu) / sigma)
        else:
            cdf = (edges > mu).astype(float)
            cdf[-1] = 1.0
        p[k] = np.diff(cdf)
    return ConfusionMatrix(p)

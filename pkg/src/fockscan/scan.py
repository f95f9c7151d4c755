"""Shot-by-shot Monte Carlo of interferometer phase scans.

For every phase point and every laser pulse: draw the photon number
from the Poisson distribution of the detected mean, add dark events,
draw an avalanche pulse height, classify it against the threshold
ladder, and tally.  Work is split into fixed-size pulse blocks whose
random streams depend only on (master_seed, phase index, block index),
so results are bit-identical for any worker count.
"""

import hashlib
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .coherent import expected_rate, poisson_pmf
from .detector import DetectorModel, ThresholdSet
from .streams import BLOCK_SIZE, POISSON_INVERSION_MAX, block_rng, poisson_cdf_table, poisson_draw

__all__ = [
    "SaturationWarning",
    "ScanConfig",
    "ScanResult",
    "run_scan",
    "analytic_scan",
    "mean_from_counts",
    "truncation_bias",
    "default_phase_grid",
]


class SaturationWarning(UserWarning):
    """Configured count rate is above the detector's advisory limit."""


def default_phase_grid(n_points: int = 100) -> np.ndarray:
    """Uniform grid of one full fringe, [0, 2*pi) without the endpoint."""
    return np.linspace(0.0, 2.0 * np.pi, n_points, endpoint=False)


@dataclass(frozen=True)
class ScanConfig:
    """Full description of one phase scan.

    Parameters
    ----------
    n_max: float
        Detected mean photon number at the bright fringe, >= 0.
    rep_rate: float
        Laser repetition rate in Hz, > 0.
    pulses_per_point: int
        Pulses fired at each phase point, >= 1.
    phases: ndarray
        Strictly monotone phase grid in radians.
    detector: DetectorModel
    thresholds: ThresholdSet
    master_seed: int
        64-bit seed; together with the phase/block indices it fully
        determines every random draw.
    """

    n_max: float
    rep_rate: float
    pulses_per_point: int
    phases: np.ndarray
    detector: DetectorModel
    thresholds: ThresholdSet
    master_seed: int

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float)
        object.__setattr__(self, "phases", phases)
        if self.n_max < 0:
            raise ValueError(f"n_max must be >= 0, got {self.n_max}")
        if self.rep_rate <= 0:
            raise ValueError(f"rep_rate must be > 0, got {self.rep_rate}")
        if self.pulses_per_point < 1:
            raise ValueError(
                f"pulses_per_point must be >= 1, got {self.pulses_per_point}"
            )
        if phases.ndim != 1 or phases.size == 0:
            raise ValueError("phase grid must be a non-empty 1-D array")
        diffs = np.diff(phases)
        if phases.size > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("phase grid must be strictly monotone")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must fit in 64 bits")
        peak_rate = self.n_max * self.rep_rate
        if peak_rate > self.detector.saturation_rate:
            warnings.warn(
                f"bright-fringe count rate {peak_rate:.3g} Hz exceeds the "
                f"detector's advisory saturation limit "
                f"{self.detector.saturation_rate:.3g} Hz",
                SaturationWarning,
                stacklevel=2,
            )

    def fingerprint(self) -> str:
        """Stable hash of every parameter that can influence the result."""
        h = hashlib.sha256()
        det = self.detector
        parts = [
            f"n_max={self.n_max!r}",
            f"rep_rate={self.rep_rate!r}",
            f"pulses_per_point={self.pulses_per_point}",
            "phases=" + ",".join(repr(p) for p in self.phases),
            f"gain={det.gain!r}",
            f"sigma1={det.sigma1!r}",
            f"sigma0={det.sigma0!r}",
            f"dark_mean={det.dark_mean!r}",
            "levels=" + ",".join(repr(v) for v in self.thresholds.levels),
            f"master_seed={int(self.master_seed)}",
        ]
        h.update("\n".join(parts).encode())
        return h.hexdigest()


@dataclass(frozen=True)
class ScanResult:
    """Classified count tallies of a phase scan.

    counts[i, k] is the number of pulses at phase i classified as k
    photons, k = 0..K; every pulse lands in exactly one class, so each
    row sums to pulses_per_point.
    """

    phases: np.ndarray
    counts: np.ndarray
    pulses_per_point: int
    rep_rate: float
    config_fingerprint: str

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "phases", np.asarray(self.phases, dtype=float))
        if counts.shape[0] != self.phases.size:
            raise ValueError("one count row per phase point required")
        rowsums = counts.sum(axis=1)
        if np.any(rowsums != self.pulses_per_point):
            raise ValueError("every pulse must be classified exactly once")

    @property
    def k_max(self) -> int:
        return self.counts.shape[1] - 1

    @property
    def rates(self) -> np.ndarray:
        """Estimated count rates in Hz: counts / pulses * rep_rate."""
        return self.counts / self.pulses_per_point * self.rep_rate

    @property
    def probabilities(self) -> np.ndarray:
        """Per-pulse classification probabilities p_hat[i, k]."""
        return self.counts / self.pulses_per_point


def _simulate_block(config: ScanConfig, phase_index: int, block_index: int,
                    n_pulses: int, photon_cdf, dark_cdf) -> np.ndarray:
    """Tally one block of pulses at one phase point."""
    det = config.detector
    rng = block_rng(int(config.master_seed), phase_index, block_index)
    mean = config.n_max * np.sin(config.phases[phase_index] / 2.0) ** 2
    photons = poisson_draw(rng, mean, n_pulses, cdf=photon_cdf)
    dark = poisson_draw(rng, det.dark_mean, n_pulses, cdf=dark_cdf)
    true_k = photons + dark
    z = rng.standard_normal(n_pulses)
    heights = true_k * det.gain + det.peak_sigma(true_k) * z
    classes = np.digitize(heights, config.thresholds.levels)
    return np.bincount(classes, minlength=config.thresholds.k_max + 1)


def run_scan(config: ScanConfig, workers: int = 1) -> ScanResult:
    """Run the Monte Carlo scan described by `config`.

    `workers` only sets the thread count; the tallies are merged by
    summation of per-block counts, so the result is bit-identical for
    any value.
    """
    n_phases = config.phases.size
    n_pulses = config.pulses_per_point
    k_classes = config.thresholds.k_max + 1
    n_blocks = (n_pulses + BLOCK_SIZE - 1) // BLOCK_SIZE

    # per-phase CDF tables, shared across that phase's blocks
    means = config.n_max * np.sin(config.phases / 2.0) ** 2
    photon_cdfs = [
        poisson_cdf_table(m) if 0.0 < m <= POISSON_INVERSION_MAX else None
        for m in means
    ]
    dark = config.detector.dark_mean
    dark_cdf = poisson_cdf_table(dark) if 0.0 < dark <= POISSON_INVERSION_MAX else None

    units = []
    for i in range(n_phases):
        for b in range(n_blocks):
            size = min(BLOCK_SIZE, n_pulses - b * BLOCK_SIZE)
            units.append((i, b, size))

    counts = np.zeros((n_phases, k_classes), dtype=np.int64)

    def work(unit):
        i, b, size = unit
        return i, _simulate_block(config, i, b, size, photon_cdfs[i], dark_cdf)

    if workers <= 1:
        for unit in units:
            i, tally = work(unit)
            counts[i] += tally
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, tally in pool.map(work, units):
                counts[i] += tally

    return ScanResult(
        phases=config.phases,
        counts=counts,
        pulses_per_point=n_pulses,
        rep_rate=config.rep_rate,
        config_fingerprint=config.fingerprint(),
    )


def analytic_scan(n_max: float, phases, rep_rate: float = 1.0,
                  k_max: int = 7) -> np.ndarray:
    """Ideal count rates for each (phase, k), k = 0..k_max.

    The noiseless overlay for Monte Carlo scans: rates[i, k] =
    expected_rate(k, n_max, phases[i], rep_rate).
    """
    phases = np.asarray(phases, dtype=float)
    ks = np.arange(k_max + 1)
    return expected_rate(ks[np.newaxis, :], n_max, phases[:, np.newaxis], rep_rate)


def mean_from_counts(result: ScanResult) -> np.ndarray:
    """Weighted-sum photon-number estimate sum_k k * counts[i,k] / N per phase.

    With a threshold ladder that tops out at K this is biased low near
    the bright fringe by sum_{k>K} (k - K) p_k, since overflow pulses
    are recorded as K.  With an ideal detector it estimates
    mean_photon_curve (see `fockscan.coherent`).
    """
    ks = np.arange(result.counts.shape[1])
    return result.counts @ ks / result.pulses_per_point


def truncation_bias(n_max: float, phi: float, k_max: int) -> float:
    """Expected shortfall of the weighted sum at phase `phi` when photon
    numbers above `k_max` are recorded as `k_max`: sum_{k>K} (k-K) p_k."""
    mean = n_max * np.sin(phi / 2.0) ** 2
    hi = int(np.ceil(mean + 12 * np.sqrt(mean) + 40))
    ks = np.arange(k_max + 1, hi + 1)
    return float(np.sum((ks - k_max) * poisson_pmf(mean, ks)))

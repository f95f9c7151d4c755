"""Analytic coherent-state math for a lossy Mach-Zehnder interferometer.

A coherent state of field amplitude alpha has Poisson photon-number
statistics with mean |alpha|^2.  The interferometer maps an input
amplitude alpha to alpha*sin(phi/2) at the monitored output port, and
downstream losses scale the detected mean photon number by the total
detection efficiency eta^2.  Everything observable here depends only on
the detected mean n(phi) = n_max * sin^2(phi/2), so all functions work
in those detected units.

All probabilities are evaluated in log space (k*log(n) - n - lgamma(k+1))
so photon numbers up to a few hundred stay finite; direct evaluation of
n^k / k! overflows float64 already at k = 171.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "CoherentField",
    "InterferometerSetting",
    "PhotonDistribution",
    "poisson_pmf",
    "fock_overlap",
    "output_field",
    "apply_efficiency",
    "detected_field",
    "expected_rate",
    "photon_distribution",
    "mean_photon_curve",
]


@dataclass(frozen=True)
class CoherentField:
    """Coherent state of a single mode, reduced to its field magnitude.

    Only |alpha| enters any observable in this package (count rates
    depend on |alpha|^2 alone), so the complex phase of alpha is not
    stored.

    Parameters
    ----------
    amplitude: float
        Dimensionless field magnitude |alpha|, >= 0 and finite.
    """

    amplitude: float

    def __post_init__(self):
        if not math.isfinite(self.amplitude) or self.amplitude < 0:
            raise ValueError(
                f"amplitude must be finite and >= 0, got {self.amplitude}"
            )

    @property
    def mean_photon(self) -> float:
        """Mean photon number |alpha|^2 (derived, never stored)."""
        return self.amplitude**2

    @classmethod
    def from_mean_photon(cls, mean_photon: float) -> "CoherentField":
        """Build a field with the given mean photon number."""
        if mean_photon < 0:
            raise ValueError(f"mean photon number must be >= 0, got {mean_photon}")
        return cls(math.sqrt(mean_photon))


@dataclass(frozen=True)
class InterferometerSetting:
    """Interferometer phase plus the detected-units brightness scale.

    Parameters
    ----------
    n_max: float
        Maximum mean *detected* photon number, reached at the bright
        fringe phi = pi.  Detection efficiency is already folded in.
    phase: float
        Path phase difference phi in radians.  Any real value is
        accepted; nothing here reduces it modulo 2*pi.
    efficiency_sq: float
        Total detection efficiency eta^2 in [0, 1].  Only needed when
        mapping an undetected input field to detected units; defaults
        to 1 (already-detected units).
    """

    n_max: float
    phase: float
    efficiency_sq: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.n_max) or self.n_max < 0:
            raise ValueError(f"n_max must be finite and >= 0, got {self.n_max}")
        if not 0.0 <= self.efficiency_sq <= 1.0:
            raise ValueError(
                f"efficiency_sq must lie in [0, 1], got {self.efficiency_sq}"
            )

    @property
    def detected_mean(self) -> float:
        """Mean detected photon number n_max * sin^2(phase/2)."""
        return self.n_max * math.sin(self.phase / 2) ** 2

    @classmethod
    def from_input_field(
        cls, field: CoherentField, phase: float, efficiency_sq: float = 1.0
    ) -> "InterferometerSetting":
        """Derive n_max from an undetected input field and the efficiency."""
        return cls(
            n_max=field.mean_photon * efficiency_sq,
            phase=phase,
            efficiency_sq=efficiency_sq,
        )


@dataclass(frozen=True)
class PhotonDistribution:
    """Photon-number probabilities p_0..p_Kmax with explicit tail mass.

    Parameters
    ----------
    probs: ndarray
        p_k for k = 0..K_max.
    tail_mass: float
        Total probability of k > K_max.
    """

    probs: np.ndarray
    tail_mass: float

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a non-empty 1-D array")
        if np.any(probs < 0) or np.any(probs > 1):
            raise ValueError("all probabilities must lie in [0, 1]")
        if not 0.0 <= self.tail_mass <= 1.0:
            raise ValueError(f"tail_mass must lie in [0, 1], got {self.tail_mass}")
        total = probs.sum() + self.tail_mass
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probs + tail must sum to 1, got {total!r}")

    @property
    def k_max(self) -> int:
        return self.probs.size - 1


def poisson_pmf(mean, k):
    """Poisson probability mass e^-mean * mean^k / k!, evaluated in log space.

    Parameters
    ----------
    mean: float or ndarray of float
        Mean photon number(s), >= 0.
    k: int or ndarray of int
        Photon number(s), >= 0.  Broadcast against `mean`.

    Returns
    -------
    float or ndarray of float
        The probability mass; exact 1/0 values for mean == 0.
    """
    mean = np.asarray(mean, dtype=float)
    k = np.asarray(k)
    if np.any(mean < 0):
        raise ValueError("mean must be >= 0")
    if np.any(k < 0):
        raise ValueError("k must be >= 0")
    # log of 0 is masked out: the mean == 0 column is replaced by the
    # exact vacuum distribution afterwards.
    safe = np.where(mean > 0, mean, 1.0)
    logp = k * np.log(safe) - safe - gammaln(np.asarray(k, dtype=float) + 1.0)
    out = np.where(mean > 0, np.exp(logp), (k == 0).astype(float))
    if out.ndim == 0:
        return float(out)
    return out


def fock_overlap(field: CoherentField, k: int) -> float:
    """Probability |<k|alpha>|^2 that the field projects onto the k-photon state.

    Equals the Poisson mass at k for mean |alpha|^2.  Stable for k up to
    several hundred thanks to the log-space evaluation.
    """
    if k < 0:
        raise ValueError(f"photon number k must be >= 0, got {k}")
    return float(poisson_pmf(field.mean_photon, int(k)))


def output_field(field: CoherentField, setting: InterferometerSetting) -> CoherentField:
    """Field at the monitored interferometer output, before any losses.

    The interferometer scales the amplitude by sin(phase/2); the output
    is again a coherent state.
    """
    return CoherentField(abs(field.amplitude * math.sin(setting.phase / 2)))


def apply_efficiency(field: CoherentField, efficiency_sq: float) -> CoherentField:
    """Attenuate a field by total detection efficiency eta^2 in [0, 1].

    Loss scales the mean photon number by eta^2, i.e. the amplitude by eta.
    """
    if not 0.0 <= efficiency_sq <= 1.0:
        raise ValueError(f"efficiency_sq must lie in [0, 1], got {efficiency_sq}")
    return CoherentField(field.amplitude * math.sqrt(efficiency_sq))


def detected_field(field: CoherentField, setting: InterferometerSetting) -> CoherentField:
    """Detected coherent state: interferometer output after losses."""
    return apply_efficiency(output_field(field, setting), setting.efficiency_sq)


def expected_rate(k, n_max: float, phi, rep_rate: float = 1.0):
    """Ideal k-photon count rate of the interferometer output.

    R_k(phi) = rep_rate * exp(-n(phi)) * n(phi)^k / k!  with the detected
    mean n(phi) = n_max * sin^2(phi/2).

    Parameters
    ----------
    k: int or ndarray of int
        Photon number(s) >= 0.
    n_max: float
        Detected mean photon number at the bright fringe, >= 0.
    phi: float or ndarray of float
        Interferometer phase(s) in radians, unrestricted.
    rep_rate: float
        Pulse repetition rate in Hz (> 0); 1.0 gives per-pulse
        probabilities instead of rates.

    Returns
    -------
    float or ndarray of float
        Count rate(s), broadcast over `k` and `phi`.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    if rep_rate <= 0:
        raise ValueError(f"rep_rate must be > 0, got {rep_rate}")
    mean = n_max * np.sin(np.asarray(phi, dtype=float) / 2) ** 2
    return rep_rate * poisson_pmf(mean, k)


def photon_distribution(mean: float, k_max: int) -> PhotonDistribution:
    """Photon-number distribution of a coherent state, truncated at k_max.

    The tail mass is 1 minus the partial sum, clamped to [0, 1]; its
    absolute error is therefore bounded by (k_max + 1) float ulps of the
    partial sum, negligible against any statistical use here.
    """
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    probs = poisson_pmf(float(mean), np.arange(k_max + 1))
    probs = np.atleast_1d(probs)
    tail = min(1.0, max(0.0, 1.0 - float(probs.sum())))
    return PhotonDistribution(probs=probs, tail_mass=tail)


def mean_photon_curve(n_max: float, phases):
    """Mean detected photon number n_max * sin^2(phi/2) per phase.

    This is the purely sinusoidal curve that the count-rate weighted sum
    sum_k k*p_k collapses to; unlike the individual k-photon rates it
    carries no harmonics above the fundamental.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    return n_max * np.sin(np.asarray(phases, dtype=float) / 2) ** 2

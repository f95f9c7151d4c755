"""Fitting and phase-sensitivity analysis for count-rate scans.

The single-photon count rate carries the brightness information: its
shape A * m*s * exp(-m*s) with s = sin^2((phi - phi0)/2) is fitted over
(m, phi0, A) to recover the bright-fringe detected mean m.  Phase
offset and amplitude are nuisance parameters so that ingested real data
with unknown efficiency lumping fit the same model.

Sensitivity follows standard error propagation Delta(phi) =
Delta(O) / |d<O>/dphi|: for the mean-photon readout this closes to
1 / (sqrt(n_max) * |cos(phi/2)|), and for a k-photon rate readout with
binomial counting variance p_k(1-p_k)/N it closes to

    2 * sqrt(1/p_k - 1)
    ------------------------------------------------
    sqrt(N) * |k/(n_max sin^2(phi/2)) - 1| * n_max * |sin phi|

which diverges where the rate curve is stationary: at the fringe
extremes and wherever the detected mean crosses k.  Singular points
return +inf (not an error) so whole curves can be tabulated and
plotted.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from .coherent import poisson_pmf
from .scan import ScanResult

__all__ = [
    "FitResult",
    "SensitivityCurve",
    "fit_nmax",
    "fit_single_photon_curve",
    "correct_counts",
    "sensitivity_mean",
    "sensitivity_fock",
    "sensitivity_curve",
    "singular_phase",
    "optimal_phase",
]

# relative half-width of the float-noise window treated as exactly
# singular (the closed forms divide by k - n*sin^2(phi/2), which cannot
# hit zero exactly in floats at the analytic singular phases)
_SINGULAR_RTOL = 4.0 * np.finfo(float).eps


@dataclass(frozen=True)
class FitResult:
    """Outcome of the single-photon-rate fit.

    n_max_hat is the bright-fringe detected mean; phase_offset_hat
    aligns the phase grid to the fringe, amplitude_scale_hat lumps
    repetition rate and efficiency.  converged is False when no start
    of the optimizer met its tolerances; the best parameters found are
    still reported.
    """

    n_max_hat: float
    phase_offset_hat: float
    amplitude_scale_hat: float
    residual_sum_squares: float
    converged: bool


@dataclass(frozen=True)
class SensitivityCurve:
    """Tabulated phase uncertainty Delta(phi) for one readout scheme.

    scheme is "mean-photon" or "fock-k" (e.g. "fock-2"); delta_phi is
    +inf exactly where the readout's expectation is stationary in phi.
    """

    phases: np.ndarray
    delta_phi: np.ndarray
    scheme: str
    n_max: float
    n_pulses: int

    def __post_init__(self):
        object.__setattr__(self, "phases", np.asarray(self.phases, dtype=float))
        object.__setattr__(self, "delta_phi", np.asarray(self.delta_phi, dtype=float))
        if self.phases.shape != self.delta_phi.shape:
            raise ValueError("phases and delta_phi must have matching shapes")
        if np.any(self.delta_phi < 0):
            raise ValueError("delta_phi must be >= 0")


def _rate_model(phases, m, phi0, amp):
    s = np.sin((phases - phi0) / 2.0) ** 2
    ms = m * s
    return amp * ms * np.exp(-ms)


def _phase_offset_guess(result: ScanResult) -> float:
    """First-harmonic phase of the weighted-sum curve locates the fringe."""
    ks = np.arange(result.counts.shape[1])
    mean_curve = result.counts @ ks / result.pulses_per_point
    z = np.sum(mean_curve * np.exp(-1j * result.phases))
    if abs(z) == 0.0:
        return 0.0
    # mean ~ C*(1 - cos(phi - phi0)) projects to z = -C*(P/2)*e^{-i phi0}
    return math.atan2(z.imag, -z.real)


def fit_nmax(result: ScanResult) -> FitResult:
    """Least-squares fit of a scan's single-photon probability curve.

    Extracts p_1 = counts[:, 1] / pulses_per_point and fits it with
    `fit_single_photon_curve`; see there for the model and tolerances.

    Raises ValueError when the scan has fewer than 10 phase points or
    an all-zero single-photon column.
    """
    if result.phases.size < 10:
        raise ValueError(
            f"need at least 10 phase points to fit, got {result.phases.size}"
        )
    if result.counts.shape[1] < 2:
        raise ValueError("scan result has no single-photon column")
    p1 = result.counts[:, 1] / result.pulses_per_point
    return fit_single_photon_curve(result.phases, p1,
                                   phi0_guess=_phase_offset_guess(result))


def fit_single_photon_curve(phases, p1, phi0_guess: float = 0.0) -> FitResult:
    """Fit p_1(phi) = A * m*s * exp(-m*s), s = sin^2((phi - phi0)/2).

    Multi-start bounded least squares over m in (0, 100], phi0 in
    [-pi, pi], A > 0; a start is converged when the relative RSS
    improvement per step falls below 1e-10 (the optimizer is run
    tighter than that).  `phi0_guess` seeds one of the starts.

    Raises ValueError when `p1` is all zero.
    """
    phases = np.asarray(phases, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    if phases.shape != p1.shape:
        raise ValueError("phases and p1 must have matching shapes")
    if not np.any(p1 > 0):
        raise ValueError("single-photon column is all zero; nothing to fit")

    phi0_guesses = [0.0]
    if abs(phi0_guess) > 1e-12:
        phi0_guesses.append(float(phi0_guess))

    peak = float(p1.max())
    lower = np.array([1e-9, -np.pi, 1e-12])
    upper = np.array([100.0, np.pi, np.inf])

    best = None
    for m0 in (0.3, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0):
        for phi0 in phi0_guesses:
            # amplitude start matching the observed peak for this m
            s_star = min(1.0, 1.0 / m0)
            model_peak = m0 * s_star * math.exp(-m0 * s_star)
            a0 = peak / model_peak if model_peak > 0 else 1.0
            x0 = np.clip([m0, phi0, max(a0, 1e-9)], lower, upper)
            res = least_squares(
                lambda x: _rate_model(phases, *x) - p1,
                x0,
                bounds=(lower, upper),
                ftol=1e-12,
                xtol=1e-12,
                gtol=1e-12,
                max_nfev=2000,
            )
            if best is None or res.cost < best.cost:
                best = res

    rss = float(2.0 * best.cost)  # least_squares cost is 0.5 * sum(res^2)
    m_hat, phi0_hat, a_hat = best.x
    return FitResult(
        n_max_hat=float(m_hat),
        phase_offset_hat=float(phi0_hat),
        amplitude_scale_hat=float(a_hat),
        residual_sum_squares=rss,
        converged=bool(best.success),
    )


def correct_counts(observed, cm):
    """Undo detector cross-talk by inverting the confusion matrix.

    Solves observed^T = truth^T @ p for the truth vector; small negative
    components from noise are clipped to zero and the vector is
    renormalized to the observed total.

    Parameters
    ----------
    observed: array of float
        Observed class probabilities (or rates) for classes 0..K.
    cm: ConfusionMatrix
        Analytic classification probabilities for the same classes.

    Returns
    -------
    (corrected, clipped): ndarray and bool
        The corrected vector, and whether any clipping occurred.
    """
    observed = np.asarray(observed, dtype=float)
    p = cm.p
    if observed.shape != (p.shape[0],):
        raise ValueError(
            f"observed length {observed.shape} does not match matrix {p.shape}"
        )
    cond = np.linalg.cond(p.T)
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError(
            f"confusion matrix is ill-conditioned (cond={cond:.3g}); "
            "correction would amplify noise unboundedly"
        )
    truth = np.linalg.solve(p.T, observed)
    clipped = bool(np.any(truth < 0))
    if clipped:
        total = truth.sum()
        truth = np.clip(truth, 0.0, None)
        if truth.sum() > 0:
            truth *= total / truth.sum()
    return truth, clipped


def sensitivity_mean(n_max: float, phi):
    """Phase uncertainty of the mean-photon readout, per pulse.

    1 / (sqrt(n_max) * |cos(phi/2)|); +inf at the bright fringe where
    the mean is stationary.  Scale by 1/sqrt(N) for N pulses.
    """
    if n_max <= 0:
        raise ValueError(f"n_max must be > 0, got {n_max}")
    phi = np.asarray(phi, dtype=float)
    c = np.abs(np.cos(phi / 2.0))
    with np.errstate(divide="ignore"):
        out = np.where(c <= _SINGULAR_RTOL, np.inf, 1.0 / (np.sqrt(n_max) * np.where(c > 0, c, 1.0)))
    if out.ndim == 0:
        return float(out)
    return out


def sensitivity_fock(k: int, n_max: float, phi, n_pulses: int = 1):
    """Phase uncertainty when reading out the k-photon count rate.

    Evaluates the closed form above with p_k from the ideal rate
    formula.  Returns +inf where the detected mean equals k (the rate
    curve's maximum, worst operating point) and at the fringe extremes
    where sin(phi) vanishes; the float-noise window around those phases
    maps to +inf as well.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n_max <= 0:
        raise ValueError(f"n_max must be > 0, got {n_max}")
    if n_pulses < 1:
        raise ValueError(f"n_pulses must be >= 1, got {n_pulses}")
    phi = np.asarray(phi, dtype=float)
    s = np.sin(phi / 2.0) ** 2
    ns = n_max * s
    pk = poisson_pmf(ns, k)
    sinphi = np.abs(np.sin(phi))

    # distance of the detected mean from the singular crossing at k
    gap = np.abs(k - ns)
    singular = (gap <= _SINGULAR_RTOL * k) | (sinphi <= _SINGULAR_RTOL) | (pk <= 0.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        num = 2.0 * np.sqrt(1.0 / np.where(pk > 0, pk, 1.0) - 1.0)
        den = np.sqrt(n_pulses) * np.where(ns > 0, gap / np.where(ns > 0, ns, 1.0), np.inf) * n_max * sinphi
        out = np.where(singular, np.inf, num / np.where(den > 0, den, 1.0))
    if out.ndim == 0:
        return float(out)
    return out


def sensitivity_curve(scheme: str, n_max: float, phases,
                      n_pulses: int = 1) -> SensitivityCurve:
    """Tabulate Delta(phi) over a phase grid for one readout scheme.

    scheme is "mean-photon" or "fock-<k>" with integer k >= 1.
    """
    phases = np.asarray(phases, dtype=float)
    if scheme == "mean-photon":
        delta = sensitivity_mean(n_max, phases) / math.sqrt(n_pulses)
    elif scheme.startswith("fock-"):
        k = int(scheme.split("-", 1)[1])
        delta = sensitivity_fock(k, n_max, phases, n_pulses)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return SensitivityCurve(
        phases=phases, delta_phi=np.atleast_1d(delta), scheme=scheme,
        n_max=n_max, n_pulses=n_pulses,
    )


def singular_phase(k: int, n_max: float) -> float | None:
    """Phase in (0, pi) where the detected mean crosses k, if any."""
    if k < 1 or n_max <= 0:
        raise ValueError("need k >= 1 and n_max > 0")
    if k > n_max:
        return None
    return 2.0 * math.asin(math.sqrt(k / n_max))


def optimal_phase(k: int, n_max: float, n_pulses: int = 1) -> float:
    """Operating phase in (0, pi) minimizing the k-photon-rate uncertainty.

    Grid scan bracketing plus bounded refinement to 1e-6 rad, skipping
    the singular crossing where the uncertainty diverges.  The result
    does not depend on n_pulses (a uniform 1/sqrt(N) factor).
    """
    eps = 1e-9
    grid = np.linspace(eps, math.pi - eps, 4001)
    vals = sensitivity_fock(k, n_max, grid, n_pulses)
    finite = np.isfinite(vals)
    if not np.any(finite):
        raise ValueError("uncertainty is singular over the whole interval")
    i_best = int(np.argmin(np.where(finite, vals, np.inf)))
    lo = grid[max(i_best - 1, 0)]
    hi = grid[min(i_best + 1, grid.size - 1)]
    res = minimize_scalar(
        lambda p: float(sensitivity_fock(k, n_max, float(p), n_pulses)),
        bounds=(lo, hi), method="bounded", options={"xatol": 1e-6},
    )
    refined = float(res.x)
    if res.fun <= vals[i_best]:
        return refined
    return float(grid[i_best])

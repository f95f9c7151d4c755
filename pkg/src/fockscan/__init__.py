"""Coherent-state interferometry with photon-number-resolving readout.

Analytic count-rate formulas, a shot-by-shot Monte Carlo of the full
detection chain (Poisson photon statistics, dark counts, avalanche
pulse heights, threshold classification), brightness fitting and
phase-sensitivity analysis, and shifted-superposition synthesis of
sub-Rayleigh fringe patterns.
"""

__version__ = "0.1.0"

from .coherent import (
    CoherentField,
    InterferometerSetting,
    PhotonDistribution,
    apply_efficiency,
    detected_field,
    expected_rate,
    fock_overlap,
    mean_photon_curve,
    output_field,
    photon_distribution,
    poisson_pmf,
)
from .detector import (
    CalibrationError,
    ConfusionMatrix,
    DetectorModel,
    PulseHeightHistogram,
    ThresholdSet,
    add_dark_counts,
    calibrate_thresholds,
    classify,
    confusion_matrix,
    sample_pulse_height,
    scan_histogram,
)
from .estimation import (
    FitResult,
    SensitivityCurve,
    correct_counts,
    fit_nmax,
    fit_single_photon_curve,
    optimal_phase,
    sensitivity_curve,
    sensitivity_fock,
    sensitivity_mean,
    singular_phase,
)
from .scan import (
    SaturationWarning,
    ScanConfig,
    ScanResult,
    analytic_scan,
    default_phase_grid,
    mean_from_counts,
    run_scan,
    truncation_bias,
)
from .subrayleigh import (
    HarmonicSpectrum,
    Pattern,
    bentley_absorption,
    boto_pattern,
    fringe_spacing,
    harmonic_spectrum,
    pattern_from_function,
    pattern_from_values,
    residual_variation,
    superimpose,
    visibility,
)

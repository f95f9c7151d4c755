import numpy as np
import pytest

from fockscan import DetectorModel, ScanConfig, calibrate_thresholds, default_phase_grid


@pytest.fixture(scope="session")
def default_detector():
    return DetectorModel()


@pytest.fixture(scope="session")
def default_thresholds(default_detector):
    return calibrate_thresholds(default_detector, 7, ref_mean=3.95)


@pytest.fixture(scope="session")
def ideal_detector():
    """Near-noiseless chain: heights collapse onto k*gain, no dark events."""
    return DetectorModel(sigma1=1e-9, sigma0=0.0, dark_mean=0.0)


def ideal_config(n_max, pulses_per_point, k_max=20, n_points=100, seed=7,
                 rep_rate=40000.0, phases=None):
    det = DetectorModel(sigma1=1e-9, sigma0=0.0, dark_mean=0.0)
    thresholds = calibrate_thresholds(det, k_max, ref_mean=max(n_max, 1.0))
    if phases is None:
        phases = default_phase_grid(n_points)
    return ScanConfig(
        n_max=n_max, rep_rate=rep_rate, pulses_per_point=pulses_per_point,
        phases=np.asarray(phases, dtype=float), detector=det,
        thresholds=thresholds, master_seed=seed,
    )

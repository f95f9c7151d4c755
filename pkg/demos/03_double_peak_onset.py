#!/usr/bin/env python3
"""Onset of the single-photon double peak as the input brightens.

The single-photon rate is proportional to n*exp(-n) in the detected
mean n, which grows only until n = 1 and then falls.  While the
bright-fringe mean stays below one photon the rate curve follows the
intensity fringe; once it exceeds one, the bright fringe overshoots the
optimum and the curve splits into two peaks with a dip at maximum
intensity.  Five scans of increasing brightness walk through that
transition.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from fockscan import (
    DetectorModel,
    ScanConfig,
    calibrate_thresholds,
    default_phase_grid,
    expected_rate,
    run_scan,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

BRIGHTNESSES = [0.463, 0.99, 1.99, 3.95, 7.18]
PULSES = 100_000

detector = DetectorModel(sigma1=1e-9, sigma0=0.0, dark_mean=0.0)
phases = default_phase_grid(100)

fig, axes = plt.subplots(len(BRIGHTNESSES), 1, figsize=(6, 11), sharex=True)
for ax, n_max in zip(axes, BRIGHTNESSES):
    thresholds = calibrate_thresholds(detector, k_max=20, ref_mean=max(n_max, 1.0))
    config = ScanConfig(n_max=n_max, rep_rate=40_000.0, pulses_per_point=PULSES,
                        phases=phases, detector=detector, thresholds=thresholds,
                        master_seed=int(n_max * 1000))
    result = run_scan(config, workers=4)
    ax.plot(phases, result.rates[:, 1], ".", ms=3)
    ax.plot(phases, expected_rate(1, n_max, phases, 40_000.0), "-", lw=1)
    shape = "double peak" if n_max > 1 else "single peak"
    ax.set_ylabel("$R_1$ (Hz)")
    ax.set_title(f"bright-fringe mean {n_max} ({shape})", fontsize=9, loc="left")
axes[-1].set_xlabel("phase (rad)")
fig.tight_layout()
fig.savefig(OUT / "double_peak_onset.png", dpi=160)
print(f"wrote {OUT / 'double_peak_onset.png'}")
print("the dip at the bright fringe appears exactly once the detected "
      "mean passes one photon")

#!/usr/bin/env python3
"""Pulse-height discrimination: from avalanche charge to photon number.

A photon-number-resolving avalanche detector emits roughly gain
electrons per absorbed photon, so the pulse-height histogram of Poisson
light shows a comb of peaks at integer multiples of the gain.
Multiplication noise broadens the k-photon peak by sqrt(k), which is
why the comb washes out toward high k.  Decision thresholds placed at
the valleys between adjacent peaks classify each pulse into a photon
number on the fly; the confusion matrix quantifies how often a true
k-photon pulse lands in the wrong class.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fockscan import (
    DetectorModel,
    add_dark_counts,
    calibrate_thresholds,
    confusion_matrix,
    sample_pulse_height,
    scan_histogram,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

REF_MEAN = 3.95
detector = DetectorModel()  # gain 1.0, sigma1 0.15, sigma0 0.08, dark 0.02
thresholds = calibrate_thresholds(detector, k_max=7, ref_mean=REF_MEAN)
print("decision thresholds (electron units):",
      np.array2string(thresholds.levels, precision=3))

rng = np.random.default_rng(11)
photons = rng.poisson(REF_MEAN, 1_000_000)
heights = sample_pulse_height(add_dark_counts(photons, detector, rng), detector, rng)
hist = scan_histogram(heights, bin_width=0.02)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
centers = 0.5 * (hist.bin_edges[:-1] + hist.bin_edges[1:])
ax1.semilogy(centers, np.maximum(hist.counts, 0.5), lw=1)
for level in thresholds.levels:
    ax1.axvline(level, color="k", ls="--", lw=0.7)
ax1.set_xlabel("pulse height (electron units)")
ax1.set_ylabel("pulses per bin")
ax1.set_title("height histogram with decision thresholds")

cm = confusion_matrix(detector, thresholds)
im = ax2.imshow(cm.p, origin="lower", cmap="viridis", vmin=0, vmax=1)
ax2.set_xlabel("recorded photon number")
ax2.set_ylabel("true photon number")
ax2.set_title("classification probabilities")
fig.colorbar(im, ax=ax2, shrink=0.85)
fig.tight_layout()
fig.savefig(OUT / "pulse_height_discrimination.png", dpi=160)
print(f"wrote {OUT / 'pulse_height_discrimination.png'}")

diag = np.diag(cm.p)
print("correct-classification probability by k:",
      np.array2string(diag, precision=3))
print("peak overlap stays small below k = 5; beyond that the sqrt(k) "
      "broadening makes neighbors bleed into each other")

"""Command-line front end: run scans, calibrate thresholds, fit, and analyze.

Subcommands map one-to-one onto the analysis stages: `scan` runs the
Monte Carlo phase scan, `calibrate` places decision thresholds and
records a pulse-height histogram, `fit` recovers the bright-fringe mean
from a scan CSV, `sensitivity` tabulates phase-uncertainty curves, and
`subrayleigh` builds shifted-superposition patterns and their spectra.

Flag values override config-file entries, which override built-in
defaults; the effective configuration is always echoed to the run's
metadata sidecar.  Exit codes: 0 success, 2 configuration error
(including missing input files), 3 I/O or malformed-input error,
4 numeric failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, io
from .detector import (
    CalibrationError,
    DetectorModel,
    add_dark_counts,
    calibrate_thresholds,
    sample_pulse_height,
    scan_histogram,
)
from .estimation import fit_nmax, sensitivity_curve
from .scan import ScanConfig, ScanResult, analytic_scan, run_scan
from .subrayleigh import (
    Pattern,
    boto_pattern,
    fringe_spacing,
    harmonic_spectrum,
    pattern_from_values,
    residual_variation,
    superimpose,
    visibility,
)

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


class ConfigError(ValueError):
    """Invalid or inconsistent command configuration."""


DEFAULTS = {
    "scan": {
        "nmax": 3.95, "rep_rate": 40000.0, "pulses": 100000, "points": 100,
        "seed": 0, "kmax": 7, "gain": 1.0, "sigma1": 0.15, "sigma0": 0.08,
        "dark_mean": 0.02, "ref_mean": None, "thresholds": None,
        "workers": 1, "plots": False,
    },
    "calibrate": {
        "gain": 1.0, "sigma1": 0.15, "sigma0": 0.08, "dark_mean": 0.02,
        "kmax": 7, "ref_mean": 3.95, "samples": 200000, "bin_width": None,
        "seed": 0, "plots": False,
    },
    "fit": {
        "scan": None, "rep_rate": 1.0, "plots": False,
    },
    "sensitivity": {
        "nmax": 4.0, "k": "1,2,4", "n_pulses": 1, "points": 1000,
        "plots": False,
    },
    "subrayleigh": {
        "nmax": 3.95, "k": 7, "scan": None, "shifts": "1,2,3,5",
        "points": 720, "wavelength": 780e-9, "normalize": False,
        "plots": False,
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fockscan",
        description="Interferometer phase scans with photon-number-resolving readout.",
    )
    parser.add_argument("--version", action="version", version=f"fockscan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", required=True, help="output directory (created if missing)")
        p.add_argument("--config", help="JSON file with default flag values")
        p.add_argument("--plots", action="store_true", default=None,
                       help="also write vector-graphic plots")

    p = sub.add_parser("scan", help="Monte Carlo phase scan")
    p.add_argument("--nmax", type=float, help="detected mean photon number at the bright fringe")
    p.add_argument("--rep-rate", type=float, dest="rep_rate", help="laser repetition rate in Hz")
    p.add_argument("--pulses", type=int, help="pulses per phase point")
    p.add_argument("--points", type=int, help="phase points over [0, 2pi)")
    p.add_argument("--seed", type=int, help="64-bit master seed")
    p.add_argument("--kmax", type=int, help="number of threshold levels (top class)")
    p.add_argument("--gain", type=float, help="electrons per single-photon avalanche")
    p.add_argument("--sigma1", type=float, help="one-photon peak width, electrons")
    p.add_argument("--sigma0", type=float, help="pedestal width, electrons")
    p.add_argument("--dark-mean", type=float, dest="dark_mean", help="mean dark events per gate")
    p.add_argument("--ref-mean", type=float, dest="ref_mean",
                   help="Poisson mean weighting the threshold calibration (default: nmax)")
    p.add_argument("--thresholds", help="thresholds CSV to use instead of calibrating")
    p.add_argument("--workers", type=int, help="worker threads (result is identical for any count)")
    add_common(p)

    p = sub.add_parser("calibrate", help="place thresholds and record a pulse-height histogram")
    p.add_argument("--gain", type=float, help="electrons per single-photon avalanche")
    p.add_argument("--sigma1", type=float, help="one-photon peak width, electrons")
    p.add_argument("--sigma0", type=float, help="pedestal width, electrons")
    p.add_argument("--dark-mean", type=float, dest="dark_mean", help="mean dark events per gate")
    p.add_argument("--kmax", type=int, help="number of threshold levels")
    p.add_argument("--ref-mean", type=float, dest="ref_mean",
                   help="Poisson mean of the calibration light")
    p.add_argument("--samples", type=int, help="pulses to histogram")
    p.add_argument("--bin-width", type=float, dest="bin_width",
                   help="histogram bin width, electrons (default gain/50)")
    p.add_argument("--seed", type=int, help="seed for the histogram sample")
    add_common(p)

    p = sub.add_parser("fit", help="fit the single-photon curve of a scan CSV")
    p.add_argument("--scan", help="scan CSV to fit")
    p.add_argument("--rep-rate", type=float, dest="rep_rate", help="repetition rate of the data")
    add_common(p)

    p = sub.add_parser("sensitivity", help="phase-uncertainty curves per readout scheme")
    p.add_argument("--nmax", type=float, help="bright-fringe detected mean")
    p.add_argument("--k", help="comma-separated photon numbers for rate readouts")
    p.add_argument("--n-pulses", type=int, dest="n_pulses", help="pulses per phase estimate")
    p.add_argument("--points", type=int, help="grid points over (0, 2pi)")
    add_common(p)

    p = sub.add_parser("subrayleigh", help="shifted-superposition fringe synthesis")
    p.add_argument("--nmax", type=float, help="bright-fringe mean of the analytic source pattern")
    p.add_argument("--k", type=int, help="photon-number column to use as the pattern")
    p.add_argument("--scan", help="scan CSV to take the pattern from (instead of analytic)")
    p.add_argument("--shifts", help="comma-separated shift counts, each dividing the grid")
    p.add_argument("--points", type=int, help="grid size of the analytic pattern")
    p.add_argument("--wavelength", type=float, help="optical wavelength for fringe spacings")
    p.add_argument("--normalize", action="store_true", default=None,
                   help="divide superpositions by the shift count")
    add_common(p)

    return parser


def effective_config(args: argparse.Namespace) -> dict:
    """Merge CLI flags over config-file values over built-in defaults."""
    cfg = dict(DEFAULTS[args.command])
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys for {args.command}: {sorted(unknown)}")
        cfg.update(loaded)
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg["out"] = args.out
    return cfg


def _ensure_outdir(out) -> Path:
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    probe = out_dir / ".write-probe"
    try:
        probe.write_text("")
    finally:
        if probe.exists():
            probe.unlink()
    return out_dir


def _require_file(path, what) -> Path:
    if path is None:
        raise ConfigError(f"missing required input: {what}")
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{what} does not exist: {p}")
    return p


def _int_list(text, what) -> list[int]:
    try:
        values = [int(v) for v in str(text).split(",") if str(v).strip()]
    except ValueError:
        raise ConfigError(f"{what} must be comma-separated integers, got {text!r}") from None
    if not values:
        raise ConfigError(f"{what} must not be empty")
    return values


def _save_plot(fig, path):
    fig.savefig(path)


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


# ---------------------------------------------------------------------------
# subcommands

def cmd_scan(cfg: dict) -> int:
    out_dir = _ensure_outdir(cfg["out"])
    if cfg["nmax"] < 0:
        raise ConfigError(f"nmax must be >= 0, got {cfg['nmax']}")
    try:
        detector = DetectorModel(
            gain=cfg["gain"], sigma1=cfg["sigma1"], sigma0=cfg["sigma0"],
            dark_mean=cfg["dark_mean"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg["thresholds"] is not None:
        thresholds = io.read_thresholds_csv(_require_file(cfg["thresholds"], "thresholds CSV"))
    else:
        ref_mean = cfg["ref_mean"] if cfg["ref_mean"] is not None else cfg["nmax"]
        thresholds = calibrate_thresholds(detector, cfg["kmax"], ref_mean=ref_mean)
    if cfg["points"] < 1:
        raise ConfigError(f"points must be >= 1, got {cfg['points']}")
    phases = np.linspace(0.0, 2.0 * np.pi, cfg["points"], endpoint=False)
    try:
        config = ScanConfig(
            n_max=cfg["nmax"], rep_rate=cfg["rep_rate"],
            pulses_per_point=cfg["pulses"], phases=phases,
            detector=detector, thresholds=thresholds,
            master_seed=cfg["seed"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    result = run_scan(config, workers=cfg["workers"])
    io.write_scan_csv(out_dir / "scan.csv", result)
    io.write_scan_metadata(out_dir / "meta.txt", config, extra={"command": "scan"})

    if cfg["plots"]:
        plt = _pyplot()
        rates = result.rates
        overlay = analytic_scan(cfg["nmax"], phases, cfg["rep_rate"], result.k_max)
        for k in range(result.k_max + 1):
            fig, ax = plt.subplots(figsize=(6, 4))
            ax.plot(phases, rates[:, k], ".", ms=3, label="Monte Carlo")
            ax.plot(phases, overlay[:, k], "-", lw=1, label="ideal rate")
            ax.set_xlabel("phase (rad)")
            ax.set_ylabel(f"{k}-photon count rate (Hz)")
            ax.legend(frameon=False)
            fig.tight_layout()
            _save_plot(fig, out_dir / f"scan_k{k}.svg")
            plt.close(fig)
    return 0


def cmd_calibrate(cfg: dict) -> int:
    out_dir = _ensure_outdir(cfg["out"])
    try:
        detector = DetectorModel(
            gain=cfg["gain"], sigma1=cfg["sigma1"], sigma0=cfg["sigma0"],
            dark_mean=cfg["dark_mean"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    thresholds = calibrate_thresholds(detector, cfg["kmax"], ref_mean=cfg["ref_mean"])
    io.write_thresholds_csv(out_dir / "thresholds.csv", thresholds)

    rng = np.random.default_rng(cfg["seed"])
    photons = rng.poisson(cfg["ref_mean"], cfg["samples"])
    true_k = add_dark_counts(photons, detector, rng)
    heights = sample_pulse_height(true_k, detector, rng)
    bin_width = cfg["bin_width"] if cfg["bin_width"] is not None else detector.gain / 50.0
    if bin_width <= 0:
        raise ConfigError(f"bin width must be > 0, got {bin_width}")
    hist = scan_histogram(heights, bin_width)
    io.write_histogram_csv(out_dir / "histogram.csv", hist)

    if cfg["plots"]:
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(6, 4))
        centers = 0.5 * (hist.bin_edges[:-1] + hist.bin_edges[1:])
        ax.step(centers, hist.counts, where="mid", lw=1)
        for level in thresholds.levels:
            ax.axvline(level, color="k", ls="--", lw=0.8)
        ax.set_xlabel("pulse height (electron units)")
        ax.set_ylabel("pulses per bin")
        fig.tight_layout()
        _save_plot(fig, out_dir / "histogram.svg")
        plt.close(fig)
    return 0


def cmd_fit(cfg: dict) -> int:
    out_dir = _ensure_outdir(cfg["out"])
    scan_path = _require_file(cfg["scan"], "scan CSV")
    result = io.read_scan_csv(scan_path, rep_rate=cfg["rep_rate"])
    fit = fit_nmax(result)
    io.write_fit_report(out_dir / "fit.txt", fit, source=str(scan_path))

    if cfg["plots"]:
        plt = _pyplot()
        from .estimation import _rate_model

        fig, ax = plt.subplots(figsize=(6, 4))
        p1 = result.counts[:, 1] / result.pulses_per_point
        ax.plot(result.phases, p1, ".", ms=3, label="data")
        dense = np.linspace(result.phases.min(), result.phases.max(), 500)
        ax.plot(dense, _rate_model(dense, fit.n_max_hat, fit.phase_offset_hat,
                                   fit.amplitude_scale_hat), "-", lw=1,
                label=f"fit: n_max = {fit.n_max_hat:.4g}")
        ax.set_xlabel("phase (rad)")
        ax.set_ylabel("single-photon probability")
        ax.legend(frameon=False)
        fig.tight_layout()
        _save_plot(fig, out_dir / "fit.svg")
        plt.close(fig)
    return 0


def cmd_sensitivity(cfg: dict) -> int:
    out_dir = _ensure_outdir(cfg["out"])
    ks = _int_list(cfg["k"], "--k")
    if cfg["points"] < 2:
        raise ConfigError(f"points must be >= 2, got {cfg['points']}")
    if cfg["nmax"] <= 0:
        raise ConfigError(f"nmax must be > 0 for sensitivity analysis, got {cfg['nmax']}")
    # open grid: the endpoints are blind points of every scheme
    phases = np.linspace(0.0, 2.0 * np.pi, cfg["points"] + 2)[1:-1]
    curves = [sensitivity_curve("mean-photon", cfg["nmax"], phases, cfg["n_pulses"])]
    for k in ks:
        if k < 1:
            raise ConfigError(f"--k entries must be >= 1, got {k}")
        curves.append(sensitivity_curve(f"fock-{k}", cfg["nmax"], phases, cfg["n_pulses"]))
    for curve in curves:
        name = "mean" if curve.scheme == "mean-photon" else curve.scheme.replace("-", "_k")
        io.write_sensitivity_csv(out_dir / f"sensitivity_{name}.csv", curve)

    if cfg["plots"]:
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(6, 4))
        for curve in curves:
            ax.plot(curve.phases, curve.delta_phi, lw=1, label=curve.scheme)
        ax.set_yscale("log")
        ax.set_xlabel("phase (rad)")
        ax.set_ylabel("phase uncertainty (rad)")
        ax.legend(frameon=False)
        fig.tight_layout()
        _save_plot(fig, out_dir / "sensitivity.svg")
        plt.close(fig)
    return 0


def cmd_subrayleigh(cfg: dict) -> int:
    out_dir = _ensure_outdir(cfg["out"])
    shifts = _int_list(cfg["shifts"], "--shifts")
    if cfg["k"] < 0:
        raise ConfigError(f"--k must be >= 0, got {cfg['k']}")

    if cfg["scan"] is not None:
        result = io.read_scan_csv(_require_file(cfg["scan"], "scan CSV"))
        if cfg["k"] > result.k_max:
            raise ConfigError(
                f"scan CSV only has columns up to k={result.k_max}, asked for {cfg['k']}"
            )
        phases = result.phases
        spacing = np.diff(phases)
        uniform = np.allclose(spacing, spacing[0], rtol=1e-9, atol=1e-12)
        covers = np.isclose(phases[0], 0.0, atol=1e-12) and np.isclose(
            phases[-1] + spacing[0], 2.0 * np.pi, rtol=1e-9
        )
        if not (uniform and covers):
            raise ConfigError(
                "scan phases must be a uniform grid over [0, 2pi) to form a pattern"
            )
        base = pattern_from_values(result.counts[:, cfg["k"]] / result.pulses_per_point)
        source = f"scan:{cfg['scan']}:k{cfg['k']}"
    else:
        from .coherent import expected_rate

        grid = np.arange(cfg["points"]) * (2.0 * np.pi / cfg["points"])
        base = pattern_from_values(expected_rate(cfg["k"], cfg["nmax"], grid))
        source = f"analytic:nmax{cfg['nmax']}:k{cfg['k']}"

    for n in shifts:
        if base.grid_size % n != 0:
            raise ConfigError(
                f"shift count {n} does not divide the pattern grid size {base.grid_size}"
            )

    io.write_pattern_csv(out_dir / "pattern_base.csv", base)
    report = [
        f"format = fockscan-subrayleigh {io.FORMAT_VERSION}",
        f"artifact_version = {__version__}",
        f"source = {source}",
        f"wavelength_m = {cfg['wavelength']:.17g}",
        f"rayleigh_spacing_m = {cfg['wavelength'] / 2:.17g}",
    ]
    for n in shifts:
        sup = superimpose(base, n)
        if cfg["normalize"]:
            sup = Pattern(sup.values / n)
        spectrum = harmonic_spectrum(sup)
        io.write_pattern_csv(out_dir / f"pattern_shift{n}.csv", sup)
        io.write_spectrum_csv(out_dir / f"spectrum_shift{n}.csv", spectrum)
        spacing = fringe_spacing(sup, cfg["wavelength"])
        report += [
            f"shift{n}_fringe_spacing_m = {spacing:.17g}",
            f"shift{n}_visibility = {visibility(sup):.17g}",
            f"shift{n}_residual_variation = {residual_variation(base, n):.17g}",
        ]
    (out_dir / "report.txt").write_text("\n".join(report) + "\n")

    if cfg["plots"]:
        plt = _pyplot()
        rows = len(shifts) + 1
        fig, axes = plt.subplots(rows, 1, figsize=(6, 2.2 * rows), sharex=True)
        axes = np.atleast_1d(axes)
        axes[0].plot(base.phases, base.values, lw=1)
        axes[0].set_ylabel("base")
        for ax, n in zip(axes[1:], shifts):
            sup = superimpose(base, n)
            vals = sup.values / n if cfg["normalize"] else sup.values
            ax.plot(sup.phases, vals, lw=1)
            ax.set_ylabel(f"{n} shifts")
        axes[-1].set_xlabel("phase (rad)")
        fig.tight_layout()
        _save_plot(fig, out_dir / "superposition.svg")
        plt.close(fig)
    return 0


COMMANDS = {
    "scan": cmd_scan,
    "calibrate": cmd_calibrate,
    "fit": cmd_fit,
    "sensitivity": cmd_sensitivity,
    "subrayleigh": cmd_subrayleigh,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = effective_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"fockscan: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except io.SchemaError as exc:
        print(f"fockscan: input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"fockscan: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CalibrationError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"fockscan: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

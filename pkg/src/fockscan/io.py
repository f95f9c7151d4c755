"""CSV and sidecar formats shared by the CLI, tests, and downstream analysis.

Every CSV starts with a version comment line `# fockscan-csv v1 <kind>`
followed by a header row; floats are serialized with 17 significant
digits so values round-trip exactly, and infinities are written as the
literal `inf`.  Scan CSVs plus their metadata sidecar are the
interchange format: the sidecar echoes the full configuration and seed,
which is enough to regenerate the CSV byte for byte, and measured data
in the same CSV schema can be ingested unchanged.
"""

import datetime
import hashlib
from pathlib import Path

import numpy as np

from . import __version__
from .detector import DetectorModel, PulseHeightHistogram, ThresholdSet
from .estimation import FitResult, SensitivityCurve
from .scan import ScanConfig, ScanResult
from .subrayleigh import HarmonicSpectrum, Pattern

__all__ = [
    "SchemaError",
    "write_scan_csv",
    "read_scan_csv",
    "write_scan_metadata",
    "read_metadata",
    "config_from_metadata",
    "write_thresholds_csv",
    "read_thresholds_csv",
    "write_histogram_csv",
    "write_sensitivity_csv",
    "write_pattern_csv",
    "read_pattern_csv",
    "write_spectrum_csv",
    "write_fit_report",
]

FORMAT_VERSION = "v1"


class SchemaError(ValueError):
    """A file does not conform to its declared CSV schema."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _version_line(kind: str) -> str:
    return f"# fockscan-csv {FORMAT_VERSION} {kind}"


def _read_csv_body(path, kind, expected_header):
    """Yield (line_no, fields) for data rows after validating the preamble."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# fockscan-csv"):
        raise SchemaError(path, 1, f"missing '# fockscan-csv' version line for {kind}")
    tag = lines[0].lstrip("# ").split()
    if len(tag) < 3 or tag[1] != FORMAT_VERSION or tag[2] != kind:
        raise SchemaError(path, 1, f"expected '{_version_line(kind)}', got {lines[0]!r}")
    if len(lines) < 2:
        raise SchemaError(path, 2, "missing header row")
    header = [c.strip() for c in lines[1].split(",")]
    if expected_header is not None and header != expected_header:
        raise SchemaError(
            path, 2, f"expected header {','.join(expected_header)!r}, got {lines[1]!r}"
        )
    rows = []
    for line_no, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        rows.append((line_no, [c.strip() for c in line.split(",")]))
    return header, rows


def _parse_float(path, line_no, text):
    try:
        return float(text)
    except ValueError:
        raise SchemaError(path, line_no, f"not a number: {text!r}") from None


def _parse_int(path, line_no, text):
    try:
        return int(text)
    except ValueError:
        raise SchemaError(path, line_no, f"not an integer: {text!r}") from None


# ---------------------------------------------------------------------------
# scan results

def write_scan_csv(path, result: ScanResult):
    """Scan CSV: phi_rad, n_pulses, c0..cK; one row per phase point."""
    k_max = result.k_max
    header = ["phi_rad", "n_pulses"] + [f"c{k}" for k in range(k_max + 1)]
    lines = [_version_line("scan"), ",".join(header)]
    for i, phi in enumerate(result.phases):
        row = [_fmt(phi), str(result.pulses_per_point)]
        row += [str(int(c)) for c in result.counts[i]]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_scan_csv(path, rep_rate: float = 1.0) -> ScanResult:
    """Read a scan CSV (simulated or measured) back into a ScanResult.

    The CSV does not carry the repetition rate; pass it explicitly or
    take it from the metadata sidecar.  The fingerprint of an ingested
    result is the hash of the file contents.
    """
    header, rows = _read_csv_body(path, "scan", None)
    if len(header) < 3 or header[:2] != ["phi_rad", "n_pulses"]:
        raise SchemaError(path, 2, f"bad scan header: {','.join(header)!r}")
    n_cols = len(header)
    phases, counts, pulses = [], [], []
    for line_no, fields in rows:
        if len(fields) != n_cols:
            raise SchemaError(
                path, line_no, f"expected {n_cols} columns, got {len(fields)}"
            )
        phases.append(_parse_float(path, line_no, fields[0]))
        pulses.append(_parse_int(path, line_no, fields[1]))
        row = [_parse_int(path, line_no, f) for f in fields[2:]]
        if any(c < 0 for c in row):
            raise SchemaError(path, line_no, "negative count")
        counts.append(row)
    if not phases:
        raise SchemaError(path, 3, "scan CSV has no data rows")
    if len(set(pulses)) != 1:
        raise SchemaError(path, 3, "n_pulses must be constant across rows")
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return ScanResult(
        phases=np.asarray(phases),
        counts=np.asarray(counts, dtype=np.int64),
        pulses_per_point=pulses[0],
        rep_rate=rep_rate,
        config_fingerprint=f"ingested-{digest}",
    )


# ---------------------------------------------------------------------------
# metadata sidecar

def write_scan_metadata(path, config: ScanConfig, extra: dict | None = None):
    """Sidecar with the full effective configuration, seed, version and
    timestamp; parsing it back regenerates the scan bit for bit."""
    det = config.detector
    meta = {
        "format": f"fockscan-meta {FORMAT_VERSION}",
        "artifact_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "master_seed": str(int(config.master_seed)),
        "n_max": _fmt(config.n_max),
        "rep_rate": _fmt(config.rep_rate),
        "pulses_per_point": str(config.pulses_per_point),
        "phases_rad": ",".join(_fmt(p) for p in config.phases),
        "detector_gain": _fmt(det.gain),
        "detector_sigma1": _fmt(det.sigma1),
        "detector_sigma0": _fmt(det.sigma0),
        "detector_dark_mean": _fmt(det.dark_mean),
        "detector_saturation_rate": _fmt(det.saturation_rate),
        "threshold_levels": ",".join(_fmt(v) for v in config.thresholds.levels),
        "config_fingerprint": config.fingerprint(),
    }
    if extra:
        meta.update({k: str(v) for k, v in extra.items()})
    lines = [f"{k} = {v}" for k, v in meta.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_metadata(path) -> dict:
    """Parse a `key = value` sidecar into a dict."""
    meta = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "=" not in line:
            raise SchemaError(path, line_no, f"expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        meta[key.strip()] = value.strip()
    return meta


def config_from_metadata(meta: dict) -> ScanConfig:
    """Rebuild the exact ScanConfig echoed in a metadata sidecar."""
    detector = DetectorModel(
        gain=float(meta["detector_gain"]),
        sigma1=float(meta["detector_sigma1"]),
        sigma0=float(meta["detector_sigma0"]),
        dark_mean=float(meta["detector_dark_mean"]),
        saturation_rate=float(meta["detector_saturation_rate"]),
    )
    thresholds = ThresholdSet(
        np.array([float(v) for v in meta["threshold_levels"].split(",")])
    )
    return ScanConfig(
        n_max=float(meta["n_max"]),
        rep_rate=float(meta["rep_rate"]),
        pulses_per_point=int(meta["pulses_per_point"]),
        phases=np.array([float(v) for v in meta["phases_rad"].split(",")]),
        detector=detector,
        thresholds=thresholds,
        master_seed=int(meta["master_seed"]),
    )


# ---------------------------------------------------------------------------
# detector artifacts

def write_thresholds_csv(path, thresholds: ThresholdSet):
    lines = [_version_line("thresholds"), "k,level_electrons"]
    for k, level in enumerate(thresholds.levels, start=1):
        lines.append(f"{k},{_fmt(level)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_thresholds_csv(path) -> ThresholdSet:
    _, rows = _read_csv_body(path, "thresholds", ["k", "level_electrons"])
    levels = []
    for line_no, fields in rows:
        if len(fields) != 2:
            raise SchemaError(path, line_no, f"expected 2 columns, got {len(fields)}")
        k = _parse_int(path, line_no, fields[0])
        if k != len(levels) + 1:
            raise SchemaError(path, line_no, f"levels must be numbered 1..K, got {k}")
        levels.append(_parse_float(path, line_no, fields[1]))
    if not levels:
        raise SchemaError(path, 3, "thresholds CSV has no data rows")
    return ThresholdSet(np.asarray(levels))


def write_histogram_csv(path, histogram: PulseHeightHistogram):
    lines = [_version_line("histogram"), "bin_lo_electrons,bin_hi_electrons,count"]
    for lo, hi, count in zip(
        histogram.bin_edges[:-1], histogram.bin_edges[1:], histogram.counts
    ):
        lines.append(f"{_fmt(lo)},{_fmt(hi)},{int(count)}")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# analysis artifacts

def write_sensitivity_csv(path, curve: SensitivityCurve):
    lines = [_version_line("sensitivity"), "phi_rad,delta_phi"]
    for phi, dphi in zip(curve.phases, curve.delta_phi):
        dphi_text = "inf" if np.isinf(dphi) else _fmt(dphi)
        lines.append(f"{_fmt(phi)},{dphi_text}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_pattern_csv(path, pattern: Pattern):
    lines = [_version_line("pattern"), "phi_rad,value"]
    for phi, val in zip(pattern.phases, pattern.values):
        lines.append(f"{_fmt(phi)},{_fmt(val)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_pattern_csv(path) -> Pattern:
    _, rows = _read_csv_body(path, "pattern", ["phi_rad", "value"])
    values = []
    for line_no, fields in rows:
        if len(fields) != 2:
            raise SchemaError(path, line_no, f"expected 2 columns, got {len(fields)}")
        _parse_float(path, line_no, fields[0])
        values.append(_parse_float(path, line_no, fields[1]))
    if len(values) < 2:
        raise SchemaError(path, 3, "pattern CSV needs at least 2 rows")
    return Pattern(np.asarray(values))


def write_spectrum_csv(path, spectrum: HarmonicSpectrum):
    lines = [_version_line("spectrum"), "harmonic_m,magnitude"]
    for m, mag in enumerate(spectrum.magnitudes):
        lines.append(f"{m},{_fmt(mag)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_fit_report(path, fit: FitResult, source: str = ""):
    lines = [
        f"format = fockscan-fit {FORMAT_VERSION}",
        f"artifact_version = {__version__}",
        f"source = {source}",
        f"n_max_hat = {_fmt(fit.n_max_hat)}",
        f"phase_offset_hat_rad = {_fmt(fit.phase_offset_hat)}",
        f"amplitude_scale_hat = {_fmt(fit.amplitude_scale_hat)}",
        f"residual_sum_squares = {_fmt(fit.residual_sum_squares)}",
        f"converged = {str(fit.converged).lower()}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")

"""Atomic CSV / JSON emission of spectra and comparison records.

Float formatting uses Python's shortest round-trip repr, so re-running a
configuration reproduces output files byte for byte.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .scan import ComparisonRecord, Spectrum


class EmitError(OSError):
    pass


def _fmt(x) -> str:
    return repr(float(x))


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise EmitError(f"failed writing {path}: {exc}") from exc


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def spectrum_csv(spectrum: Spectrum) -> str:
    """CSV text: one row per scan point, unit-suffixed header."""
    var = "nu_rad_s" if spectrum.scan_variable == "nu" else "omega_bar_rad_s"
    cols = [var, "signal_ideal"]
    series = [spectrum.scan_values, spectrum.signal_ideal]
    if spectrum.signal_analytic is not None:
        cols.append("signal_analytic")
        series.append(spectrum.signal_analytic)
    if spectrum.noisy_mean is not None:
        cols += ["noisy_mean", "noisy_stderr", "runs"]
        series += [spectrum.noisy_mean, spectrum.noisy_stderr,
                   np.full(len(spectrum.scan_values), spectrum.runs)]
    lines = [",".join(cols)]
    for k in range(len(spectrum.scan_values)):
        row = []
        for col, s in zip(cols, series):
            row.append(str(int(s[k])) if col == "runs" else _fmt(s[k]))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def emit(spectrum: Spectrum, outdir: str | Path) -> tuple[Path, Path]:
    """Write <name>.csv and <name>.meta.json atomically; returns both paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / f"{spectrum.name}.csv"
    meta_path = outdir / f"{spectrum.name}.meta.json"
    _atomic_write(csv_path, spectrum_csv(spectrum))
    _atomic_write(meta_path, json.dumps(spectrum.metadata, indent=2, sort_keys=True,
                                        default=_json_default) + "\n")
    return csv_path, meta_path


def emit_comparison(record: ComparisonRecord, outdir: str | Path,
                    name: str) -> list[Path]:
    """Write every spectrum of a comparison plus <name>.compare.json."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    files = []
    for spec in record.spectra:
        csv_path, meta_path = emit(spec, outdir)
        paths += [csv_path, meta_path]
        files.append(spec.name)
    doc = {"schema_version": 1, "kind": record.kind, "spectra": files,
           "summary": record.summary}
    cmp_path = outdir / f"{name}.compare.json"
    _atomic_write(cmp_path, json.dumps(doc, indent=2, sort_keys=True,
                                       default=_json_default) + "\n")
    paths.append(cmp_path)
    return paths

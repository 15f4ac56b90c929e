"""Render emitted spectrum artifacts into figure-style vector plots.

This package is a pure view over the simulator's CSV/JSON schema
(version 1): curves come from the CSV columns, markers from the
analytic predictions in the metadata.  Nothing is recomputed here.

Marker artists carry structured SVG ids
(``resonance-<nucleus>-<nu>`` / ``depth-<nucleus>-<nu>-<signal>``) so
tests and downstream tooling can check marker placement structurally
instead of comparing pixels.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from importlib import resources
import json
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import yaml

SCHEMA_VERSION = 1


class PlotError(ValueError):
    pass


@dataclass(frozen=True)
class SpectrumData:
    """One loaded CSV + metadata pair."""

    name: str
    scan: list[float]
    ideal: list[float]
    analytic: list[float] | None
    noisy_mean: list[float] | None
    noisy_stderr: list[float] | None
    predictions: list[dict]
    scan_variable: str
    meta: dict


@dataclass(frozen=True)
class PanelSpec:
    inputs: tuple[str, ...]
    overlay: bool = True
    markers: bool = True
    label: str | None = None


@dataclass(frozen=True)
class PlotSpec:
    output: Path
    panels: tuple[PanelSpec, ...]
    title: str | None = None
    kind: str = "spectra"  # spectra | energy_bars


@dataclass(frozen=True)
class RenderInfo:
    """What was drawn, in data coordinates (for structural verification)."""

    output: Path
    resonance_markers: list[dict] = field(default_factory=list)
    depth_markers: list[dict] = field(default_factory=list)
    curves: int = 0
    panels: int = 0


def load_spectrum(basename: str | Path) -> SpectrumData:
    """Load <basename>.csv and <basename>.meta.json, checking the schema."""
    base = Path(basename)
    csv_path = base.with_suffix(".csv")
    meta_path = base.with_name(base.name + ".meta.json")
    if not csv_path.exists():
        raise PlotError(f"missing spectrum file: {csv_path}")
    if not meta_path.exists():
        raise PlotError(f"missing metadata file: {meta_path}")
    meta = json.loads(meta_path.read_text())
    version = meta.get("schema_version")
    if version != SCHEMA_VERSION:
        raise PlotError(f"{meta_path}: schema version {version!r}, expected {SCHEMA_VERSION}")
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise PlotError(f"{csv_path}: no data rows")
    scan_col = "nu_rad_s" if "nu_rad_s" in rows[0] else "omega_bar_rad_s"

    def col(name):
        if name not in rows[0]:
            return None
        return [float(r[name]) for r in rows]

    return SpectrumData(
        name=meta.get("name", base.name),
        scan=col(scan_col),
        ideal=col("signal_ideal"),
        analytic=col("signal_analytic"),
        noisy_mean=col("noisy_mean"),
        noisy_stderr=col("noisy_stderr"),
        predictions=meta.get("predictions", []),
        scan_variable=meta.get("scan_variable", "nu"),
        meta=meta,
    )


def load_plot_spec(path: str | Path) -> PlotSpec:
    path = Path(path)
    if not path.exists():
        raise PlotError(f"plot spec not found: {path}")
    doc = yaml.safe_load(path.read_text())
    if not isinstance(doc, dict) or "output" not in doc or "panels" not in doc:
        raise PlotError(f"{path}: plot spec needs 'output' and 'panels'")
    panels = []
    for k, p in enumerate(doc["panels"]):
        inputs = p.get("inputs")
        if not inputs:
            raise PlotError(f"{path}: panels[{k}].inputs is required")
        panels.append(PanelSpec(
            inputs=tuple(str(Path(path).parent / i) if not Path(i).is_absolute() else i
                         for i in inputs),
            overlay=bool(p.get("overlay", True)),
            markers=bool(p.get("markers", True)),
            label=p.get("label"),
        ))
    return PlotSpec(
        output=Path(path).parent / doc["output"],
        panels=tuple(panels),
        title=doc.get("title"),
        kind=doc.get("kind", "spectra"),
    )


def _style_context():
    style = resources.files("plotkit") / "spectra.mplstyle"
    return plt.style.context(str(style))


MHZ = 2.0 * 3.141592653589793 * 1e6


def render(spec: PlotSpec) -> RenderInfo:
    """Draw the spec to a vector file; deterministic for fixed inputs."""
    if spec.kind == "energy_bars":
        return _render_energy_bars(spec)
    matplotlib.rcParams["svg.hashsalt"] = "plotkit"
    resonance_markers: list[dict] = []
    depth_markers: list[dict] = []
    curves = 0
    with _style_context():
        fig, axes = plt.subplots(len(spec.panels), 1,
                                 figsize=(6.4, 2.9 * len(spec.panels)), squeeze=False)
        for ax, panel in zip(axes[:, 0], spec.panels):
            datasets = [load_spectrum(i) for i in panel.inputs]
            versions = {d.meta["schema_version"] for d in datasets}
            if len(versions) != 1:
                raise PlotError("panel inputs mix schema versions")
            for data in datasets:
                x = [v / MHZ for v in data.scan]
                ax.plot(x, data.ideal, label=data.name)
                curves += 1
                if panel.overlay and data.analytic is not None:
                    ax.plot(x, data.analytic, linestyle="--", linewidth=0.9,
                            alpha=0.8, label=f"{data.name} analytic")
                    curves += 1
                if data.noisy_mean is not None:
                    ax.errorbar(x, data.noisy_mean, yerr=data.noisy_stderr,
                                fmt="s", markersize=2.5, linewidth=0.7,
                                label=f"{data.name} noisy")
                    curves += 1
                if panel.markers:
                    lo, hi = min(data.scan), max(data.scan)
                    for pred in data.predictions:
                        nu = pred["nu_res_rad_s"]
                        if not (lo <= nu <= hi):
                            continue
                        line = ax.axvline(nu / MHZ, color="green", linewidth=0.8,
                                          alpha=0.7)
                        line.set_gid(f"resonance-{pred['index']}-{nu:.6e}")
                        resonance_markers.append(
                            {"nucleus": pred["index"], "scan_rad_s": nu,
                             "spectrum": data.name})
                        depth = pred["signal_on_resonance"]
                        dot = ax.plot([nu / MHZ], [depth], marker="o", markersize=5,
                                      color="green", linestyle="none")[0]
                        dot.set_gid(f"depth-{pred['index']}-{nu:.6e}-{depth:.6e}")
                        depth_markers.append(
                            {"nucleus": pred["index"], "scan_rad_s": nu,
                             "signal": depth, "spectrum": data.name})
            var = datasets[0].scan_variable
            ax.set_xlabel("modulation frequency nu / 2pi (MHz)" if var == "nu"
                          else "drive amplitude / 2pi (MHz)")
            ax.set_ylabel("signal")
            if panel.label:
                ax.set_title(panel.label)
            ax.legend(fontsize=7)
        if spec.title:
            fig.suptitle(spec.title)
        spec.output.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(spec.output, metadata=_clean_metadata(spec.output))
        plt.close(fig)
    return RenderInfo(output=spec.output, resonance_markers=resonance_markers,
                      depth_markers=depth_markers, curves=curves,
                      panels=len(spec.panels))


def _render_energy_bars(spec: PlotSpec) -> RenderInfo:
    matplotlib.rcParams["svg.hashsalt"] = "plotkit"
    names, ratios = [], []
    for panel in spec.panels:
        for basename in panel.inputs:
            data = load_spectrum(basename)
            ratio = (data.meta.get("energy") or {}).get("ratio_hh_to_this")
            if ratio is None:
                raise PlotError(f"{data.name}: no energy ratio in metadata")
            names.append(data.name)
            ratios.append(ratio)
    with _style_context():
        fig, ax = plt.subplots(figsize=(4.8, 3.0))
        bars = ax.bar(names, ratios, color="#44709d")
        for bar, name, ratio in zip(bars, names, ratios):
            bar.set_gid(f"energy-{name}-{ratio:.6e}")
        ax.set_ylabel("E_HH / E_modulated")
        if spec.title:
            ax.set_title(spec.title)
        spec.output.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(spec.output, metadata=_clean_metadata(spec.output))
        plt.close(fig)
    return RenderInfo(output=spec.output,
                      depth_markers=[{"spectrum": n, "signal": r}
                                     for n, r in zip(names, ratios)],
                      curves=len(names), panels=1)


def _clean_metadata(output: Path) -> dict:
    # strip wall-clock metadata so renders are byte-reproducible
    if output.suffix == ".svg":
        return {"Date": None}
    if output.suffix == ".pdf":
        return {"CreationDate": None}
    return {}

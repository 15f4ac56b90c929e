"""Scan orchestration: frequency sweeps, ensembles, comparisons."""

from __future__ import annotations

import dataclasses
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context
from typing import NamedTuple

import numpy as np

from .. import __version__
from ..analytic import (NucleusPrediction, drive_j1, fwhm_ratio_equal_depth,
                        hh_time_for_equal_signal, predict, spectrum_overlay,
                        square_wave_a1)
from ..control import ConstantDrive
from ..dynamics import SimulationTask, propagate_periodic_cached
from ..noise import RNG_IDENTITY, NoiseSpec, ensemble_signal
from ..power import energy_ratio, sequence_energy
from ..spincore import ContractViolation
from .config import CompareConfig, ConfigError, ScanConfig

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Spectrum:
    """One emitted spectrum: scan grid, signals, provenance metadata."""

    name: str
    scan_variable: str  # "nu" or "omega_bar"
    scan_values: np.ndarray  # rad/s
    signal_ideal: np.ndarray
    signal_analytic: np.ndarray | None
    noisy_mean: np.ndarray | None
    noisy_stderr: np.ndarray | None
    runs: int | None
    t_f_actual: np.ndarray
    metadata: dict


class DipFit(NamedTuple):
    fwhm: float
    center: float
    minimum: float


def fit_dip_fwhm(x: np.ndarray, y: np.ndarray, baseline: float = 1.0) -> DipFit:
    """FWHM of the global dip by linear interpolation of the half-depth crossings."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    i = int(np.argmin(y))
    level = y[i] + (baseline - y[i]) / 2.0
    if i == 0 or i == len(y) - 1:
        raise ValueError("dip minimum sits on the scan boundary; widen the window")

    def cross(idx_range, side):
        prev = i
        for j in idx_range:
            if y[j] >= level:
                x0, x1 = x[j], x[prev]
                y0, y1 = y[j], y[prev]
                if y1 == y0:
                    return x0
                return x0 + (level - y0) * (x1 - x0) / (y1 - y0)
            prev = j
        raise ValueError(f"half-depth level not crossed on the {side} side; widen the window")

    left = cross(range(i - 1, -1, -1), "left")
    right = cross(range(i + 1, len(y)), "right")
    return DipFit(fwhm=float(right - left), center=float(x[i]), minimum=float(y[i]))


def find_dips(x: np.ndarray, y: np.ndarray, prominence: float = 0.01) -> list[DipFit]:
    """Local minima of y with at least the given prominence, via peak search
    on the inverted signal."""
    from scipy.signal import find_peaks

    idx, props = find_peaks(-np.asarray(y, dtype=float), prominence=prominence)
    return [DipFit(fwhm=float("nan"), center=float(x[i]), minimum=float(y[i])) for i in idx]


def scan_window(cfg: ScanConfig) -> tuple[float, float]:
    """Explicit window if configured, else all primary branches +- span * FWHM."""
    if cfg.start is not None:
        return cfg.start, cfg.stop
    frames = cfg.system.frames()
    t_probe = cfg.t_f
    centers = []
    widths = []
    for frame in frames:
        if cfg.scheme == "constant":
            center = frame.omega_n
        else:
            center = frame.omega_n - cfg.omega0
            if center <= 0:
                raise ConfigError(
                    f"scan: nucleus with omega_n {frame.omega_n:.3e} rad/s has no "
                    f"positive primary branch at omega0 {cfg.omega0:.3e} rad/s")
        centers.append(center)
        preds = predict_for(cfg, center)
        widths.append(max(p.fwhm_lineshape for p in preds))
    fallback = TWO_PI / t_probe
    width = max(max(widths), fallback) * cfg.span_fwhm
    return min(centers) - width, max(centers) + width


def predict_for(cfg: ScanConfig, scan_value: float) -> list[NucleusPrediction]:
    return predict(cfg.system, cfg.drive_at(scan_value), cfg.t_f)


def _point(cfg: ScanConfig, index: int, scan_value: float):
    """Compute one scan point (ideal + optional ensemble); order-independent."""
    task = SimulationTask(system=cfg.system, drive=cfg.drive_at(scan_value), t_f=cfg.t_f)
    res = propagate_periodic_cached(task)
    try:
        res.check()
    except ContractViolation as exc:
        raise ContractViolation(f"scan point {index}: {exc}") from exc
    mean = stderr = None
    if cfg.noise is not None and cfg.noise.p > 0.0:
        ens = ensemble_signal(task, cfg.noise, scan_index=index)
        mean, stderr = ens.mean, ens.stderr
    return (index, res.signal, res.t_f_actual, res.unitarity_defect,
            res.renorm_correction, res.multiplications, mean, stderr)


def _point_star(args):
    return _point(*args)


def run_scan(cfg: ScanConfig, progress=None) -> Spectrum:
    """Execute a scan: per point dynamics (+ ensemble) and analytic overlay.

    Deterministic for a fixed config and seed; the worker count only
    changes scheduling, never values.
    """
    start, stop = scan_window(cfg)
    grid = np.linspace(start, stop, cfg.points)
    jobs = [(cfg, i, float(v)) for i, v in enumerate(grid)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers,
                                 mp_context=get_context("spawn")) as pool:
            results = list(pool.map(_point_star, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))
    else:
        results = []
        for job in jobs:
            results.append(_point_star(job))
            if progress is not None:
                progress(len(results), len(jobs))
    results.sort(key=lambda r: r[0])

    ideal = np.array([r[1] for r in results])
    t_actual = np.array([r[2] for r in results])
    max_defect = max(r[3] for r in results)
    renorm_total = sum(r[4] for r in results)
    mults_max = max(r[5] for r in results)
    has_noise = cfg.noise is not None and cfg.noise.p > 0.0
    mean = np.array([r[6] for r in results]) if has_noise else None
    stderr = np.array([r[7] for r in results]) if has_noise else None

    center = grid[len(grid) // 2]
    drive_center = cfg.drive_at(float(center))
    overlay = None
    if cfg.analytic_overlay:
        overlay = spectrum_overlay(cfg.system, drive_center, grid, t_actual)

    preds = predict_for(cfg, float(center))
    energy = sequence_energy(drive_center, cfg.t_f)
    meta = {
        "schema_version": 1,
        "name": cfg.name,
        "scan_variable": cfg.scan_variable,
        "config": cfg.raw,
        "grid": {"start_rad_s": float(start), "stop_rad_s": float(stop),
                 "points": int(cfg.points)},
        "t_f_requested_s": cfg.t_f,
        "t_f_actual_s": [float(t) for t in t_actual],
        "snap_policy": "nearest integer number of modulation periods",
        "rng": RNG_IDENTITY if has_noise else None,
        "noise": (None if cfg.noise is None else {
            "tau_s": cfg.noise.tau, "p": cfg.noise.p, "runs": cfg.noise.runs,
            "master_seed": cfg.noise.master_seed}),
        "versions": {"modcw": __version__, "numpy": np.__version__,
                     "python": sys.version.split()[0]},
        "predictions": [_pred_dict(p) for p in preds],
        "energy": {
            "peak_flux": energy.peak_flux,
            "avg_flux": energy.avg_flux,
            "total_energy": energy.total_energy,
            "per_cycle_energy": energy.per_cycle_energy,
            "ratio_hh_to_this": energy.ratio_hh_to_this,
        },
        "invariants": {"max_unitarity_defect": float(max_defect),
                       "renorm_correction_total": float(renorm_total),
                       "multiplications_max": int(mults_max)},
    }
    return Spectrum(
        name=cfg.name, scan_variable=cfg.scan_variable, scan_values=grid,
        signal_ideal=ideal, signal_analytic=overlay, noisy_mean=mean,
        noisy_stderr=stderr, runs=(cfg.noise.runs if has_noise else None),
        t_f_actual=t_actual, metadata=meta)


def _pred_dict(p: NucleusPrediction) -> dict:
    return {
        "index": p.index,
        "omega_n_rad_s": p.omega_n,
        "a_perp_rad_s": p.a_perp,
        "nu_res_rad_s": p.nu_res,
        "bessel_arg": p.bessel_arg,
        "j1": p.j1,
        "signal_on_resonance": p.signal_on_resonance,
        "fwhm_lineshape_rad_s": p.fwhm_lineshape,
        "fwhm_printed_rad_s": p.fwhm_printed,
        "branches": [
            {"m": b.m, "n": b.n, "nu_res_rad_s": b.nu_res,
             "coupling_rad_s": b.coupling, "bessel_arg": b.bessel_arg}
            for b in p.branches],
    }


@dataclass(frozen=True)
class ComparisonRecord:
    kind: str
    spectra: tuple[Spectrum, ...]
    summary: dict


def run_compare(cmp_cfg: CompareConfig, progress=None) -> ComparisonRecord:
    """Paired runs: modulated-vs-HH, cluster-vs-single-spin, or noise families."""
    base = cmp_cfg.base
    if cmp_cfg.kind == "hh":
        return _compare_hh(cmp_cfg, progress)
    if cmp_cfg.kind == "single_spin":
        return _compare_single_spin(base, progress)
    return _compare_noise_family(cmp_cfg, progress)


def _compare_hh(cmp_cfg: CompareConfig, progress) -> ComparisonRecord:
    base = cmp_cfg.base
    if base.scheme == "constant":
        raise ConfigError("compare.kind hh: the base scan must be a modulated scheme")
    frame = base.system.frames()[base.target_nucleus]
    nu_res = frame.omega_n - base.omega0
    _, j1 = drive_j1(base.drive_at(nu_res), nu_res)
    t_hh = cmp_cfg.hh_t_f if cmp_cfg.hh_t_f is not None else hh_time_for_equal_signal(base.t_f, j1)

    mod_spec = run_scan(base, progress)
    hh_cfg = dataclasses.replace(
        base, name=f"{base.name}_hh", scheme="constant", omega_bar=None,
        t_f=t_hh, start=None, stop=None)
    hh_spec = run_scan(hh_cfg, progress)

    mod_fit = fit_dip_fwhm(mod_spec.scan_values, mod_spec.signal_ideal)
    hh_fit = fit_dip_fwhm(hh_spec.scan_values, hh_spec.signal_ideal)
    predicted = fwhm_ratio_equal_depth(nu_res, square_wave_a1(), base.omega1) \
        if base.scheme == "phase" else fwhm_ratio_equal_depth(nu_res, 1.0, base.omega1)
    summary = {
        "nu_res_rad_s": float(nu_res),
        "j1": float(j1),
        "t_f_modulated_s": base.t_f,
        "t_f_hh_s": float(t_hh),
        "fitted_fwhm_modulated_rad_s": mod_fit.fwhm,
        "fitted_fwhm_hh_rad_s": hh_fit.fwhm,
        "fitted_ratio_hh_to_modulated": hh_fit.fwhm / mod_fit.fwhm,
        "predicted_ratio_hh_to_modulated": float(predicted),
        "dip_modulated": {"center_rad_s": mod_fit.center, "minimum": mod_fit.minimum},
        "dip_hh": {"center_rad_s": hh_fit.center, "minimum": hh_fit.minimum},
    }
    return ComparisonRecord("hh", (mod_spec, hh_spec), summary)


def _compare_single_spin(base: ScanConfig, progress) -> ComparisonRecord:
    start, stop = scan_window(base)
    pinned = dataclasses.replace(base, start=start, stop=stop)
    cluster = run_scan(pinned, progress)
    spectra = [cluster]
    for j in range(base.system.n_nuclei):
        sub = dataclasses.replace(
            pinned, name=f"{base.name}_spin{j}",
            system=base.system.single_spin_subsystem(j), noise=None)
        spectra.append(run_scan(sub, progress))
    decoupling = _decoupling_points(cluster)
    summary = {
        "n_nuclei": base.system.n_nuclei,
        "decoupling_points": decoupling,
        "resonances_rad_s": [p["nu_res_rad_s"] for p in cluster.metadata["predictions"]],
    }
    return ComparisonRecord("single_spin", tuple(spectra), summary)


def _decoupling_points(spec: Spectrum, tol: float = 1e-3) -> list[dict]:
    """Scan points between resonances where the cluster signal returns to 1."""
    y = spec.signal_ideal
    x = spec.scan_values
    out = []
    run_best = None
    for i in range(len(y)):
        if y[i] >= 1.0 - tol:
            if run_best is None or y[i] > run_best[1]:
                run_best = (x[i], y[i])
        elif run_best is not None:
            out.append({"scan_rad_s": float(run_best[0]), "signal": float(run_best[1])})
            run_best = None
    if run_best is not None:
        out.append({"scan_rad_s": float(run_best[0]), "signal": float(run_best[1])})
    return out


def _compare_noise_family(cmp_cfg: CompareConfig, progress) -> ComparisonRecord:
    base = cmp_cfg.base
    start, stop = scan_window(base)
    pinned = dataclasses.replace(base, start=start, stop=stop)
    ideal_cfg = dataclasses.replace(pinned, name=f"{base.name}_ideal", noise=None)
    spectra = [run_scan(ideal_cfg, progress)]
    seed = base.noise.master_seed if base.noise is not None else 20260809
    runs = base.noise.runs if base.noise is not None else 50
    tau = base.noise.tau if base.noise is not None else 0.5e-3
    for p in cmp_cfg.p_list:
        noisy = dataclasses.replace(
            pinned, name=f"{base.name}_p{p*100:g}",
            noise=NoiseSpec(tau=tau, p=p, runs=runs, master_seed=seed))
        spectra.append(run_scan(noisy, progress))
    ideal = spectra[0]
    i_res = int(np.argmin(ideal.signal_ideal))
    family = []
    for spec, p in zip(spectra[1:], cmp_cfg.p_list):
        depth_ideal = 1.0 - ideal.signal_ideal[i_res]
        depth_noisy = 1.0 - spec.noisy_mean[i_res]
        family.append({
            "p": p,
            "resonance_rad_s": float(ideal.scan_values[i_res]),
            "ideal_minimum": float(ideal.signal_ideal[i_res]),
            "noisy_mean_at_resonance": float(spec.noisy_mean[i_res]),
            "depth_reduction": float(1.0 - depth_noisy / depth_ideal) if depth_ideal > 0 else 0.0,
        })
    summary = {"tau_s": tau, "runs": runs, "family": family}
    return ComparisonRecord("noise_family", tuple(spectra), summary)

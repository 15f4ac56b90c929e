"""Command-line interface.

Verbs: ``scan``, ``compare``, ``preset <name>``, ``energy``,
``list-presets``.  Exit codes: 0 success, 2 configuration error,
3 numerical-invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

# Pin BLAS threading before numpy spins up its pools: keeps outputs
# bit-identical across machines with different core counts.
for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np  # noqa: E402

from ..power import energy_ratio, sequence_energy  # noqa: E402
from ..spincore import ContractViolation  # noqa: E402
from ..system import MHZ_X2PI  # noqa: E402
from .config import CompareConfig, ConfigError, ScanConfig, load_config  # noqa: E402
from .emit import emit, emit_comparison  # noqa: E402
from .presets import list_presets, preset_configs  # noqa: E402
from .scan import run_compare, run_scan  # noqa: E402

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def _add_override_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--outdir", help="output directory (overrides config)")
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.add_argument("--points", type=int, help="scan grid points")
    p.add_argument("--runs", type=int, help="noise realizations")
    p.add_argument("--seed", type=int, help="noise master seed")
    p.add_argument("--no-noise", action="store_true", help="drop the noise block")
    p.add_argument("--paper-fidelity", action="store_true",
                   help="use 200 noise realizations as in the reference figures")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="modcw",
                                 description="Modulated continuous-wave spin-coupling simulator")
    sub = ap.add_subparsers(dest="verb", required=True)

    p_scan = sub.add_parser("scan", help="run a frequency scan from a config file")
    p_scan.add_argument("--config", required=True)
    _add_override_args(p_scan)

    p_cmp = sub.add_parser("compare", help="run a comparison from a config file")
    p_cmp.add_argument("--config", required=True)
    _add_override_args(p_cmp)

    p_pre = sub.add_parser("preset", help="run a named figure preset")
    p_pre.add_argument("name")
    _add_override_args(p_pre)

    p_en = sub.add_parser("energy", help="energy report for a drive")
    p_en.add_argument("--config", help="scan config supplying the drive")
    p_en.add_argument("--omega0-MHz", type=float)
    p_en.add_argument("--omega1-MHz", type=float)
    p_en.add_argument("--nu-MHz", type=float)
    p_en.add_argument("--t-f-ms", type=float, default=0.205)

    sub.add_parser("list-presets", help="list available figure presets")
    return ap


def _overrides(args) -> dict:
    return {
        "outdir": getattr(args, "outdir", None),
        "workers": getattr(args, "workers", None),
        "points": getattr(args, "points", None),
        "runs": getattr(args, "runs", None),
        "seed": getattr(args, "seed", None),
        "no_noise": getattr(args, "no_noise", False),
        "paper_fidelity": getattr(args, "paper_fidelity", False),
    }


def _apply_cli_overrides_to_parsed(cfg, args):
    """Overrides for configs loaded from explicit files (presets patch YAML)."""
    import dataclasses

    from ..noise import NoiseSpec

    def patch_scan(sc: ScanConfig) -> ScanConfig:
        kw = {}
        if args.outdir:
            from pathlib import Path
            kw["outdir"] = Path(args.outdir)
        if args.workers:
            kw["workers"] = args.workers
        if args.points:
            kw["points"] = args.points
        noise = sc.noise
        if args.no_noise:
            noise = None
        elif noise is not None:
            runs = 200 if args.paper_fidelity else (args.runs or noise.runs)
            seed = args.seed if args.seed is not None else noise.master_seed
            noise = NoiseSpec(tau=noise.tau, p=noise.p, runs=runs, master_seed=seed)
        kw["noise"] = noise
        return dataclasses.replace(sc, **kw)

    if isinstance(cfg, CompareConfig):
        return dataclasses.replace(cfg, base=patch_scan(cfg.base))
    return patch_scan(cfg)


def _run_one(cfg, quiet: bool = False) -> list:
    if isinstance(cfg, CompareConfig):
        record = run_compare(cfg)
        paths = emit_comparison(record, cfg.base.outdir, cfg.base.name)
    else:
        spectrum = run_scan(cfg)
        paths = list(emit(spectrum, cfg.outdir))
    if not quiet:
        for p in paths:
            print(p)
    return paths


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "list-presets":
            for name, desc in list_presets():
                print(f"{name}: {' '.join(desc.split())}")
            return EXIT_OK
        if args.verb in ("scan", "compare"):
            cfg = load_config(args.config)
            if args.verb == "scan" and isinstance(cfg, CompareConfig):
                raise ConfigError("config is a comparison; use the compare verb")
            if args.verb == "compare" and not isinstance(cfg, CompareConfig):
                raise ConfigError("config is a plain scan; use the scan verb")
            _run_one(_apply_cli_overrides_to_parsed(cfg, args))
            return EXIT_OK
        if args.verb == "preset":
            for cfg in preset_configs(args.name, _overrides(args)):
                _run_one(cfg)
            return EXIT_OK
        if args.verb == "energy":
            return _energy_verb(args)
        raise ConfigError(f"unknown verb {args.verb!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractViolation as exc:
        print(f"numerical invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


def _energy_verb(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        base = cfg.base if isinstance(cfg, CompareConfig) else cfg
        from .scan import scan_window
        start, stop = scan_window(base)
        nu = 0.5 * (start + stop)
        drive = base.drive_at(nu)
        omega0, omega1, t_f = base.omega0, base.omega1, base.t_f
    else:
        missing = [n for n, v in (("--omega0-MHz", args.omega0_MHz),
                                  ("--omega1-MHz", args.omega1_MHz),
                                  ("--nu-MHz", args.nu_MHz)) if v is None]
        if missing:
            raise ConfigError(f"energy: provide --config or {', '.join(missing)}")
        from ..control import PhaseModulatedDrive
        omega0 = args.omega0_MHz * MHZ_X2PI
        omega1 = args.omega1_MHz * MHZ_X2PI
        nu = args.nu_MHz * MHZ_X2PI
        t_f = args.t_f_ms * 1e-3
        drive = PhaseModulatedDrive(omega0, omega1, nu)
    report = sequence_energy(drive, t_f)
    doc = {
        "peak_flux": report.peak_flux,
        "avg_flux": report.avg_flux,
        "total_energy": report.total_energy,
        "per_cycle_energy": report.per_cycle_energy,
        "ratio_hh_to_this": report.ratio_hh_to_this,
    }
    if omega1 > 0 and getattr(drive, "scheme", "") == "phase":
        ratio = energy_ratio(omega0, omega1, nu)
        doc["energy_ratio_formula"] = ratio.ratio
        doc["energy_ratio_small_argument"] = ratio.small_argument
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

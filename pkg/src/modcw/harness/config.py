"""Run configuration: a single YAML document with explicit unit suffixes.

Every physical quantity in a config carries its unit in the key name
(``*_MHz_x2pi``, ``*_ms``, ``*_T`` ...) so there is never any ambiguity
about 2*pi conventions.  Validation errors always name the offending
field.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..control import (AmplitudeModulatedDrive, ConstantDrive, DriveError,
                       DriveScheme, PhaseModulatedDrive)
from ..noise import NoiseError, NoiseSpec
from ..system import MHZ_X2PI, ModelError, SystemModel


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


MS = 1e-3
US = 1e-6
NS = 1e-9


def _get(cfg: dict, path: str, default=None, required: bool = False):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if required:
                raise ConfigError(f"{path} is required")
            return default
        node = node[part]
    return node


def _positive(value, path: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} must be a number, got {value!r}")
    if v <= 0:
        raise ConfigError(f"{path} must be positive, got {v}")
    return v


@dataclass(frozen=True)
class ScanConfig:
    """Validated scan description (physical quantities in SI rad/s, s, T)."""

    name: str
    system: SystemModel
    scheme: str  # phase | amplitude | constant
    omega0: float
    omega1: float
    omega_bar: float | None
    t_flip: float
    n_flip_steps: int
    samples_per_period: int
    t_f: float
    points: int
    span_fwhm: float
    start: float | None
    stop: float | None
    target_nucleus: int
    noise: NoiseSpec | None
    workers: int
    outdir: Path
    analytic_overlay: bool
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def scan_variable(self) -> str:
        return "omega_bar" if self.scheme == "constant" else "nu"

    def drive_at(self, scan_value: float) -> DriveScheme:
        """Concrete drive for one scan point."""
        try:
            if self.scheme == "phase":
                return PhaseModulatedDrive(self.omega0, self.omega1, scan_value,
                                           self.t_flip, self.n_flip_steps)
            if self.scheme == "amplitude":
                return AmplitudeModulatedDrive(self.omega0, self.omega1, scan_value,
                                               self.samples_per_period)
            return ConstantDrive(scan_value)
        except DriveError as exc:
            raise ConfigError(f"drive: {exc}") from exc


@dataclass(frozen=True)
class CompareConfig:
    """A comparison run wrapping a base scan."""

    kind: str  # hh | single_spin | noise_family
    base: ScanConfig
    p_list: tuple[float, ...] = ()
    hh_t_f: float | None = None  # explicit HH duration (else J1 * t_f)


def parse_scan_config(cfg: dict, name_default: str = "scan") -> ScanConfig:
    if not isinstance(cfg, dict):
        raise ConfigError("top level: expected a mapping")
    name = str(cfg.get("name", name_default))
    try:
        system = SystemModel.from_config(_get(cfg, "system", required=True))
    except ModelError as exc:
        raise ConfigError(f"system: {exc}") from exc

    scheme = _get(cfg, "drive.scheme", required=True)
    if scheme not in ("phase", "amplitude", "constant"):
        raise ConfigError(f"drive.scheme must be phase|amplitude|constant, got {scheme!r}")
    omega0 = omega1 = 0.0
    omega_bar = None
    if scheme == "constant":
        ob = _get(cfg, "drive.omega_bar_MHz_x2pi")
        omega_bar = _positive(ob, "drive.omega_bar_MHz_x2pi") * MHZ_X2PI if ob is not None else None
    else:
        omega0 = _positive(_get(cfg, "drive.omega0_MHz_x2pi", required=True),
                           "drive.omega0_MHz_x2pi") * MHZ_X2PI
        omega1 = float(_get(cfg, "drive.omega1_MHz_x2pi", required=True)) * MHZ_X2PI
        if omega1 < 0:
            raise ConfigError("drive.omega1_MHz_x2pi must be >= 0")
    t_flip = float(_get(cfg, "drive.t_flip_ns", 5.0)) * NS
    if t_flip < 0:
        raise ConfigError("drive.t_flip_ns must be >= 0")
    n_flip_steps = int(_get(cfg, "drive.n_flip_steps", 20))
    if n_flip_steps < 1:
        raise ConfigError("drive.n_flip_steps must be >= 1")
    samples_per_period = int(_get(cfg, "drive.samples_per_period", 256))
    if samples_per_period < 2:
        raise ConfigError("drive.samples_per_period must be >= 2")

    t_f_ms = _get(cfg, "sequence.t_f_ms")
    t_f_us = _get(cfg, "sequence.t_f_us")
    if (t_f_ms is None) == (t_f_us is None):
        raise ConfigError("sequence: exactly one of t_f_ms / t_f_us is required")
    t_f = _positive(t_f_ms, "sequence.t_f_ms") * MS if t_f_ms is not None \
        else _positive(t_f_us, "sequence.t_f_us") * US

    points = int(_get(cfg, "scan.points", 201))
    if points < 2:
        raise ConfigError("scan.points must be >= 2")
    span_fwhm = _positive(_get(cfg, "scan.span_fwhm", 4.0), "scan.span_fwhm")
    start = _get(cfg, "scan.start_MHz_x2pi")
    stop = _get(cfg, "scan.stop_MHz_x2pi")
    if (start is None) != (stop is None):
        raise ConfigError("scan: start_MHz_x2pi and stop_MHz_x2pi must be given together")
    if start is not None:
        start = _positive(start, "scan.start_MHz_x2pi") * MHZ_X2PI
        stop = _positive(stop, "scan.stop_MHz_x2pi") * MHZ_X2PI
        if stop <= start:
            raise ConfigError("scan.stop_MHz_x2pi must exceed scan.start_MHz_x2pi")
    target = int(_get(cfg, "scan.target_nucleus", 0))
    if not (0 <= target < system.n_nuclei):
        raise ConfigError(f"scan.target_nucleus {target} out of range "
                          f"(system has {system.n_nuclei} nuclei)")

    noise = None
    ncfg = cfg.get("noise")
    if ncfg:
        try:
            noise = NoiseSpec(
                tau=_positive(_get(ncfg, "tau_ms", required=True), "noise.tau_ms") * MS,
                p=float(_get(ncfg, "p_percent", required=True)) / 100.0,
                runs=int(_get(ncfg, "runs", 50)),
                master_seed=int(_get(ncfg, "master_seed", 20260809)),
            )
        except NoiseError as exc:
            raise ConfigError(f"noise: {exc}") from exc

    workers = int(_get(cfg, "run.workers", 1))
    if workers < 1:
        raise ConfigError("run.workers must be >= 1")
    return ScanConfig(
        name=name, system=system, scheme=scheme, omega0=omega0, omega1=omega1,
        omega_bar=omega_bar, t_flip=t_flip, n_flip_steps=n_flip_steps,
        samples_per_period=samples_per_period, t_f=t_f, points=points,
        span_fwhm=span_fwhm, start=start, stop=stop, target_nucleus=target,
        noise=noise, workers=workers,
        outdir=Path(_get(cfg, "run.outdir", "out")),
        analytic_overlay=bool(_get(cfg, "run.analytic_overlay", True)),
        raw=copy.deepcopy(cfg),
    )


def parse_compare_config(cfg: dict, name_default: str = "compare") -> CompareConfig:
    kind = _get(cfg, "compare.kind", required=True)
    if kind not in ("hh", "single_spin", "noise_family"):
        raise ConfigError(f"compare.kind must be hh|single_spin|noise_family, got {kind!r}")
    base = parse_scan_config(cfg, name_default)
    p_list = tuple(float(p) / 100.0 for p in _get(cfg, "compare.p_percent_list", []) or [])
    if kind == "noise_family" and not p_list:
        raise ConfigError("compare.p_percent_list is required for noise_family comparisons")
    for p in p_list:
        if not (0.0 <= p < 0.2):
            raise ConfigError("compare.p_percent_list entries must be in [0, 20) percent")
    hh_t_f = _get(cfg, "compare.hh_t_f_us")
    if hh_t_f is not None:
        hh_t_f = _positive(hh_t_f, "compare.hh_t_f_us") * US
    return CompareConfig(kind=kind, base=base, p_list=p_list, hh_t_f=hh_t_f)


def load_config(path: str | Path):
    """Load a scan or compare config from a YAML file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    kind = doc.get("kind", "scan")
    if kind == "scan":
        return parse_scan_config(doc, path.stem)
    if kind == "compare":
        return parse_compare_config(doc, path.stem)
    raise ConfigError(f"kind must be scan|compare, got {kind!r}")

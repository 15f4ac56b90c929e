"""Figure presets: checked-in configs that regenerate each artifact."""

from __future__ import annotations

import copy
from importlib import resources
from pathlib import Path

import yaml

from .config import ConfigError, parse_compare_config, parse_scan_config

PAPER_FIDELITY_RUNS = 200


def _preset_dir():
    return resources.files("modcw.harness") / "presets"


def list_presets() -> list[tuple[str, str]]:
    out = []
    for entry in sorted(_preset_dir().iterdir()):
        if entry.name.endswith(".yaml"):
            doc = yaml.safe_load(entry.read_text())
            out.append((doc["preset"], doc.get("description", "")))
    return out


def load_preset_doc(name: str) -> dict:
    path = _preset_dir() / f"{name}.yaml"
    try:
        text = path.read_text()
    except FileNotFoundError:
        known = ", ".join(n for n, _ in list_presets())
        raise ConfigError(f"unknown preset {name!r}; available: {known}")
    return yaml.safe_load(text)


def preset_configs(name: str, overrides: dict | None = None) -> list:
    """Parsed configs of a preset, with CLI overrides applied.

    Supported overrides: points, runs, seed, workers, outdir,
    no_noise (bool), paper_fidelity (bool).
    """
    doc = load_preset_doc(name)
    parsed = []
    for raw in doc["configs"]:
        cfg = copy.deepcopy(raw)
        _apply_overrides(cfg, overrides or {})
        if cfg.get("kind", "scan") == "compare":
            parsed.append(parse_compare_config(cfg, cfg.get("name", name)))
        else:
            parsed.append(parse_scan_config(cfg, cfg.get("name", name)))
    return parsed


def _apply_overrides(cfg: dict, ov: dict) -> None:
    if ov.get("no_noise"):
        cfg.pop("noise", None)
    if ov.get("paper_fidelity") and "noise" in cfg:
        cfg["noise"]["runs"] = PAPER_FIDELITY_RUNS
    if ov.get("runs") is not None and "noise" in cfg:
        cfg["noise"]["runs"] = int(ov["runs"])
    if ov.get("seed") is not None and "noise" in cfg:
        cfg["noise"]["master_seed"] = int(ov["seed"])
    if ov.get("points") is not None:
        cfg.setdefault("scan", {})["points"] = int(ov["points"])
    if ov.get("workers") is not None:
        cfg.setdefault("run", {})["workers"] = int(ov["workers"])
    if ov.get("outdir") is not None:
        cfg.setdefault("run", {})["outdir"] = str(Path(ov["outdir"]))

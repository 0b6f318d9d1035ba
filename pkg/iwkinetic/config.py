"""JSON configuration: parsing, cross-field validation and hashing."""

from pathlib import Path
from typing import Optional, Union
import hashlib
import json
import logging

import numpy as np
from pydantic import ValidationError

from iwkinetic.models import CollisionMode, ConfigFile, RunConfig, Spacing
from iwkinetic.presets import PresetError, preset_spectrum
from iwkinetic.solver.evolution import build_envelope, invariant_set_check
from iwkinetic.solver.spectrum import GridError, RadialGrid, Spectrum, grid_from_spec
from iwkinetic.writers import read_spectrum


class ConfigError(Exception):
    def __init__(self, message: str, field_path: str = ""):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}" if field_path else message)


def _field_path(error: ValidationError) -> str:
    first = error.errors()[0]
    return ".".join(str(part) for part in first["loc"] if not isinstance(part, int) or part >= 0)


def parse_config(data: dict, base_dir: Optional[Path] = None) -> ConfigFile:
    try:
        cfg = ConfigFile.model_validate(data)
    except ValidationError as e:
        raise ConfigError(e.errors()[0]["msg"], _field_path(e))
    _validate(cfg, base_dir or Path.cwd())
    return cfg


def load_config(path: Union[str, Path]) -> ConfigFile:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    cfg = parse_config(data, path.parent)
    logging.info(f"Loaded config {path} (hash {config_hash(cfg)[:12]})")
    return cfg


def dump_config(cfg: ConfigFile) -> str:
    return json.dumps(cfg.model_dump(mode="json"), sort_keys=True, indent=2)


def config_hash(cfg: ConfigFile) -> str:
    canonical = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def run_config(cfg: ConfigFile) -> RunConfig:
    return RunConfig(**cfg.run.model_dump(), params=cfg.physical)


def _resolve_file(cfg: ConfigFile, base_dir: Path) -> Optional[Path]:
    if cfg.initial.spectrum_file is None:
        return None
    path = Path(cfg.initial.spectrum_file)
    return path if path.is_absolute() else base_dir / path


def initial_spectrum(cfg: ConfigFile, grid: RadialGrid, base_dir: Optional[Path] = None) -> Spectrum:
    """Preset or file-backed f0; file values are interpolated onto the grid, zero outside."""
    path = _resolve_file(cfg, base_dir or Path.cwd())
    if path is not None:
        try:
            radii, values = read_spectrum(path)
        except (OSError, ValueError) as e:
            raise ConfigError(str(e), "initial.spectrum_file")
        order = np.argsort(radii)
        return Spectrum(grid, np.interp(grid.nodes, radii[order], values[order], left=0.0, right=0.0))
    if cfg.initial.preset is None:
        raise ConfigError("either a preset or a spectrum file is required", "initial")
    try:
        return preset_spectrum(cfg.initial.preset, cfg.initial.params, grid)
    except PresetError as e:
        raise ConfigError(str(e), "initial.params")


def _validate(cfg: ConfigFile, base_dir: Path):
    if cfg.grid.r_min >= cfg.grid.r_max:
        raise ConfigError("r_min must be below r_max", "grid.r_min")
    if cfg.grid.spacing == Spacing.LOGARITHMIC and cfg.grid.r_min <= 0:
        raise ConfigError("logarithmic spacing needs r_min > 0", "grid.r_min")
    if cfg.run.mode == CollisionMode.EXACT_RESONANCE:
        if cfg.physical.lambda1 > 0:
            raise ConfigError("empty resonant manifold: exact resonance needs lambda1 = 0", "run.mode")
        if cfg.grid.spacing != Spacing.UNIFORM or cfg.grid.r_min != 0:
            raise ConfigError("exact resonance needs a uniform grid from r = 0", "run.mode")
    path = _resolve_file(cfg, base_dir)
    if path is not None and not path.exists():
        raise ConfigError(f"spectrum file {path} does not exist", "initial.spectrum_file")
    try:
        grid = grid_from_spec(cfg.grid)
    except GridError as e:
        raise ConfigError(str(e), "grid")
    f0 = initial_spectrum(cfg, grid, base_dir)
    env = build_envelope(f0, run_config(cfg), cfg.envelope)
    failed = invariant_set_check(f0, 0.0, env, cfg.physical).failed()
    if failed:
        raise ConfigError(f"initial spectrum is outside S0: {', '.join(failed)} failed", "initial")

"""Named initial spectra."""

import numpy as np

from iwkinetic.models import PresetName
from iwkinetic.solver.spectrum import RadialGrid, Spectrum

PRESET_DEFAULTS: dict[PresetName, dict[str, float]] = {
    PresetName.GAUSSIAN_BUMP: {"A": 1.0, "r0": 2.0, "sigma": 0.5},
    PresetName.POWER_LAW: {"A": 1.0, "p": 1.5, "r_a": 0.5, "r_b": 4.0},
}


class PresetError(ValueError):
    pass


def validate_preset_params(name: PresetName, params: dict[str, float]) -> tuple[bool, str]:
    """Check preset parameters before building a spectrum."""
    unknown = set(params) - set(PRESET_DEFAULTS[name])
    if unknown:
        return (False, f"unknown {name.value} parameter(s): {', '.join(sorted(unknown))}")
    merged = {**PRESET_DEFAULTS[name], **params}
    if merged["A"] < 0:
        return (False, "amplitude A must be nonnegative")
    if name == PresetName.GAUSSIAN_BUMP:
        if merged["sigma"] <= 0:
            return (False, "sigma must be positive")
    else:
        if not 0 <= merged["r_a"] < merged["r_b"]:
            return (False, "power law needs 0 <= r_a < r_b")
        if merged["r_a"] == 0 and merged["p"] >= 3:
            return (False, f"power law r^-{merged['p']} from r_a = 0 has divergent mass (need p < 3)")
    return (True, "")


def preset_spectrum(name: str, params: dict[str, float], grid: RadialGrid) -> Spectrum:
    try:
        preset = PresetName(name)
    except ValueError:
        raise PresetError(f"unknown preset '{name}'")
    is_valid, error_msg = validate_preset_params(preset, params)
    if not is_valid:
        raise PresetError(error_msg)
    merged = {**PRESET_DEFAULTS[preset], **params}
    r = grid.nodes
    if preset == PresetName.GAUSSIAN_BUMP:
        values = merged["A"] * np.exp(-((r - merged["r0"]) ** 2) / merged["sigma"] ** 2)
    else:
        # r = 0 carries no volume weight; keep the node finite
        inside = (r >= merged["r_a"]) & (r <= merged["r_b"]) & (r > 0.0)
        values = np.zeros_like(r)
        values[inside] = merged["A"] * r[inside] ** (-merged["p"])
    return Spectrum(grid, values)

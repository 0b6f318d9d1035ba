"""Radial grid, isotropic spectra and the weighted norms built on them."""

from dataclasses import dataclass, field
from typing import Optional
import logging

import numpy as np

from iwkinetic.models import GridSpec, PhysicalParams, Spacing
from iwkinetic.solver.physics import omega

TRUNCATION_THRESHOLD = 1e-10


class GridError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Ordered radial nodes with trapezoid line and spherical volume weights."""

    nodes: np.ndarray
    line_weights: np.ndarray
    volume_weights: np.ndarray
    spacing: Spacing

    @property
    def n(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def step(self) -> Optional[float]:
        """Node spacing for uniform grids, None otherwise."""
        if self.spacing != Spacing.UNIFORM:
            return None
        return float(self.nodes[1] - self.nodes[0])


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Values of an isotropic wave density at the nodes of a grid.

    The array is copied and frozen on construction.
    """

    grid: RadialGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise GridError(
                f"spectrum has {values.shape} values for a grid of {self.grid.n} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise GridError("spectrum values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.values >= 0.0))

    def with_values(self, values: np.ndarray) -> "Spectrum":
        return Spectrum(self.grid, values)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def build_grid(r_min: float, r_max: float, n: int, spacing: Spacing) -> RadialGrid:
    if n < 8:
        raise GridError(f"grid needs at least 8 nodes, got {n}")
    if not (0.0 <= r_min < r_max) or not np.isfinite(r_max):
        raise GridError(f"need 0 <= r_min < r_max, got r_min={r_min}, r_max={r_max}")
    spacing = Spacing(spacing)
    if spacing == Spacing.UNIFORM:
        nodes = np.linspace(r_min, r_max, n)
    else:
        if r_min <= 0.0:
            raise GridError("logarithmic spacing needs r_min > 0")
        nodes = np.geomspace(r_min, r_max, n)
        nodes[0], nodes[-1] = r_min, r_max
    gaps = np.diff(nodes)
    line = np.empty(n)
    line[0] = 0.5 * gaps[0]
    line[-1] = 0.5 * gaps[-1]
    line[1:-1] = 0.5 * (gaps[:-1] + gaps[1:])
    volume = 4.0 * np.pi * nodes * nodes * line
    logging.info(f"Built {spacing.value} grid with {n} nodes on [{r_min}, {r_max}]")
    return RadialGrid(_freeze(nodes), _freeze(line), _freeze(volume), spacing)


def grid_from_spec(spec: GridSpec) -> RadialGrid:
    return build_grid(spec.r_min, spec.r_max, spec.n, spec.spacing)


def mass(f: Spectrum) -> float:
    return float(np.sum(f.grid.volume_weights * f.values))


def moment(f: Spectrum, n: float, p: PhysicalParams) -> float:
    """Energy-weighted moment Σ wv ω^n f; n = 0 gives the mass."""
    weights = omega(f.grid.nodes, p) ** n
    return float(np.sum(f.grid.volume_weights * weights * f.values))


def l1n_norm(f: Spectrum, n: float, p: PhysicalParams) -> float:
    weights = omega(f.grid.nodes, p) ** n
    return float(np.sum(f.grid.volume_weights * weights * np.abs(f.values)))


def restricted_mass(f: Spectrum, R0: float) -> float:
    """Mass carried by nodes with r <= R0."""
    inside = f.grid.nodes <= R0
    return float(np.sum(f.grid.volume_weights[inside] * f.values[inside]))


def mass_radius(f: Spectrum, fraction: float) -> float:
    """Smallest node radius whose ball carries the given share of the mass."""
    cumulative = np.cumsum(f.grid.volume_weights * f.values)
    total = cumulative[-1]
    if total <= 0.0:
        return f.grid.r_max
    index = int(np.searchsorted(cumulative, fraction * total * (1.0 - 1e-12)))
    return float(f.grid.nodes[min(index, f.grid.n - 1)])


def interpolation_exponents(p_ord: float, n: float, N: float) -> tuple[float, float]:
    if not (p_ord <= n <= N) or p_ord == N:
        raise GridError(f"need p <= n <= N with p < N, got p={p_ord}, n={n}, N={N}")
    a = (N - n) / (N - p_ord)
    return a, 1.0 - a


def interpolation_gap(
    f: Spectrum, p_ord: float, n: float, N: float, params: PhysicalParams
) -> tuple[float, float]:
    """Both sides of M_n <= M_p^a M_N^(1-a), with a = (N-n)/(N-p)."""
    a, b = interpolation_exponents(p_ord, n, N)
    if mass(f) == 0.0:
        return 0.0, 0.0
    lhs = moment(f, n, params)
    rhs = moment(f, p_ord, params) ** a * moment(f, N, params) ** b
    return lhs, rhs


def truncation_warning(f: Spectrum) -> bool:
    """True when the outermost node still carries a visible share of f."""
    peak = float(np.max(np.abs(f.values)))
    if peak == 0.0:
        return False
    return bool(abs(f.values[-1]) >= TRUNCATION_THRESHOLD * peak)

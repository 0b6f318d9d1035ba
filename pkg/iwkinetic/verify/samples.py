"""Seeded random spectra for the verification checks."""

from dataclasses import dataclass
from typing import Optional
import logging

import numpy as np

from iwkinetic.models import PhysicalParams, VerifySettings
from iwkinetic.solver.spectrum import RadialGrid, Spectrum, l1n_norm, mass

MAX_ATTEMPTS = 10_000
PAIR_STREAM = 1


class SampleError(ValueError):
    pass


@dataclass(frozen=True)
class SampleFamily:
    """Random Gaussian bumps and truncated power laws inside V_M.

    Every member has mass >= mass_floor and L¹_{N+2} norm <= moment_ceiling.
    """

    grid: RadialGrid
    params: PhysicalParams
    count: int
    seed: int
    N: float = 1.0
    mass_floor: float = 0.1
    moment_ceiling: float = 1.0e4
    amplitude_min: float = 0.05
    amplitude_max: float = 2.0
    bump_fraction: float = 0.7

    @classmethod
    def from_settings(
        cls, grid: RadialGrid, params: PhysicalParams, settings: VerifySettings, N: float
    ) -> "SampleFamily":
        return cls(
            grid=grid,
            params=params,
            count=settings.samples,
            seed=settings.seed,
            N=N,
            mass_floor=settings.mass_floor,
            moment_ceiling=settings.moment_ceiling,
            amplitude_min=settings.amplitude_min,
            amplitude_max=settings.amplitude_max,
            bump_fraction=settings.bump_fraction,
        )


def _draw(family: SampleFamily, rng: np.random.Generator) -> np.ndarray:
    r = family.grid.nodes
    r_max = family.grid.r_max
    amplitude = np.exp(rng.uniform(np.log(family.amplitude_min), np.log(family.amplitude_max)))
    if rng.uniform() < family.bump_fraction:
        center = rng.uniform(0.15, 0.5) * r_max
        width = max(rng.uniform(0.05, 0.15) * r_max, 2.0 * r_max / family.grid.n)
        return amplitude * np.exp(-((r - center) ** 2) / width**2)
    first = float(r[r > 0.0][0])
    exponent = rng.uniform(0.0, 2.5)
    r_a = rng.uniform(first, 0.3 * r_max)
    r_b = rng.uniform(r_a + 0.1 * r_max, 0.7 * r_max)
    inside = (r >= r_a) & (r <= r_b)
    values = np.zeros_like(r)
    values[inside] = amplitude * r[inside] ** (-exponent)
    return values


def _admissible(family: SampleFamily, f: Spectrum) -> bool:
    return (
        mass(f) >= family.mass_floor
        and l1n_norm(f, family.N + 2.0, family.params) <= family.moment_ceiling
    )


def generate(family: SampleFamily, count: Optional[int] = None, stream: int = 0) -> list[Spectrum]:
    """One child generator per sample, so members do not depend on each other."""
    count = family.count if count is None else count
    children = np.random.SeedSequence(family.seed, spawn_key=(stream,)).spawn(count)
    spectra = []
    for child in children:
        rng = np.random.default_rng(child)
        for _ in range(MAX_ATTEMPTS):
            f = Spectrum(family.grid, _draw(family, rng))
            if _admissible(family, f):
                spectra.append(f)
                break
        else:
            raise SampleError(
                f"no admissible sample after {MAX_ATTEMPTS} draws; "
                f"mass floor {family.mass_floor} or ceiling {family.moment_ceiling} too tight"
            )
    logging.info(f"Generated {len(spectra)} spectra from seed {family.seed} stream {stream}")
    return spectra


def generate_pairs(family: SampleFamily, n_pairs: int) -> list[tuple[Spectrum, Spectrum]]:
    spectra = generate(family, 2 * n_pairs, stream=PAIR_STREAM)
    return list(zip(spectra[0::2], spectra[1::2]))

import json

import numpy as np
import pytest

from iwkinetic.models import PhysicalParams, Spacing
from iwkinetic.presets import preset_spectrum
from iwkinetic.solver.collision import build_triads
from iwkinetic.solver.spectrum import build_grid


@pytest.fixture(scope="session")
def params():
    return PhysicalParams(lambda1=1.0, lambda2=1.0, nu=0.01)


@pytest.fixture(scope="session")
def grid48():
    return build_grid(0.0, 8.0, 48, Spacing.UNIFORM)


@pytest.fixture(scope="session")
def table48(grid48):
    return build_triads(grid48)


@pytest.fixture(scope="session")
def grid128():
    return build_grid(0.0, 8.0, 128, Spacing.UNIFORM)


@pytest.fixture(scope="session")
def table128(grid128):
    return build_triads(grid128)


@pytest.fixture(scope="session")
def grid16():
    return build_grid(0.0, 8.0, 16, Spacing.UNIFORM)


@pytest.fixture(scope="session")
def exact_grid():
    # h = 1/16 exactly, so colinear radii add without rounding
    return build_grid(0.0, 8.0, 129, Spacing.UNIFORM)


@pytest.fixture
def gaussian(grid48):
    return preset_spectrum("gaussian_bump", {"A": 1.0, "r0": 2.0, "sigma": 0.5}, grid48)


@pytest.fixture(scope="session")
def random_bump():
    """Factory for seeded Gaussian bumps on a given grid."""

    def make(grid, rng: np.random.Generator, amplitude: float = 1.0):
        center = rng.uniform(1.0, 3.5)
        width = rng.uniform(0.4, 1.0)
        return preset_spectrum(
            "gaussian_bump", {"A": amplitude * rng.uniform(0.2, 1.0), "r0": center, "sigma": width}, grid
        )

    return make


@pytest.fixture
def small_config(tmp_path):
    """Small near-resonance config written to disk."""
    data = {
        "physical": {"lambda1": 1.0, "lambda2": 1.0, "nu": 0.01},
        "grid": {"r_min": 0.0, "r_max": 8.0, "n": 32},
        "initial": {"preset": "gaussian_bump", "params": {"A": 1.0, "r0": 2.0, "sigma": 0.5}},
        "run": {"T": 0.05, "record_every": 1, "N": 1.0},
        "verify": {"samples": 4, "pairs": 4, "seed": 7},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return path

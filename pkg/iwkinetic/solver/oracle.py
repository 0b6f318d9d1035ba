"""Brute-force reference for the collision operator.

Integrates the unreduced triad integral over k1 in spherical coordinates
around k = r ẑ with Gauss-Legendre rules in radius and polar cosine. The
azimuth contributes 2π by symmetry. Nothing here reuses the triad table.
"""

from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_legendre

from iwkinetic.models import PhysicalParams
from iwkinetic.solver.physics import gamma_broadening, kernel_v2, lorentzian, omega

SpectrumFunction = Callable[[np.ndarray], np.ndarray]


def analytic_mass(f_func: SpectrumFunction, r_cut: float) -> float:
    value, _ = quad(lambda s: 4.0 * np.pi * s * s * float(f_func(np.asarray(s))), 0.0, r_cut, limit=200)
    return value


def _panels(x: np.ndarray, wx: np.ndarray, breaks: list[float]) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b > a:
            nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
            weights.append(0.5 * (b - a) * wx)
    return np.concatenate(nodes), np.concatenate(weights)


def oracle_collision(
    f_func: SpectrumFunction,
    radii: np.ndarray,
    p: PhysicalParams,
    total_mass: float,
    r_cut: float,
    n_radial: int = 96,
    n_angle: int = 96,
) -> np.ndarray:
    """Q[f] at each radius, split at r so the kink of |k - k1| sits on a panel edge."""
    x, wx = roots_legendre(n_radial)
    mu, wmu = roots_legendre(n_angle)
    out = np.zeros(len(radii))
    for k, r in enumerate(np.asarray(radii, dtype=float)):
        if r <= 0.0:
            continue
        s_nodes, s_weights = _panels(x, wx, [0.0, min(r, r_cut), r_cut])
        S, MU = np.meshgrid(s_nodes, mu, indexing="ij")
        W = 2.0 * np.pi * np.outer(s_weights, wmu) * S * S
        f0 = float(f_func(np.asarray(r)))
        fs = f_func(S)
        om0 = omega(r, p)

        # k1 = S, k2 = k - k1
        r2 = np.sqrt(np.maximum(r * r + S * S - 2.0 * r * S * MU, 0.0))
        f2 = f_func(r2)
        width = gamma_broadening(r, S, r2, total_mass, p)
        rate = kernel_v2(r, S, r2, p) * lorentzian(om0 - omega(S, p) - omega(r2, p), width)
        direct = np.sum(W * rate * (fs * f2 - f0 * fs - f0 * f2))

        # k2 = S, k1 = k + k2
        r1 = np.sqrt(r * r + S * S + 2.0 * r * S * MU)
        f1 = f_func(r1)
        width = gamma_broadening(r1, r, S, total_mass, p)
        rate = kernel_v2(r1, r, S, p) * lorentzian(omega(r1, p) - om0 - omega(S, p), width)
        mirrored = np.sum(W * rate * (f0 * fs - f1 * f0 - f1 * fs))

        out[k] = direct - 2.0 * mirrored
    return out

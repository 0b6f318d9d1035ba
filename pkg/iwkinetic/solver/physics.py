"""Pointwise physical coefficients of the three-wave kinetic operator.

Every function accepts a scalar radius or a numpy array of radii and
returns the same shape. A 0-d input comes back as a numpy float.
"""

import numpy as np

from iwkinetic.models import PhysicalParams


def omega(r, p: PhysicalParams):
    """Dispersion relation ω(r) = sqrt(λ1 + λ2 r²)."""
    r = np.asarray(r, dtype=float)
    return np.sqrt(p.lambda1 + p.lambda2 * r * r)[()]


def damping_rate(r, p: PhysicalParams):
    """Viscous damping 2ν r²."""
    r = np.asarray(r, dtype=float)
    return (2.0 * p.nu * r * r)[()]


def kernel_v2(r, r1, r2, p: PhysicalParams):
    """Squared interaction kernel |V|² = ℭ² r r1 r2."""
    r, r1, r2 = (np.asarray(x, dtype=float) for x in (r, r1, r2))
    return (p.c_v**2 * r * r1 * r2)[()]


def gamma_k(r, mass: float, p: PhysicalParams):
    """Per-wavenumber broadening 𝔠 r² 𝔐₀."""
    r = np.asarray(r, dtype=float)
    return (p.c_gamma * r * r * mass)[()]


def gamma_broadening(r, r1, r2, mass: float, p: PhysicalParams):
    """Triad broadening Γ = γ(r) + γ(r1) + γ(r2)."""
    r, r1, r2 = (np.asarray(x, dtype=float) for x in (r, r1, r2))
    return (p.c_gamma * (r * r + r1 * r1 + r2 * r2) * mass)[()]


def lorentzian(zeta, width):
    """Resonance broadening Γ/(ζ² + Γ²), taken as 0 when Γ = 0."""
    zeta, width = np.broadcast_arrays(
        np.asarray(zeta, dtype=float), np.asarray(width, dtype=float)
    )
    out = np.zeros(zeta.shape, dtype=float)
    np.divide(width, zeta * zeta + width * width, out=out, where=width > 0)
    return out[()]


def depletion_coefficient(r, p: PhysicalParams):
    """Upper bound 4(ℭ²/𝔠) r + 2ν r² on the per-node depletion rate."""
    r = np.asarray(r, dtype=float)
    return (4.0 * (p.c_v**2 / p.c_gamma) * r + 2.0 * p.nu * r * r)[()]

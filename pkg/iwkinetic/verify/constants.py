"""Closed-form constants of the a priori estimates.

Each constant is returned together with the named terms it multiplies out
from, so a verification report can show where a bound comes from.
"""

from typing import TypedDict
import math

from iwkinetic.models import PhysicalParams


class DerivedConstant(TypedDict):
    name: str
    value: float
    terms: dict[str, float]


def power_split(N: float) -> float:
    """Constant in ω^N <= c (ω1^N + ω2^N) for ω <= ω1 + ω2."""
    if N >= 1.0:
        return 2.0 ** (2.0 * N - 1.0)
    return 2.0**N


def kernel_ratio(p: PhysicalParams) -> float:
    """Bound on |V|²/(Γ ω^{-1}) per unit mass: r1 r2/(r1² + r2²) <= 1/2."""
    return (p.c_v**2 / p.c_gamma) / (2.0 * math.sqrt(p.lambda2))


def gain_moment_constant(N: float, p: PhysicalParams) -> DerivedConstant:
    """C with Σ wv ω^N gain[f] <= C M_{N+1}(f) on uniform grids from zero."""
    split = power_split(N)
    ratio = kernel_ratio(p)
    direct = split * ratio * 2.0 * 2.0
    mirrored = 2.0 * (1.0 + split) * ratio * 2.0 * 2.0
    return DerivedConstant(
        name="gain_moment",
        value=direct + mirrored,
        terms={
            "power_split": split,
            "kernel_ratio": ratio,
            "direct_term": direct,
            "mirrored_term": mirrored,
        },
    )


def lipschitz_constant(
    N: float, ceiling: float, floor: float, omega_lo: float, p: PhysicalParams
) -> DerivedConstant:
    """C with ‖Q[g] - Q[h]‖_{L¹_N} <= C ‖g - h‖_{L¹_{N+1}} on the admissible set.

    The bound degrades as ω_lo, the smallest frequency on the grid, shrinks.
    """
    if omega_lo <= 0.0:
        raise ValueError("Lipschitz constant needs a strictly positive smallest frequency")
    if floor <= 0.0:
        raise ValueError("Lipschitz constant needs a positive mass floor")
    split = power_split(N)
    prefactor = 3.0 * (p.c_v**2 / p.c_gamma) * (1.0 + split) / math.sqrt(p.lambda2)
    bilinear = 4.0 * ceiling * omega_lo ** (-(N + 2.0)) / floor
    broadening = 2.0 * ceiling**2 * omega_lo ** (-(2.0 * N + 4.0)) / floor**2
    return DerivedConstant(
        name="lipschitz",
        value=prefactor * (bilinear + broadening),
        terms={
            "power_split": split,
            "prefactor": prefactor,
            "bilinear_term": bilinear,
            "broadening_term": broadening,
        },
    )


def holder_constant(lipschitz: DerivedConstant, ceiling: float) -> DerivedConstant:
    """Interpolating ‖g-h‖_{N+1} between orders N and N+2, where ‖g-h‖_{N+2} <= 2M."""
    spread = math.sqrt(2.0 * ceiling)
    return DerivedConstant(
        name="holder",
        value=lipschitz["value"] * spread,
        terms={"lipschitz": lipschitz["value"], "ceiling_spread": spread},
    )


def upper_rate(nu: float, R0: float, p: PhysicalParams) -> float:
    """Growth rate of the restricted-mass bound, 4νR0² + 8(ℭ²/𝔠)R0."""
    return 4.0 * nu * R0 * R0 + 8.0 * (p.c_v**2 / p.c_gamma) * R0


def moment_envelope_constants(
    N: float, p: PhysicalParams, restricted_floor: float, omega_max: float
) -> DerivedConstant:
    """Rates A, B of M_N(t) <= M_N(0) exp(A t + B (e^{C t} - 1)/C).

    Viscous damping absorbs the gain growth through Young's inequality;
    without it the growth is bounded by the top grid frequency.
    """
    gain = gain_moment_constant(N, p)["value"]
    if p.nu > 0.0:
        young = gain * gain * p.lambda2 / (8.0 * p.nu)
        a = young + 2.0 * p.nu * p.lambda1 / p.lambda2
        b = young / restricted_floor**2 if restricted_floor > 0.0 else math.inf
    else:
        a = gain * omega_max
        b = 0.0
    return DerivedConstant(
        name="moment_envelope",
        value=a,
        terms={"A": a, "B": b, "gain_moment": gain},
    )


def lower_rate(moment_rate: float, upper: float, T: float, restricted_floor: float) -> float:
    """Rate C_* = C0 (1 + e^{C^* T}) / m0 of the S2 envelope."""
    if restricted_floor <= 0.0:
        return math.inf
    return moment_rate * (1.0 + math.exp(min(upper * T, 700.0))) / restricted_floor

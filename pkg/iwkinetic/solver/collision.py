"""Reduced near-resonance collision operator on a radial grid.

Isotropy reduces the six-dimensional triad integral to a double integral
over (r1, r2) restricted to the triangle |r1 - r2| <= r <= r1 + r2, with
measure (2π/r) r1 r2 dr1 dr2. A precomputed triad table holds the admissible
index triples together with those quadrature prefactors; the evaluation
sweep then runs one output node per numba thread.
"""

from dataclasses import dataclass
import logging

import numpy as np
from numba import njit, prange

from iwkinetic.models import PhysicalParams, Spacing
from iwkinetic.solver.physics import gamma_broadening, kernel_v2, lorentzian, omega
from iwkinetic.solver.spectrum import RadialGrid, Spectrum, mass

COLINEAR_RTOL = 1e-12
DOMINATION_RTOL = 1e-12


class CollisionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TriadTable:
    """Admissible triads (i, j, l), lexicographic, with row offsets per i.

    prefactor holds (2π/r_i) r_j r_l w_j w_l, halved on colinear triads
    where the triangle degenerates to a boundary point.
    """

    grid: RadialGrid
    i: np.ndarray
    j: np.ndarray
    l: np.ndarray
    prefactor: np.ndarray
    offsets: np.ndarray

    def __len__(self) -> int:
        return int(self.i.shape[0])

    def symmetric_weight(self) -> np.ndarray:
        """wv_i times the prefactor, symmetric under any permutation of a triad."""
        return self.grid.volume_weights[self.i] * self.prefactor


@dataclass(frozen=True, eq=False)
class CollisionResult:
    gain: np.ndarray
    theta: np.ndarray
    q: np.ndarray


def build_triads(grid: RadialGrid) -> TriadTable:
    r = grid.nodes
    w = grid.line_weights
    eps = COLINEAR_RTOL * grid.r_max
    positive = r > 0.0
    rows_j, rows_l, rows_i, rows_c = [], [], [], []
    offsets = np.zeros(grid.n + 1, dtype=np.int64)
    rj = r[:, None]
    rl = r[None, :]
    pair_ok = positive[:, None] & positive[None, :]
    for i in range(grid.n):
        if r[i] > 0.0:
            inside = (
                pair_ok
                & (np.abs(rj - rl) <= r[i] + eps)
                & (r[i] <= rj + rl + eps)
            )
            jj, ll = np.nonzero(inside)
            colinear = (np.abs(r[i] - (r[jj] + r[ll])) <= eps) | (
                np.abs(r[i] - np.abs(r[jj] - r[ll])) <= eps
            )
            rows_j.append(jj)
            rows_l.append(ll)
            rows_i.append(np.full(jj.shape[0], i, dtype=np.int64))
            rows_c.append(np.where(colinear, 0.5, 1.0))
            offsets[i + 1] = offsets[i] + jj.shape[0]
        else:
            offsets[i + 1] = offsets[i]
    i_idx = np.concatenate(rows_i).astype(np.int64)
    j_idx = np.concatenate(rows_j).astype(np.int64)
    l_idx = np.concatenate(rows_l).astype(np.int64)
    c = np.concatenate(rows_c)
    prefactor = (
        2.0 * np.pi / r[i_idx] * r[j_idx] * r[l_idx] * w[j_idx] * w[l_idx] * c
    )
    logging.info(f"Built triad table with {i_idx.shape[0]} triads on {grid.n} nodes")
    return TriadTable(grid, i_idx, j_idx, l_idx, prefactor, offsets)


@njit(parallel=True, cache=True)
def _near_resonance_sweep(
    offsets, js, ls, prefactor, r, om, f, total_mass, c_v2, c_gamma, gamma_scale, gain, theta
):
    n = r.shape[0]
    for i in prange(n):
        g = 0.0
        th = 0.0
        for t in range(offsets[i], offsets[i + 1]):
            j = js[t]
            l = ls[t]
            width = gamma_scale * c_gamma * (r[i] * r[i] + r[j] * r[j] + r[l] * r[l]) * total_mass
            weight = prefactor[t] * c_v2 * r[i] * r[j] * r[l]
            za = om[i] - om[j] - om[l]
            zb = om[j] - om[i] - om[l]
            ka = weight * width / (za * za + width * width)
            kb = weight * width / (zb * zb + width * width)
            g += ka * f[j] * f[l] + 2.0 * kb * (f[i] * f[j] + f[j] * f[l])
            th += ka * (f[j] + f[l]) + 2.0 * kb * f[l]
        gain[i] = g
        theta[i] = th


def _require_input(f: Spectrum, table: TriadTable):
    if f.grid is not table.grid and not np.array_equal(f.grid.nodes, table.grid.nodes):
        raise CollisionError("spectrum and triad table live on different grids")
    if not f.is_nonnegative():
        raise CollisionError("collision operator needs a nonnegative spectrum")


def evaluate(
    f: Spectrum,
    p: PhysicalParams,
    table: TriadTable,
    gamma_scale: float = 1.0,
    debug: bool = False,
) -> CollisionResult:
    """Split Q[f] = gain - f·ϑ on every node of the table's grid.

    Zero mass collapses the broadening to zero and the whole result to zero.
    """
    _require_input(f, table)
    if gamma_scale <= 0.0:
        raise CollisionError(f"gamma_scale must be positive, got {gamma_scale}")
    n = f.grid.n
    total_mass = mass(f)
    if total_mass == 0.0:
        zeros = np.zeros(n)
        return CollisionResult(zeros, zeros.copy(), zeros.copy())
    if debug:
        domination = lorentzian_domination(f, p, table, gamma_scale)
        if domination > 1.0 + DOMINATION_RTOL:
            raise CollisionError(f"Lorentzian exceeds 1/Γ by factor {domination}")
    gain = np.zeros(n)
    theta = np.zeros(n)
    _near_resonance_sweep(
        table.offsets,
        table.j,
        table.l,
        table.prefactor,
        f.grid.nodes,
        omega(f.grid.nodes, p),
        f.values,
        total_mass,
        p.c_v**2,
        p.c_gamma,
        gamma_scale,
        gain,
        theta,
    )
    return CollisionResult(gain, theta, gain - f.values * theta)


def attenuation(f: Spectrum, p: PhysicalParams, table: TriadTable) -> np.ndarray:
    return evaluate(f, p, table).theta


def _triad_fields(f: Spectrum, p: PhysicalParams, table: TriadTable, gamma_scale: float):
    r = f.grid.nodes
    ri, rj, rl = r[table.i], r[table.j], r[table.l]
    om = omega(r, p)
    zeta = om[table.i] - om[table.j] - om[table.l]
    width = gamma_scale * gamma_broadening(ri, rj, rl, mass(f), p)
    return zeta, width, kernel_v2(ri, rj, rl, p)


def lorentzian_domination(
    f: Spectrum, p: PhysicalParams, table: TriadTable, gamma_scale: float = 1.0
) -> float:
    """Largest Γ·L(ζ, Γ) over the table; never above 1."""
    zeta, width, _ = _triad_fields(f, p, table, gamma_scale)
    return float(np.max(width * lorentzian(zeta, width), initial=0.0))


def triad_rates(
    f: Spectrum, p: PhysicalParams, table: TriadTable, gamma_scale: float = 1.0
) -> np.ndarray:
    """Symmetric per-triad exchange rates R_ijl of the weak form."""
    _require_input(f, table)
    if mass(f) == 0.0:
        return np.zeros(len(table))
    zeta, width, v2 = _triad_fields(f, p, table, gamma_scale)
    fv = f.values
    fi, fj, fl = fv[table.i], fv[table.j], fv[table.l]
    return table.symmetric_weight() * v2 * lorentzian(zeta, width) * (
        fj * fl - fi * fj - fi * fl
    )


def weak_form(f: Spectrum, phi: np.ndarray, p: PhysicalParams, table: TriadTable) -> float:
    """Σ over triads of R_ijl (φ_i - φ_j - φ_l); equals Σ wv φ Q[f]."""
    phi = np.asarray(phi, dtype=float)
    rates = triad_rates(f, p, table)
    return float(np.sum(rates * (phi[table.i] - phi[table.j] - phi[table.l])))


def energy_transfer(f: Spectrum, p: PhysicalParams, table: TriadTable) -> float:
    """Net rate of change of the energy moment driven by the collision term."""
    return weak_form(f, omega(f.grid.nodes, p), p, table)


def resonance_fraction(f: Spectrum, p: PhysicalParams, table: TriadTable) -> float:
    """Share of the absolute exchange carried by triads with |ζ| <= Γ."""
    rates = np.abs(triad_rates(f, p, table))
    total = float(np.sum(rates))
    if total == 0.0:
        return 0.0
    zeta, width, _ = _triad_fields(f, p, table, 1.0)
    return float(np.sum(rates[np.abs(zeta) <= width])) / total


@dataclass(frozen=True, eq=False)
class ColinearTable:
    """Exactly resonant triads r_a = r_b + r_c on a uniform grid from zero."""

    grid: RadialGrid
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    weight: np.ndarray


def build_colinear_triads(grid: RadialGrid, p: PhysicalParams) -> ColinearTable:
    """Pairs every node a with b + c = a in index space.

    The delta function of the frequency mismatch integrates against the
    endpoint of the triangle, which carries half its mass; with ω linear in
    r it contributes π/(2√λ2) per unit step squared. The weight carries the
    trapezoid weights of all three nodes over h, so dividing by the volume
    weight of any node gives the pointwise value there, the last node included.
    """
    if p.lambda1 > 0.0:
        raise CollisionError("empty resonant manifold: exact resonance needs lambda1 = 0")
    if grid.spacing != Spacing.UNIFORM or grid.nodes[0] != 0.0:
        raise CollisionError("exact resonance needs a uniform grid starting at r = 0")
    h = grid.step
    a_idx, b_idx = [], []
    for a in range(2, grid.n):
        b = np.arange(1, a, dtype=np.int64)
        a_idx.append(np.full(b.shape[0], a, dtype=np.int64))
        b_idx.append(b)
    a_idx = np.concatenate(a_idx)
    b_idx = np.concatenate(b_idx)
    c_idx = a_idx - b_idx
    r = grid.nodes
    w = grid.line_weights
    weight = (
        8.0 * np.pi**2 * r[a_idx] * r[b_idx] * r[c_idx]
        * w[a_idx] * w[b_idx] * w[c_idx] / h
        * np.pi / (2.0 * np.sqrt(p.lambda2))
    )
    return ColinearTable(grid, a_idx, b_idx, c_idx, weight)


def evaluate_exact(f: Spectrum, p: PhysicalParams, table: ColinearTable) -> CollisionResult:
    """Exact-resonance operator, Lorentzian replaced by π δ(ζ)."""
    if not f.is_nonnegative():
        raise CollisionError("collision operator needs a nonnegative spectrum")
    n = f.grid.n
    fv = f.values
    r = f.grid.nodes
    rate = table.weight * kernel_v2(r[table.a], r[table.b], r[table.c], p)
    fa, fb, fc = fv[table.a], fv[table.b], fv[table.c]
    gain = np.bincount(table.a, weights=rate * fb * fc, minlength=n)
    gain += np.bincount(table.b, weights=2.0 * rate * (fb * fa + fa * fc), minlength=n)
    theta = np.bincount(table.a, weights=rate * (fb + fc), minlength=n)
    theta += np.bincount(table.b, weights=2.0 * rate * fc, minlength=n)
    wv = f.grid.volume_weights
    scale = np.zeros(n)
    np.divide(1.0, wv, out=scale, where=wv > 0.0)
    gain *= scale
    theta *= scale
    return CollisionResult(gain, theta, gain - fv * theta)


def exact_weak_form(f: Spectrum, phi: np.ndarray, p: PhysicalParams, table: ColinearTable) -> float:
    phi = np.asarray(phi, dtype=float)
    r = f.grid.nodes
    fv = f.values
    fa, fb, fc = fv[table.a], fv[table.b], fv[table.c]
    rate = table.weight * kernel_v2(r[table.a], r[table.b], r[table.c], p) * (
        fb * fc - fa * fb - fa * fc
    )
    return float(np.sum(rate * (phi[table.a] - phi[table.b] - phi[table.c])))

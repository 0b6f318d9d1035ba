"""Explicit Euler integration with envelope and invariant-set tracking."""

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Union
import logging
import math

import numpy as np

from iwkinetic.models import CollisionMode, EnvelopeSettings, LedgerEntry, PhysicalParams, RunConfig
from iwkinetic.solver.collision import (
    ColinearTable,
    CollisionResult,
    TriadTable,
    build_colinear_triads,
    build_triads,
    evaluate,
    evaluate_exact,
)
from iwkinetic.solver.physics import damping_rate, depletion_coefficient, omega
from iwkinetic.solver.spectrum import (
    RadialGrid,
    Spectrum,
    l1n_norm,
    mass,
    mass_radius,
    moment,
    restricted_mass,
    truncation_warning,
)
from iwkinetic.verify.constants import lower_rate, moment_envelope_constants, upper_rate

AnyTable = Union[TriadTable, ColinearTable]
RecordHook = Callable[[float, Spectrum], None]

STABILITY_RTOL = 1e-12


class StepError(ValueError):
    pass


class AdmissibilityError(ValueError):
    def __init__(self, failed: list[str]):
        self.failed = failed
        super().__init__(f"initial spectrum is outside S0: {', '.join(failed)} failed")


class InvariantFlags(NamedTuple):
    s1: bool
    s2: bool
    s3: bool

    def failed(self) -> list[str]:
        return [name.upper() for name, ok in self._asdict().items() if not ok]


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


@dataclass(frozen=True)
class InvariantEnvelope:
    """Time-dependent ceiling c0 and floor c1 of the invariant set."""

    N: float
    R0: float
    R_lower: float
    R_upper: float
    C_star: float
    C_upper: float
    f0_restricted_mass: float
    moment_A: float = 0.0
    moment_B: float = 0.0

    def c0(self, t: float) -> float:
        if t == 0.0:
            return 2.0 * self.R_lower + 1.0
        return (2.0 * self.R_lower + 1.0) * _exp(self.C_star * t)

    def c1(self, t: float) -> float:
        return 0.5 * self.R_upper * math.exp(-self.C_upper * t)

    def moment_bound(self, t: float, mN0: float) -> float:
        """M_N(0) exp(A t + B (e^{C^* t} - 1)/C^*)."""
        if self.moment_B == 0.0:
            growth = 0.0
        elif self.C_upper > 0.0:
            growth = self.moment_B * math.expm1(min(self.C_upper * t, 700.0)) / self.C_upper
        else:
            growth = self.moment_B * t
        return mN0 * _exp(self.moment_A * t + growth)


def build_envelope(
    f0: Spectrum, cfg: RunConfig, settings: Optional[EnvelopeSettings] = None
) -> InvariantEnvelope:
    settings = settings or EnvelopeSettings()
    p = cfg.params
    N = cfg.N
    R0 = mass_radius(f0, settings.r0_mass_fraction) if settings.R0 == "auto" else float(settings.R0)
    R_lower = l1n_norm(f0, N + 3.0, p) if settings.R_lower == "auto" else float(settings.R_lower)
    R_upper = mass(f0) if settings.R_upper == "auto" else float(settings.R_upper)
    m0 = restricted_mass(f0, R0)
    c_upper = upper_rate(p.nu, R0, p)
    rates = moment_envelope_constants(N, p, m0, float(omega(f0.grid.r_max, p)))
    c_star = lower_rate(rates["value"], c_upper, cfg.T, m0)
    logging.info(f"Envelope radii R0={R0:.4g} R_*={R_lower:.4g} R^*={R_upper:.4g}, C^*={c_upper:.4g}")
    return InvariantEnvelope(
        N=N,
        R0=R0,
        R_lower=R_lower,
        R_upper=R_upper,
        C_star=c_star,
        C_upper=c_upper,
        f0_restricted_mass=m0,
        moment_A=rates["terms"]["A"],
        moment_B=rates["terms"]["B"],
    )


def stable_dt(grid: RadialGrid, p: PhysicalParams, safety: float) -> float:
    """Largest dt keeping 1 - dt (ϑ + 2νr²) >= 0 for every admissible spectrum."""
    if not 0.0 < safety <= 1.0:
        raise StepError(f"cfl safety factor must lie in (0, 1], got {safety}")
    return safety / float(depletion_coefficient(grid.r_max, p))


def build_table(grid: RadialGrid, p: PhysicalParams, mode: CollisionMode) -> AnyTable:
    if CollisionMode(mode) == CollisionMode.EXACT_RESONANCE:
        return build_colinear_triads(grid, p)
    return build_triads(grid)


def collide(f: Spectrum, p: PhysicalParams, table: AnyTable) -> CollisionResult:
    if isinstance(table, ColinearTable):
        return evaluate_exact(f, p, table)
    return evaluate(f, p, table)


def step(
    f: Spectrum,
    dt: float,
    p: PhysicalParams,
    table: AnyTable,
    result: Optional[CollisionResult] = None,
) -> Spectrum:
    """One Euler step f + dt (gain - f ϑ - 2νr² f), arranged as a sum of nonnegative terms."""
    if dt <= 0.0:
        raise StepError(f"time step must be positive, got {dt}")
    limit = stable_dt(f.grid, p, 1.0)
    if dt > limit * (1.0 + STABILITY_RTOL):
        raise StepError(f"time step {dt:.6g} exceeds the stability bound {limit:.6g}")
    if result is None:
        result = collide(f, p, table)
    loss = dt * (result.theta + damping_rate(f.grid.nodes, p))
    if np.any(loss > 1.0):
        raise StepError(f"time step {dt:.6g} drives the attenuation factor negative")
    return f.with_values(f.values * (1.0 - loss) + dt * result.gain)


def envelope_lower(f0: Spectrum, t: float, p: PhysicalParams) -> Spectrum:
    return f0.with_values(f0.values * np.exp(-depletion_coefficient(f0.grid.nodes, p) * t))


def discrete_lower_product(f0: Spectrum, dt_sequence: list[float], p: PhysicalParams) -> Spectrum:
    rate = depletion_coefficient(f0.grid.nodes, p)
    factor = np.ones(f0.grid.n)
    for dt in dt_sequence:
        factor *= 1.0 - dt * rate
    return f0.with_values(f0.values * factor)


def envelope_defect(f: Spectrum, envelope: Spectrum) -> float:
    """max over nodes of max(0, 1 - f/env) where the envelope is positive."""
    env = envelope.values
    ratio = np.ones(f.grid.n)
    np.divide(f.values, env, out=ratio, where=env > 0.0)
    return float(np.max(np.maximum(0.0, 1.0 - ratio)))


def invariant_set_check(
    f: Spectrum, t: float, env: InvariantEnvelope, p: PhysicalParams
) -> InvariantFlags:
    total = l1n_norm(f, 0.0, p)
    return InvariantFlags(
        s1=f.is_nonnegative(),
        s2=l1n_norm(f, env.N + 3.0, p) <= env.c0(t),
        s3=total > 0.0 and total >= env.c1(t),
    )


@dataclass
class MomentLedger:
    N: float
    mode: CollisionMode
    rows: list[LedgerEntry] = field(default_factory=list)
    dt_sequence: list[float] = field(default_factory=list)

    def all_flags_pass(self) -> bool:
        return all(row.s1 and row.s2 and row.s3 for row in self.rows)

    @property
    def times(self) -> np.ndarray:
        return np.array([row.t for row in self.rows])


def ledger_row(
    f: Spectrum,
    t: float,
    env: InvariantEnvelope,
    p: PhysicalParams,
    lower: np.ndarray,
    restricted_bound: float,
) -> LedgerEntry:
    N = env.N
    flags = invariant_set_check(f, t, env, p)
    peak = float(np.max(f.values))
    slack = float(np.min(f.values - lower)) / peak if peak > 0.0 else 0.0
    return LedgerEntry(
        t=t,
        m0=mass(f),
        m1=moment(f, 1.0, p),
        mN=moment(f, N, p),
        mN1=moment(f, N + 1.0, p),
        mN2=moment(f, N + 2.0, p),
        l1N3=l1n_norm(f, N + 3.0, p),
        c0=env.c0(t),
        c1=env.c1(t),
        envelope_slack=slack,
        restricted_mass=restricted_mass(f, env.R0),
        restricted_bound=restricted_bound,
        s1=flags.s1,
        s2=flags.s2,
        s3=flags.s3,
        trunc_warn=truncation_warning(f),
    )


def step_size(base: float, remaining: float, result: CollisionResult, f: Spectrum,
               p: PhysicalParams, table: AnyTable, safety: float) -> float:
    dt = min(base, remaining)
    if isinstance(table, ColinearTable):
        rate = float(np.max(result.theta + damping_rate(f.grid.nodes, p)))
        if rate > 0.0:
            dt = min(dt, safety / rate)
    return dt


def evolve(
    f0: Spectrum,
    cfg: RunConfig,
    env: InvariantEnvelope,
    table: Optional[AnyTable] = None,
    on_record: Optional[RecordHook] = None,
) -> tuple[Spectrum, MomentLedger]:
    """Integrate from f0 to cfg.T, recording a ledger row every record_every steps.

    Exact-resonance runs shrink the step further so the attenuation factor
    stays nonnegative. Invariant-set violations are flagged, not raised.
    """
    p = cfg.params
    grid = f0.grid
    start = invariant_set_check(f0, 0.0, env, p)
    if start.failed():
        raise AdmissibilityError(start.failed())
    if table is None:
        table = build_table(grid, p, cfg.mode)
    base_dt = cfg.dt if cfg.dt is not None else stable_dt(grid, p, cfg.cfl_safety)
    rate = depletion_coefficient(grid.nodes, p)
    rate_R0 = float(depletion_coefficient(env.R0, p))

    lower = f0.values.copy()
    restricted_bound = env.f0_restricted_mass
    ledger = MomentLedger(N=cfg.N, mode=CollisionMode(cfg.mode))
    ledger.rows.append(ledger_row(f0, 0.0, env, p, lower, restricted_bound))
    if on_record is not None:
        on_record(0.0, f0)

    f = f0
    t = 0.0
    steps = 0
    warned = False
    horizon = cfg.T * (1.0 - STABILITY_RTOL)
    while t < horizon:
        result = collide(f, p, table)
        dt = step_size(base_dt, cfg.T - t, result, f, p, table, cfg.cfl_safety)
        f = step(f, dt, p, table, result)
        steps += 1
        t = cfg.T if dt == cfg.T - t else t + dt
        ledger.dt_sequence.append(dt)
        lower *= 1.0 - dt * rate
        restricted_bound *= 1.0 - dt * rate_R0
        if not f.is_nonnegative():
            raise StepError(f"negative spectrum value after step {steps}")
        last = t >= horizon
        if steps % cfg.record_every == 0 or last:
            row = ledger_row(f, t, env, p, lower, restricted_bound)
            ledger.rows.append(row)
            if not (row.s1 and row.s2 and row.s3):
                logging.warning(f"Invariant set violated at t={t:.6g}: S1={row.s1} S2={row.s2} S3={row.s3}")
            if row.trunc_warn and not warned:
                logging.warning(f"Spectrum reaches r_max={grid.r_max} at t={t:.6g}; grid truncation is visible")
                warned = True
            if on_record is not None:
                on_record(t, f)
        logging.debug(f"step {steps}: t={t:.6g} dt={dt:.6g}")
    logging.info(f"Evolved {steps} steps to T={cfg.T} ({len(ledger.rows)} ledger rows)")
    return f, ledger

"""Numerical certification of the a priori estimates.

Each check returns a VerifyReport of CheckRecord rows. A check fails when
any single sample violates its bound; nothing is averaged.
"""

from dataclasses import dataclass, field, replace
from typing import Optional
import logging
import math

import numpy as np
from scipy.stats import linregress

from iwkinetic.models import CheckRecord, CollisionMode, ConfigFile, PhysicalParams, Provenance, RunConfig
from iwkinetic.solver.collision import (
    TriadTable,
    build_colinear_triads,
    build_triads,
    evaluate,
    evaluate_exact,
)
from iwkinetic.solver.evolution import (
    AdmissibilityError,
    AnyTable,
    InvariantEnvelope,
    MomentLedger,
    build_envelope,
    build_table,
    collide,
    evolve,
    invariant_set_check,
    stable_dt,
    step,
    step_size,
)
from iwkinetic.solver.physics import omega
from iwkinetic.solver.spectrum import Spectrum, interpolation_gap, l1n_norm, mass, moment
from iwkinetic.verify.constants import (
    gain_moment_constant,
    holder_constant,
    lipschitz_constant,
)
from iwkinetic.verify.samples import SampleFamily, generate, generate_pairs

BOUND_RTOL = 1e-12
STABILITY_SLACK = 0.05
SLOPE_TOLERANCE = 0.1
EXACT_ENERGY_RTOL = 1e-12
LEDGER_RTOL = 1e-9

SUITES = ("attenuation", "gain_moment", "holder", "gamma_limit", "exact_energy", "ledger", "stability")


class CheckError(ValueError):
    pass


@dataclass
class VerifyReport:
    seed: Optional[int] = None
    records: list[CheckRecord] = field(default_factory=list)
    lipschitz_estimate: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(record.passed for record in self.records)

    def extend(self, other: "VerifyReport") -> "VerifyReport":
        self.records.extend(other.records)
        if other.lipschitz_estimate is not None:
            self.lipschitz_estimate = other.lipschitz_estimate
        return self


def _record(
    name: str,
    reference: str,
    samples: int,
    worst: float,
    bound: float,
    passed: bool,
    tolerance: float,
    seed: Optional[int],
    provenance: Provenance = Provenance.DERIVED,
    note: Optional[str] = None,
) -> CheckRecord:
    logging.info(
        f"Check {name}: {'pass' if passed else 'FAIL'} worst={worst:.6g} bound={bound:.6g} over {samples} samples"
    )
    return CheckRecord(
        name=name,
        reference=reference,
        samples=samples,
        worst_ratio=float(worst),
        bound=float(bound),
        provenance=provenance,
        passed=bool(passed),
        tolerance=tolerance,
        seed=seed,
        note=note,
    )


def _family_spectra(family: SampleFamily) -> list[Spectrum]:
    spectra = generate(family)
    if not spectra:
        raise CheckError("sample family is empty")
    return spectra


def check_attenuation(
    family: SampleFamily, p: PhysicalParams, table: Optional[TriadTable] = None
) -> VerifyReport:
    """max ϑ_i / (4 (ℭ²/𝔠) r_i) over samples and nodes with r_i > 0."""
    spectra = _family_spectra(family)
    table = table or build_triads(family.grid)
    r = family.grid.nodes
    positive = r > 0.0
    scale = 4.0 * p.c_v**2 / p.c_gamma
    worst, used = 0.0, 0
    for f in spectra:
        if mass(f) == 0.0:
            continue
        theta = evaluate(f, p, table).theta
        worst = max(worst, float(np.max(theta[positive] / (scale * r[positive]))))
        used += 1
    record = _record(
        "attenuation",
        "attenuation ϑ(r) <= 4 r",
        used,
        worst,
        1.0,
        worst <= 1.0 + BOUND_RTOL,
        BOUND_RTOL,
        family.seed,
    )
    return VerifyReport(family.seed, [record])


def check_gain_moment(
    family: SampleFamily, N: float, p: PhysicalParams, table: Optional[TriadTable] = None
) -> VerifyReport:
    if N < 0:
        raise CheckError(f"moment order must be nonnegative, got {N}")
    spectra = _family_spectra(family)
    table = table or build_triads(family.grid)
    constant = gain_moment_constant(N, p)
    weights = family.grid.volume_weights * omega(family.grid.nodes, p) ** N
    worst, worst_scaled, used = 0.0, 0.0, 0
    for f in spectra:
        total = mass(f)
        if total == 0.0:
            continue
        gain = evaluate(f, p, table).gain
        ratio = float(np.sum(weights * gain)) / moment(f, N + 1.0, p)
        worst = max(worst, ratio)
        worst_scaled = max(worst_scaled, ratio * total)
        used += 1
    terms = ", ".join(f"{k}={v:.4g}" for k, v in constant["terms"].items())
    record = _record(
        "gain_moment",
        "Σ wv ω^N gain <= C M_{N+1}",
        used,
        worst,
        constant["value"],
        worst <= constant["value"] * (1.0 + BOUND_RTOL),
        BOUND_RTOL,
        family.seed,
        note=f"ratio times M0 = {worst_scaled:.6g}; {terms}",
    )
    return VerifyReport(family.seed, [record])


def check_holder(
    family: SampleFamily,
    N: float,
    p: PhysicalParams,
    n_pairs: int = 100,
    table: Optional[TriadTable] = None,
) -> VerifyReport:
    """Lipschitz and Hölder-½ continuity of Q on V_M, plus the interpolation step they rest on."""
    if N < 0:
        raise CheckError(f"moment order must be nonnegative, got {N}")
    pairs = generate_pairs(family, n_pairs)
    if not pairs:
        raise CheckError("sample family is empty")
    table = table or build_triads(family.grid)
    omega_lo = float(omega(family.grid.nodes[0], p))
    if omega_lo <= 0.0:
        raise CheckError("Lipschitz constant needs a positive smallest grid frequency")
    lipschitz = lipschitz_constant(N, family.moment_ceiling, family.mass_floor, omega_lo, p)
    holder = holder_constant(lipschitz, family.moment_ceiling)

    worst_lip, worst_hold, worst_interp, used = 0.0, 0.0, 0.0, 0
    for g, h in pairs:
        diff = g.with_values(g.values - h.values)
        d_N = l1n_norm(diff, N, p)
        if d_N == 0.0:
            continue
        dq = diff.with_values(evaluate(g, p, table).q - evaluate(h, p, table).q)
        dq_N = l1n_norm(dq, N, p)
        worst_lip = max(worst_lip, dq_N / l1n_norm(diff, N + 1.0, p))
        worst_hold = max(worst_hold, dq_N / math.sqrt(d_N))
        lhs, rhs = interpolation_gap(diff.with_values(np.abs(diff.values)), N, N + 1.0, N + 2.0, p)
        worst_interp = max(worst_interp, lhs / rhs)
        used += 1

    seed = family.seed
    records = [
        _record(
            "lipschitz",
            "‖Q[g]-Q[h]‖_N <= C ‖g-h‖_{N+1}",
            used,
            worst_lip,
            lipschitz["value"],
            worst_lip <= lipschitz["value"] * (1.0 + BOUND_RTOL),
            BOUND_RTOL,
            seed,
        ),
        _record(
            "holder",
            "‖Q[g]-Q[h]‖_N <= C (2M)^½ ‖g-h‖_N^½",
            used,
            worst_hold,
            holder["value"],
            worst_hold <= holder["value"] * (1.0 + BOUND_RTOL),
            BOUND_RTOL,
            seed,
        ),
        _record(
            "interpolation",
            "M_{N+1} <= M_N^½ M_{N+2}^½",
            used,
            worst_interp,
            1.0,
            worst_interp <= 1.0 + BOUND_RTOL,
            BOUND_RTOL,
            seed,
            provenance=Provenance.TRIVIAL,
        ),
    ]
    return VerifyReport(seed, records, lipschitz_estimate=worst_lip)


def _second_difference_defect(times: np.ndarray, values: np.ndarray) -> float:
    if times.shape[0] < 3:
        return 0.0
    slopes = np.diff(values) / np.diff(times)
    mids = 0.5 * (times[2:] - times[:-2])
    return float(np.max(np.abs(np.diff(slopes) / mids)))


def check_ledger(ledger: MomentLedger, env: InvariantEnvelope, p: PhysicalParams) -> VerifyReport:
    """Moment inequality, exponential moment envelope, S1-S3 and restricted mass along a run."""
    rows = ledger.rows
    if not rows:
        raise CheckError("ledger has no rows")
    times = ledger.times
    if np.any(np.diff(times) <= 0.0):
        raise CheckError("ledger times must increase strictly")

    flags_ok = ledger.all_flags_pass()
    c0_note = None
    if any(math.isinf(row.c0) for row in rows):
        c0_note = "c0 is infinite for t > 0, so S2 holds vacuously there"
        logging.warning(f"Ledger check: {c0_note}")
    records = [
        _record(
            "invariant_set",
            "S1 f >= 0, S2 ‖f‖_{N+3} <= c0(t), S3 ‖f‖ >= c1(t)",
            len(rows),
            float(sum(not (row.s1 and row.s2 and row.s3) for row in rows)),
            0.0,
            flags_ok,
            0.0,
            None,
            provenance=Provenance.TRIVIAL,
            note=c0_note,
        )
    ]
    if ledger.mode == CollisionMode.EXACT_RESONANCE:
        note = "not applicable to exact-resonance runs"
        for name in ("moment_inequality", "moment_envelope", "restricted_mass"):
            records.append(_record(name, name, 0, 0.0, 0.0, True, 0.0, None, note=note))
        return VerifyReport(None, records)

    gain_c = gain_moment_constant(ledger.N, p)["value"]
    mN = np.array([row.mN for row in rows])
    defect = _second_difference_defect(times, mN)
    damping = 2.0 * p.nu / p.lambda2
    worst_ineq = 0.0
    ineq_ok = True
    for a, b in zip(rows[:-1], rows[1:]):
        dt = b.t - a.t
        lhs = (b.mN - a.mN) / dt + damping * a.mN2 - damping * p.lambda1 * a.mN
        rhs = gain_c * a.mN1 + dt * defect
        scale = abs((b.mN - a.mN) / dt) + damping * (a.mN2 + p.lambda1 * a.mN) + rhs
        ineq_ok &= lhs <= rhs + LEDGER_RTOL * scale
        if rhs > 0.0:
            worst_ineq = max(worst_ineq, lhs / rhs)

    envelope = np.array([env.moment_bound(row.t, rows[0].mN) for row in rows])
    envelope_ratio = float(np.max(mN / envelope)) if rows[0].mN > 0.0 else 0.0
    envelope_note = None
    if np.any(np.isinf(envelope)):
        envelope_note = "bound is infinite for t > 0; only the t = 0 row constrains M_N"
        logging.warning(f"Ledger check: moment envelope {envelope_note}")
    restricted = [
        row.restricted_mass - row.restricted_bound * (1.0 - BOUND_RTOL) for row in rows
    ]
    records += [
        _record(
            "moment_inequality",
            "dM_N/dt + (2ν/λ2)(M_{N+2} - λ1 M_N) <= C M_{N+1}",
            len(rows) - 1,
            worst_ineq,
            1.0,
            bool(ineq_ok),
            LEDGER_RTOL,
            None,
            note=f"second-difference defect {defect:.4g}",
        ),
        _record(
            "moment_envelope",
            "M_N(t) <= M_N(0) exp(A t + B (e^{C t} - 1)/C)",
            len(rows),
            envelope_ratio,
            1.0,
            envelope_ratio <= 1.0 + BOUND_RTOL,
            BOUND_RTOL,
            None,
            note=envelope_note,
        ),
        _record(
            "restricted_mass",
            "‖f χ_R0‖ >= Π(1 - dt (4R0 + 2νR0²)) ‖f0 χ_R0‖",
            len(rows),
            float(min(restricted)),
            0.0,
            min(restricted) >= -BOUND_RTOL * rows[0].m0,
            BOUND_RTOL,
            None,
        ),
    ]
    return VerifyReport(None, records)


def check_gamma_limit(
    f: Spectrum, p: PhysicalParams, scales: list[float], table: Optional[TriadTable] = None
) -> VerifyReport:
    """Slope of log ‖q(εΓ)‖_{L¹} against log ε; the operator vanishes linearly when λ1 > 0."""
    if p.lambda1 <= 0.0:
        raise CheckError("Γ-limit check needs lambda1 > 0; use the exact-resonance energy check")
    eps = np.asarray(scales, dtype=float)
    if eps.shape[0] < 2 or np.any(np.diff(eps) >= 0.0) or np.any(eps <= 0.0):
        raise CheckError("Γ scales must be positive and strictly decreasing")
    reference = "‖Q_εΓ[f]‖ ~ ε as ε -> 0"
    if mass(f) == 0.0:
        record = _record("gamma_limit", reference, 0, 1.0, 1.0, True, SLOPE_TOLERANCE, None,
                         provenance=Provenance.TRIVIAL, note="zero spectrum skipped")
        return VerifyReport(None, [record])
    table = table or build_triads(f.grid)
    wv = f.grid.volume_weights
    norms = np.array([np.sum(wv * np.abs(evaluate(f, p, table, gamma_scale=e).q)) for e in eps])
    if np.any(norms <= 0.0):
        raise CheckError("collision term vanished identically; slope undefined")
    slope = float(linregress(np.log(eps), np.log(norms)).slope)
    record = _record(
        "gamma_limit",
        reference,
        int(eps.shape[0]),
        slope,
        1.0,
        abs(slope - 1.0) <= SLOPE_TOLERANCE,
        SLOPE_TOLERANCE,
        None,
        note="norms " + ", ".join(f"{n:.4g}" for n in norms),
    )
    return VerifyReport(None, [record])


def check_exact_energy(
    family: SampleFamily, p: PhysicalParams, rtol: float = EXACT_ENERGY_RTOL
) -> VerifyReport:
    """|Σ wv ω q| against Σ wv ω |q| for the exact-resonance operator."""
    spectra = _family_spectra(family)
    table = build_colinear_triads(family.grid, p)
    weights = family.grid.volume_weights * omega(family.grid.nodes, p)
    worst, used = 0.0, 0
    for f in spectra:
        q = evaluate_exact(f, p, table).q
        scale = float(np.sum(weights * np.abs(q)))
        if scale == 0.0:
            continue
        worst = max(worst, abs(float(np.sum(weights * q))) / scale)
        used += 1
    record = _record(
        "exact_energy",
        "Σ wv ω Q_exact[f] = 0",
        used,
        worst,
        rtol,
        worst <= rtol,
        rtol,
        family.seed,
        provenance=Provenance.TRIVIAL,
    )
    return VerifyReport(family.seed, [record])


def check_stability(
    f0: Spectrum,
    g0: Spectrum,
    cfg: RunConfig,
    env: InvariantEnvelope,
    table: Optional[AnyTable] = None,
    lipschitz: Optional[float] = None,
) -> VerifyReport:
    """Two-run growth test sup d(t) / (d(0) e^{L t}) with d = ‖f - g‖_{L¹_N}.

    L is the sampled Lipschitz ratio from the holder check scaled by ω_max.
    The largest ratio ‖Q[f] - Q[g]‖_N / d met along the two trajectories is
    reported in the note only.
    """
    p = cfg.params
    N = cfg.N
    for name, spectrum in (("f0", f0), ("g0", g0)):
        failed = invariant_set_check(spectrum, 0.0, env, p).failed()
        if failed:
            logging.warning(f"Stability input {name} is outside S0")
            raise AdmissibilityError(failed)
    reference = "d(t) <= d(0) e^{L t}"
    d0 = l1n_norm(f0.with_values(f0.values - g0.values), N, p)
    if d0 == 0.0:
        record = _record("stability", reference, 1, 0.0, 1.0 + STABILITY_SLACK, True, STABILITY_SLACK,
                         None, provenance=Provenance.TRIVIAL, note="identical initial data")
        return VerifyReport(None, [record])
    if lipschitz is None:
        raise CheckError("stability check needs a sampled Lipschitz estimate from the holder check")
    table = table or build_table(f0.grid, p, cfg.mode)
    base_dt = cfg.dt if cfg.dt is not None else stable_dt(f0.grid, p, cfg.cfl_safety)

    f, g, t = f0, g0, 0.0
    history = [(0.0, d0)]
    traj_lip = 0.0
    horizon = cfg.T * (1.0 - 1e-12)
    while t < horizon:
        rf, rg = collide(f, p, table), collide(g, p, table)
        d = l1n_norm(f.with_values(f.values - g.values), N, p)
        if d > 0.0:
            dq = l1n_norm(f.with_values(rf.q - rg.q), N, p)
            traj_lip = max(traj_lip, dq / d)
        dt = min(
            step_size(base_dt, cfg.T - t, rf, f, p, table, cfg.cfl_safety),
            step_size(base_dt, cfg.T - t, rg, g, p, table, cfg.cfl_safety),
        )
        f, g = step(f, dt, p, table, rf), step(g, dt, p, table, rg)
        t = cfg.T if dt == cfg.T - t else t + dt
        history.append((t, l1n_norm(f.with_values(f.values - g.values), N, p)))

    rate = lipschitz * float(omega(f0.grid.r_max, p))
    worst = max(d / (d0 * math.exp(rate * s)) for s, d in history)
    record = _record(
        "stability",
        reference,
        len(history),
        worst,
        1.0 + STABILITY_SLACK,
        worst <= 1.0 + STABILITY_SLACK,
        STABILITY_SLACK,
        None,
        note=f"L_emp={rate:.6g} (sampled {lipschitz:.6g} x ω_max), trajectory ratio {traj_lip:.6g}",
    )
    return VerifyReport(None, [record])


def resolve_suites(requested: list[str], p: PhysicalParams) -> list[str]:
    if not requested or "all" in requested:
        # the Lipschitz constant needs ω(0) > 0
        skip = {"gamma_limit", "holder", "stability"} if p.lambda1 == 0.0 else {"exact_energy"}
        return [name for name in SUITES if name not in skip]
    unknown = [name for name in requested if name not in SUITES]
    if unknown:
        raise CheckError(f"unknown check suite(s): {', '.join(unknown)}")
    return list(requested)


def run_suite(cfg: ConfigFile, f0: Spectrum, seed: int, suites: list[str]) -> VerifyReport:
    """Run the selected checks against one configuration."""
    p = cfg.physical
    run_cfg = RunConfig(**cfg.run.model_dump(), params=p)
    family = SampleFamily.from_settings(f0.grid, p, cfg.verify, run_cfg.N)
    family = replace(family, seed=seed)
    names = resolve_suites(suites, p)
    report = VerifyReport(seed=seed)
    table = build_triads(f0.grid) if any(n != "exact_energy" for n in names) else None

    for name in names:
        if name == "attenuation":
            report.extend(check_attenuation(family, p, table))
        elif name == "gain_moment":
            report.extend(check_gain_moment(family, run_cfg.N, p, table))
        elif name == "holder":
            report.extend(check_holder(family, run_cfg.N, p, cfg.verify.pairs, table))
        elif name == "gamma_limit":
            report.extend(check_gamma_limit(f0, p, cfg.verify.gamma_scales, table))
        elif name == "exact_energy":
            report.extend(check_exact_energy(family, p))
        elif name == "ledger":
            env = build_envelope(f0, run_cfg, cfg.envelope)
            run_table = table if run_cfg.mode == CollisionMode.NEAR_RESONANCE else None
            _, ledger = evolve(f0, run_cfg, env, run_table)
            report.extend(check_ledger(ledger, env, p))
        elif name == "stability":
            env = build_envelope(f0, run_cfg, cfg.envelope)
            run_table = table if run_cfg.mode == CollisionMode.NEAR_RESONANCE else None
            g0 = f0.with_values(1.01 * f0.values)
            lipschitz = report.lipschitz_estimate
            if lipschitz is None:
                lipschitz = check_holder(family, run_cfg.N, p, cfg.verify.pairs, table).lipschitz_estimate
            report.extend(check_stability(f0, g0, run_cfg, env, run_table, lipschitz))
    for record in report.records:
        record.seed = seed
    return report

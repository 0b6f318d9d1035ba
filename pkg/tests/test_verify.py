import math

import numpy as np
import pytest

from iwkinetic.models import (
    ConfigFile,
    GridSpec,
    PhysicalParams,
    Provenance,
    RunConfig,
    RunSettings,
    Spacing,
    VerifySettings,
)
from iwkinetic.presets import preset_spectrum
from iwkinetic.solver.evolution import AdmissibilityError, MomentLedger, build_envelope, evolve
from iwkinetic.solver.spectrum import build_grid, l1n_norm, mass
from iwkinetic.verify.checks import (
    CheckError,
    check_attenuation,
    check_exact_energy,
    check_gain_moment,
    check_gamma_limit,
    check_holder,
    check_ledger,
    check_stability,
    resolve_suites,
    run_suite,
)
from iwkinetic.verify.constants import (
    gain_moment_constant,
    holder_constant,
    kernel_ratio,
    lipschitz_constant,
    power_split,
    upper_rate,
)
from iwkinetic.verify.samples import SampleError, SampleFamily, generate, generate_pairs


@pytest.fixture
def family(grid48, params):
    return SampleFamily(grid48, params, count=6, seed=7)


def test_power_split():
    assert power_split(1.0) == 2.0
    assert power_split(2.0) == 8.0
    assert power_split(0.5) == pytest.approx(math.sqrt(2.0))


def test_gain_moment_constant_for_unit_constants():
    constant = gain_moment_constant(1.0, PhysicalParams())
    assert kernel_ratio(PhysicalParams()) == 0.5
    assert constant["value"] == pytest.approx(16.0)
    assert constant["terms"]["direct_term"] + constant["terms"]["mirrored_term"] == constant["value"]


def test_rate_and_holder_constants():
    assert upper_rate(0.0, 2.0, PhysicalParams()) == 16.0
    assert upper_rate(0.5, 2.0, PhysicalParams()) == 24.0
    lip = lipschitz_constant(1.0, 100.0, 0.1, 1.0, PhysicalParams())
    assert holder_constant(lip, 100.0)["value"] == pytest.approx(lip["value"] * math.sqrt(200.0))
    with pytest.raises(ValueError):
        lipschitz_constant(1.0, 100.0, 0.1, 0.0, PhysicalParams())


def test_samples_are_admissible_and_reproducible(family, params):
    first = generate(family)
    second = generate(family)
    assert len(first) == family.count
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.values, b.values)
        assert a.is_nonnegative()
        assert mass(a) >= family.mass_floor
        assert l1n_norm(a, family.N + 2.0, params) <= family.moment_ceiling


def test_pairs_use_their_own_stream(family):
    pairs = generate_pairs(family, 2)
    assert len(pairs) == 2
    assert not np.array_equal(pairs[0][0].values, generate(family, 1)[0].values)


def test_impossible_family_raises(grid48, params):
    family = SampleFamily(grid48, params, count=1, seed=1, mass_floor=1e12)
    with pytest.raises(SampleError):
        generate(family)


def test_attenuation_check_passes(family, params, table48):
    record = check_attenuation(family, params, table48).records[0]
    assert record.passed
    assert record.samples == family.count
    assert 0.0 < record.worst_ratio <= 1.0


def test_gain_moment_check_passes(family, params, table48):
    record = check_gain_moment(family, 1.0, params, table48).records[0]
    assert record.passed
    assert record.bound == pytest.approx(16.0)
    assert "power_split" in record.note


def test_holder_checks_pass(family, params, table48):
    report = check_holder(family, 1.0, params, n_pairs=4, table=table48)
    assert [r.name for r in report.records] == ["lipschitz", "holder", "interpolation"]
    assert report.passed
    assert report.lipschitz_estimate > 0.0
    assert report.records[2].provenance == Provenance.TRIVIAL


def test_empty_family_is_an_error(family, params, table48):
    with pytest.raises(CheckError):
        check_attenuation(SampleFamily(family.grid, params, count=0, seed=7), params, table48)
    with pytest.raises(CheckError):
        check_gain_moment(family, -1.0, params, table48)


def test_gamma_limit_slope_is_one(grid48, params, table48):
    f = preset_spectrum("gaussian_bump", {"A": 1e-4, "r0": 2.0, "sigma": 0.5}, grid48)
    record = check_gamma_limit(f, params, [1e-1, 1e-2, 1e-3], table48).records[0]
    assert record.passed
    assert record.worst_ratio == pytest.approx(1.0, abs=0.1)


def test_gamma_limit_preconditions(gaussian, params, table48):
    with pytest.raises(CheckError):
        check_gamma_limit(gaussian, PhysicalParams(lambda1=0.0), [1e-1, 1e-2])
    with pytest.raises(CheckError):
        check_gamma_limit(gaussian, params, [1e-3, 1e-2], table48)
    with pytest.raises(CheckError):
        check_gamma_limit(gaussian, params, [1e-3], table48)
    zero = gaussian.with_values(np.zeros(gaussian.grid.n))
    assert check_gamma_limit(zero, params, [1e-1, 1e-2], table48).passed


def test_exact_energy_check(exact_grid):
    p = PhysicalParams(lambda1=0.0, lambda2=1.0)
    family = SampleFamily(exact_grid, p, count=4, seed=3)
    record = check_exact_energy(family, p).records[0]
    assert record.passed
    assert record.worst_ratio <= 1e-12


def test_ledger_checks_on_a_real_run(gaussian, params, table48):
    cfg = RunConfig(T=0.05, params=params)
    env = build_envelope(gaussian, cfg)
    _, ledger = evolve(gaussian, cfg, env, table48)
    report = check_ledger(ledger, env, params)
    assert [r.name for r in report.records] == [
        "invariant_set", "moment_inequality", "moment_envelope", "restricted_mass",
    ]
    assert report.passed


def test_ledger_with_one_row_passes(gaussian, params, table48):
    cfg = RunConfig(T=0.0, params=params)
    env = build_envelope(gaussian, cfg)
    _, ledger = evolve(gaussian, cfg, env, table48)
    assert check_ledger(ledger, env, params).passed


def test_empty_ledger_is_an_error(gaussian, params):
    env = build_envelope(gaussian, RunConfig(params=params))
    with pytest.raises(CheckError):
        check_ledger(MomentLedger(N=1.0, mode="near_resonance"), env, params)


def test_stability_with_identical_data_is_vacuous(gaussian, params, table48):
    cfg = RunConfig(T=0.05, params=params)
    env = build_envelope(gaussian, cfg)
    record = check_stability(gaussian, gaussian, cfg, env, table48).records[0]
    assert record.passed and record.worst_ratio == 0.0


def test_stability_of_a_scaled_copy(gaussian, family, params, table48):
    cfg = RunConfig(T=0.05, params=params)
    env = build_envelope(gaussian, cfg)
    lipschitz = check_holder(family, 1.0, params, n_pairs=4, table=table48).lipschitz_estimate
    g0 = gaussian.with_values(1.01 * gaussian.values)
    record = check_stability(gaussian, g0, cfg, env, table48, lipschitz).records[0]
    assert record.passed
    assert record.samples > 1
    assert record.note.startswith(f"L_emp={lipschitz * math.sqrt(65.0):.6g} ")
    assert "trajectory ratio" in record.note


def test_stability_needs_a_sampled_lipschitz_estimate(gaussian, params, table48):
    cfg = RunConfig(T=0.05, params=params)
    env = build_envelope(gaussian, cfg)
    g0 = gaussian.with_values(1.01 * gaussian.values)
    with pytest.raises(CheckError, match="Lipschitz"):
        check_stability(gaussian, g0, cfg, env, table48)


def test_stability_rejects_inadmissible_input(gaussian, params, table48):
    cfg = RunConfig(T=0.05, params=params)
    env = build_envelope(gaussian, cfg)
    with pytest.raises(AdmissibilityError):
        check_stability(gaussian, gaussian.with_values(np.zeros(gaussian.grid.n)), cfg, env, table48)


def test_resolve_suites(params):
    assert "exact_energy" not in resolve_suites(["all"], params)
    exact = resolve_suites([], PhysicalParams(lambda1=0.0))
    assert "gamma_limit" not in exact and "holder" not in exact and "exact_energy" in exact
    assert "stability" not in exact
    assert resolve_suites(["ledger"], params) == ["ledger"]
    with pytest.raises(CheckError):
        resolve_suites(["nonsense"], params)


def _suite_config(params) -> ConfigFile:
    return ConfigFile(
        physical=params,
        grid=GridSpec(n=32),
        run=RunSettings(T=0.02),
        verify=VerifySettings(samples=3, pairs=3),
    )


@pytest.mark.slow
def test_full_suite_passes_and_is_deterministic(params):
    cfg = _suite_config(params)
    grid = build_grid(0.0, 8.0, 32, Spacing.UNIFORM)
    f0 = preset_spectrum("gaussian_bump", {}, grid)
    first = run_suite(cfg, f0, 11, ["all"])
    second = run_suite(cfg, f0, 11, ["all"])
    assert first.passed
    assert {r.name for r in first.records} >= {"attenuation", "gain_moment", "stability", "gamma_limit"}
    assert all(r.seed == 11 for r in first.records)
    assert [r.worst_ratio for r in first.records] == [r.worst_ratio for r in second.records]


def test_seed_changes_the_samples(params):
    cfg = _suite_config(params)
    grid = build_grid(0.0, 8.0, 32, Spacing.UNIFORM)
    f0 = preset_spectrum("gaussian_bump", {}, grid)
    a = run_suite(cfg, f0, 1, ["attenuation"]).records[0]
    b = run_suite(cfg, f0, 2, ["attenuation"]).records[0]
    assert a.worst_ratio != b.worst_ratio


def test_stability_alone_takes_its_rate_from_the_holder_pairs(params):
    cfg = _suite_config(params)
    grid = build_grid(0.0, 8.0, 32, Spacing.UNIFORM)
    f0 = preset_spectrum("gaussian_bump", {}, grid)
    report = run_suite(cfg, f0, 5, ["stability"])
    assert [r.name for r in report.records] == ["stability"]
    assert report.passed
    assert "sampled" in report.records[0].note


@pytest.mark.slow
def test_reference_run_keeps_its_bounds(grid128, table128, params):
    f0 = preset_spectrum("gaussian_bump", {"A": 1.0, "r0": 2.0, "sigma": 0.5}, grid128)
    cfg = RunConfig(T=1.0, params=params)
    env = build_envelope(f0, cfg)
    iterates = []
    _, ledger = evolve(f0, cfg, env, table128, on_record=lambda t, f: iterates.append(f))
    assert ledger.all_flags_pass()
    assert all(f.is_nonnegative() for f in iterates)

    report = check_ledger(ledger, env, params)
    assert report.passed
    notes = {r.name: r.note for r in report.records}
    assert "infinite" in notes["moment_envelope"]
    assert "infinite" in notes["invariant_set"]

    family = SampleFamily(grid128, params, count=6, seed=7)
    lipschitz = check_holder(family, 1.0, params, n_pairs=10, table=table128).lipschitz_estimate
    g0 = f0.with_values(1.01 * f0.values)
    assert check_stability(f0, g0, cfg, env, table128, lipschitz).passed

import numba
import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from iwkinetic.models import PhysicalParams, Spacing
from iwkinetic.solver.collision import (
    CollisionError,
    attenuation,
    build_colinear_triads,
    build_triads,
    evaluate,
    evaluate_exact,
    exact_weak_form,
    lorentzian_domination,
    resonance_fraction,
    triad_rates,
    weak_form,
)
from iwkinetic.solver.physics import omega
from iwkinetic.solver.spectrum import Spectrum, build_grid


def _triads(table):
    return set(zip(table.i.tolist(), table.j.tolist(), table.l.tolist()))


def test_table_is_closed_under_permutation(grid16):
    table = build_triads(grid16)
    triads = _triads(table)
    assert triads
    for i, j, l in triads:
        assert (i, l, j) in triads
        assert (j, i, l) in triads
        assert (l, j, i) in triads


def test_table_is_lexicographic_and_excludes_zero_radius(grid16):
    table = build_triads(grid16)
    keys = np.stack([table.i, table.j, table.l], axis=1)
    order = np.lexsort((table.l, table.j, table.i))
    np.testing.assert_array_equal(order, np.arange(len(table)))
    assert np.all(keys > 0)
    assert table.offsets[-1] == len(table)


def test_triangle_inequality_holds(grid16):
    table = build_triads(grid16)
    r = grid16.nodes
    eps = 1e-12 * grid16.r_max
    assert np.all(np.abs(r[table.j] - r[table.l]) <= r[table.i] + eps)
    assert np.all(r[table.i] <= r[table.j] + r[table.l] + eps)


def test_symmetric_weight_is_permutation_invariant(grid16):
    table = build_triads(grid16)
    keys = zip(table.i.tolist(), table.j.tolist(), table.l.tolist())
    weight = dict(zip(keys, table.symmetric_weight()))
    for (i, j, l), w in weight.items():
        assert weight[(j, i, l)] == pytest.approx(w, rel=1e-12)
        assert weight[(l, j, i)] == pytest.approx(w, rel=1e-12)


def test_colinear_triads_carry_half_weight(grid16):
    table = build_triads(grid16)
    r, w = grid16.nodes, grid16.line_weights
    full = 2.0 * np.pi / r[table.i] * r[table.j] * r[table.l] * w[table.j] * w[table.l]
    colinear = table.i == table.j + table.l
    assert np.any(colinear)
    np.testing.assert_allclose(table.prefactor[colinear], 0.5 * full[colinear], rtol=1e-14)


def test_zero_spectrum_gives_zero(grid48, table48, params):
    result = evaluate(Spectrum(grid48, np.zeros(grid48.n)), params, table48)
    assert not result.gain.any() and not result.theta.any() and not result.q.any()


def test_rejects_negative_input_and_bad_scale(gaussian, table48, params):
    values = gaussian.values.copy()
    values[5] = -1e-3
    with pytest.raises(CollisionError):
        evaluate(gaussian.with_values(values), params, table48)
    with pytest.raises(CollisionError):
        evaluate(gaussian, params, table48, gamma_scale=0.0)


def test_gain_and_attenuation_are_nonnegative(gaussian, table48, params):
    result = evaluate(gaussian, params, table48, debug=True)
    assert np.all(result.gain >= 0.0)
    assert np.all(result.theta >= 0.0)
    np.testing.assert_allclose(result.q, result.gain - gaussian.values * result.theta)
    assert lorentzian_domination(gaussian, params, table48) <= 1.0


@given(
    st.floats(min_value=0.5, max_value=5.0),
    st.floats(min_value=0.2, max_value=1.5),
    st.floats(min_value=1e-3, max_value=10.0),
)
@settings(max_examples=20, deadline=None)
def test_attenuation_bound(grid48, table48, params, center, width, amplitude):
    r = grid48.nodes
    f = Spectrum(grid48, amplitude * np.exp(-((r - center) ** 2) / width**2))
    theta = attenuation(f, params, table48)
    assert np.all(theta[1:] <= 4.0 * r[1:] * (1.0 + 1e-12))
    assert theta[0] == 0.0


def test_single_node_gain_support(grid48, table48, params):
    k = 10
    values = np.zeros(grid48.n)
    values[k] = 1.0
    result = evaluate(Spectrum(grid48, values), params, table48)
    r = grid48.nodes
    beyond = r > 2.0 * r[k] * (1.0 + 1e-12)
    assert np.all(result.gain[beyond] == 0.0)
    assert result.gain[2 * k] > 0.0


def test_weak_form_matches_strong_form(grid48, table48, params, random_bump):
    rng = np.random.default_rng(3)
    for _ in range(5):
        f = random_bump(grid48, rng)
        phi = rng.normal(size=grid48.n)
        strong = float(np.sum(grid48.volume_weights * phi * evaluate(f, params, table48).q))
        rates = triad_rates(f, params, table48)
        spread = np.abs(phi[table48.i]) + np.abs(phi[table48.j]) + np.abs(phi[table48.l])
        scale = float(np.sum(np.abs(rates) * spread))
        assert abs(weak_form(f, phi, params, table48) - strong) <= 1e-10 * scale


def test_evaluation_is_deterministic_across_thread_counts(gaussian, table48, params):
    first = evaluate(gaussian, params, table48)
    previous = numba.get_num_threads()
    try:
        numba.set_num_threads(1)
        single = evaluate(gaussian, params, table48)
    finally:
        numba.set_num_threads(previous)
    np.testing.assert_array_equal(first.gain, single.gain)
    np.testing.assert_array_equal(first.theta, single.theta)


def test_smaller_broadening_weakens_transfer(gaussian, table48, params):
    wv = gaussian.grid.volume_weights
    strong = np.sum(wv * np.abs(evaluate(gaussian, params, table48, gamma_scale=1e-3).q))
    weak = np.sum(wv * np.abs(evaluate(gaussian, params, table48, gamma_scale=1e-5).q))
    assert weak < strong


def test_resonance_fraction_is_a_share(gaussian, table48, params):
    share = resonance_fraction(gaussian, params, table48)
    assert 0.0 <= share <= 1.0


def test_exact_mode_conserves_quadratic_energy(exact_grid, random_bump):
    p = PhysicalParams(lambda1=0.0, lambda2=1.0)
    table = build_colinear_triads(exact_grid, p)
    weights = exact_grid.volume_weights * omega(exact_grid.nodes, p)
    rng = np.random.default_rng(11)
    for _ in range(10):
        q = evaluate_exact(random_bump(exact_grid, rng), p, table).q
        assert abs(np.sum(weights * q)) <= 1e-12 * np.sum(weights * np.abs(q))


def test_exact_weak_form_matches_strong_form(exact_grid, random_bump):
    p = PhysicalParams(lambda1=0.0, lambda2=2.0)
    table = build_colinear_triads(exact_grid, p)
    rng = np.random.default_rng(5)
    f = random_bump(exact_grid, rng)
    phi = np.ones(exact_grid.n)
    strong = np.sum(exact_grid.volume_weights * phi * evaluate_exact(f, p, table).q)
    assert exact_weak_form(f, phi, p, table) == pytest.approx(strong, rel=1e-10)


def test_exact_gain_is_pointwise_up_to_the_last_node(exact_grid):
    p = PhysicalParams(lambda1=0.0, lambda2=1.0)
    table = build_colinear_triads(exact_grid, p)
    r = exact_grid.nodes
    h = exact_grid.step
    # zero above r = 6, so the top two nodes only receive the direct b + c = a term
    values = np.where(r <= 6.0, np.exp(-((r - 3.0) ** 2)), 0.0)
    gain = evaluate_exact(Spectrum(exact_grid, values), p, table).gain
    for a in (exact_grid.n - 1, exact_grid.n - 2):
        b = np.arange(1, a)
        c = a - b
        direct = (2.0 * np.pi / r[a]) * np.sum(
            h * r[b] * r[c] * r[a] * r[b] * r[c] * (np.pi / 2.0) * values[b] * values[c]
        )
        assert gain[a] == pytest.approx(direct, rel=1e-12)


def test_exact_mode_preconditions(exact_grid):
    with pytest.raises(CollisionError, match="empty resonant manifold"):
        build_colinear_triads(exact_grid, PhysicalParams(lambda1=1.0))
    log_grid = build_grid(0.1, 8.0, 32, Spacing.LOGARITHMIC)
    with pytest.raises(CollisionError):
        build_colinear_triads(log_grid, PhysicalParams(lambda1=0.0))

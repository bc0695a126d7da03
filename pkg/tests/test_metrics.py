import math

import numpy as np
import pytest

from lgfibration.errors import ConfigurationError, GridTooLargeError, OrderMismatchError
from lgfibration.fibration import project
from lgfibration.metrics import (
    AnglePair,
    GridPlacement,
    ScanTally,
    closed_form_difference_n2,
    closed_form_difference_n2_array,
    difference,
    difference_array,
    grid_axes,
    invariance_condition_n2,
    invariance_condition_n2_array,
    is_invariant_pair,
    iter_difference_grid,
    rotor_inner,
    scan_difference,
)
from lgfibration.multicomplex import RotorAngles, inner_product, rotor_product


def random_angles(rng, order, draws):
    theta = rng.uniform(0, math.pi, (draws, order))
    theta[:, 0] *= 2
    return theta


def test_angle_pair_order_mismatch():
    with pytest.raises(OrderMismatchError):
        AnglePair.of([0.1, 0.2], [0.1, 0.2, 0.3])


def test_rotor_inner():
    assert rotor_inner(AnglePair.of([0.3, 1.1], [0.3, 1.1])) == 1.0
    pair = AnglePair.of([math.pi / 3, math.pi / 4], [0.0, 0.0])
    assert rotor_inner(pair) == pytest.approx(0.3535533905932738, abs=1e-15)


@pytest.mark.parametrize("order", range(1, 9))
def test_rotor_inner_matches_multicomplex(rng, order):
    for alpha, beta in zip(random_angles(rng, order, 20), random_angles(rng, order, 20)):
        pair = AnglePair.of(alpha, beta)
        expected = inner_product(rotor_product(pair.alpha), rotor_product(pair.beta))
        assert rotor_inner(pair) == pytest.approx(expected, abs=1e-12)


def test_difference_examples():
    assert difference(AnglePair.of([0.0, math.pi / 2], [math.pi / 2, math.pi / 2])) == (
        pytest.approx(1.0, abs=1e-15)
    )
    assert difference(AnglePair.of([1.7, 0.4], [1.7, 0.4])) == 0.0
    assert difference(AnglePair.of([2.5, 0.0], [5.9, 1.3])) <= 1e-15


def test_difference_from_raw_dot_products(rng):
    for alpha, beta in zip(random_angles(rng, 3, 20), random_angles(rng, 3, 20)):
        a, b = RotorAngles(alpha), RotorAngles(beta)
        before = np.dot(rotor_product(a).coeffs, rotor_product(b).coeffs)
        after = np.dot(project(a).coords, project(b).coords)
        assert difference(AnglePair(a, b)) == pytest.approx(abs(before - after), abs=1e-12)


@pytest.mark.parametrize("order", [2, 3, 5])
def test_difference_bounds_and_symmetry(rng, order):
    alphas, betas = random_angles(rng, order, 1000), random_angles(rng, order, 1000)
    values = difference_array(alphas, betas)
    assert np.all(values >= 0)
    assert np.all(values <= 2 + 1e-12)
    assert np.array_equal(values, difference_array(betas, alphas))
    assert np.all(difference_array(alphas, alphas) == 0)


def test_closed_form_examples():
    same_sign = AnglePair.of([math.pi / 3, math.pi / 4], [math.pi / 3, math.pi / 6])
    assert closed_form_difference_n2(same_sign) == pytest.approx(0.0, abs=1e-15)

    poles = AnglePair.of([0.0, math.pi / 2], [math.pi / 2, math.pi / 2])
    assert closed_form_difference_n2(poles) == pytest.approx(1.0, abs=1e-15)

    assert closed_form_difference_n2(AnglePair.of([1.0, 0.0], [4.0, 2.0])) == 0.0


def test_closed_form_needs_order_two():
    with pytest.raises(OrderMismatchError, match="order 2"):
        closed_form_difference_n2(AnglePair.of([0.1, 0.2, 0.3], [0.1, 0.2, 0.3]))


def test_closed_form_matches_difference(rng):
    alphas, betas = random_angles(rng, 2, 10_000), random_angles(rng, 2, 10_000)
    np.testing.assert_allclose(
        difference_array(alphas, betas),
        closed_form_difference_n2_array(alphas, betas),
        atol=1e-12,
        rtol=0,
    )


@pytest.mark.slow
def test_closed_form_matches_difference_full(rng):
    alphas, betas = random_angles(rng, 2, 100_000), random_angles(rng, 2, 100_000)
    delta = difference_array(alphas, betas) - closed_form_difference_n2_array(alphas, betas)
    assert np.max(np.abs(delta)) <= 1e-12


def test_is_invariant_pair():
    assert is_invariant_pair(AnglePair.of([0.7, 2.1], [0.7, 2.1]))
    assert not is_invariant_pair(AnglePair.of([0.0, math.pi / 2], [math.pi / 2, math.pi / 2]))


def test_opposite_half_circles_are_invariant():
    # alpha_1 - beta_1 = pi with a sign flip between them: cos = -1 = sign factor
    pair = AnglePair.of([0.5, 1.0], [0.5 + math.pi, 2.0])
    assert is_invariant_pair(pair)
    assert invariance_condition_n2(pair)


def test_invariance_condition_needs_order_two():
    with pytest.raises(OrderMismatchError):
        invariance_condition_n2(AnglePair.of([0.1], [0.2]))


def test_invariance_condition_matches_difference_on_grid():
    mismatches = 0
    for alphas, betas, values in iter_difference_grid(2, 16, GridPlacement.CENTER):
        condition = invariance_condition_n2_array(alphas, betas, 1e-9)
        mismatches += np.count_nonzero(condition != (values <= 1e-9))
    assert mismatches == 0


@pytest.mark.slow
def test_invariance_condition_matches_difference_on_fine_grid():
    mismatches = 0
    for alphas, betas, values in iter_difference_grid(2, 64, GridPlacement.CENTER):
        condition = invariance_condition_n2_array(alphas, betas, 1e-9)
        mismatches += np.count_nonzero(condition != (values <= 1e-9))
    assert mismatches == 0


def test_grid_axes():
    center = grid_axes(2, 4, GridPlacement.CENTER)
    assert len(center) == 4
    np.testing.assert_allclose(center[0], np.array([0.5, 1.5, 2.5, 3.5]) * math.pi / 2)
    np.testing.assert_allclose(center[1], np.array([0.5, 1.5, 2.5, 3.5]) * math.pi / 4)

    edge = grid_axes(2, 4, GridPlacement.EDGE)
    np.testing.assert_allclose(edge[3], np.array([0, 1, 2, 3]) * math.pi / 4)


def test_iter_difference_grid_order():
    chunks = list(iter_difference_grid(1, 3, GridPlacement.EDGE, chunk_size=4))
    assert [len(values) for _, _, values in chunks] == [4, 4, 1]
    alphas = np.concatenate([chunk[0] for chunk in chunks])[:, 0]
    betas = np.concatenate([chunk[1] for chunk in chunks])[:, 0]
    step = 2 * math.pi / 3
    np.testing.assert_allclose(alphas, np.repeat([0, step, 2 * step], 3))
    np.testing.assert_allclose(betas, np.tile([0, step, 2 * step], 3))


def test_scan_row_count():
    scan = scan_difference(2, 4)
    assert scan.evaluations == 256
    assert len(list(scan.results())) == 256
    assert scan.minimum == 0.0
    assert scan.maximum <= 2


def test_scan_sin_zero_rows_are_invariant():
    scan = scan_difference(2, 4, placement=GridPlacement.EDGE)
    for pair, value in scan.results():
        if pair.alpha.theta[1] == 0 or pair.beta.theta[1] == 0:
            assert value <= 1e-9
            assert is_invariant_pair(pair)


def test_scan_summary():
    scan = scan_difference(2, 8, keep_results=False)
    assert scan.values is None
    assert list(scan.results()) == []

    summary = scan.summary()
    assert summary["evaluations"] == 8**4
    assert summary["placement"] == "center"
    assert 0 < summary["invariant_fraction"] < 1
    assert summary["invariant_count"] == scan.invariant_count


def test_scan_tally_over_small_chunks():
    tally = ScanTally(2, 4, GridPlacement.EDGE, 1e-9)
    values = []
    for _, _, chunk in iter_difference_grid(2, 4, GridPlacement.EDGE, chunk_size=7):
        assert chunk.size <= 7
        tally.add(chunk)
        values.append(chunk)

    scan = tally.result()
    reference = scan_difference(2, 4, placement=GridPlacement.EDGE)
    assert scan.summary() == reference.summary()
    np.testing.assert_array_equal(np.concatenate(values), reference.values)


def test_scan_tally_ignores_empty_chunks():
    tally = ScanTally(2, 2, GridPlacement.CENTER, 1e-9)
    tally.add(np.array([]))
    tally.add(np.array([0.5, 0.0]))
    scan = tally.result()
    assert (scan.evaluations, scan.minimum, scan.maximum) == (2, 0.0, 0.5)
    assert scan.invariant_count == 1


def test_scan_order_three_rechecked_by_dot_products():
    scan = scan_difference(3, 4)
    checked = 0
    for pair, value in scan.results():
        if value > 1e-9:
            continue
        before = np.dot(rotor_product(pair.alpha).coeffs, rotor_product(pair.beta).coeffs)
        after = np.dot(project(pair.alpha).coords, project(pair.beta).coords)
        assert abs(before - after) <= 1e-9
        checked += 1
    assert checked == scan.invariant_count


def test_scan_grid_too_large():
    with pytest.raises(GridTooLargeError, match="limit"):
        scan_difference(3, 32, max_evaluations=10**6)


def test_scan_bad_resolution():
    with pytest.raises(ConfigurationError, match="resolution"):
        scan_difference(2, 1)

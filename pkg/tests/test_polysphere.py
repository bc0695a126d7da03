import math

import numpy as np
import pytest

from lgfibration.errors import ConfigurationError, InputError, NonUnitInputError
from lgfibration.polysphere import (
    AngleDomain,
    IndexPartition,
    SphereAngles,
    angle_domains,
    embed_sphere,
    hopf,
    hopf_polyspherical,
    invert_embed_sphere,
    sphere_order,
    theta_partition,
)


def random_sphere_angles(rng, order):
    widths = np.array([d.upper for d in angle_domains(order)])
    return SphereAngles(rng.uniform(0, 1, widths.size) * widths)


def test_angle_domains_order_two():
    assert angle_domains(2) == (AngleDomain.HALF, AngleDomain.FULL, AngleDomain.CLOSED)


def test_angle_domains_order_three():
    domains = angle_domains(3)
    assert len(domains) == 7
    assert domains.index(AngleDomain.FULL) == 5 - 1
    assert [i + 1 for i, d in enumerate(domains) if d is AngleDomain.CLOSED] == [6, 7]


@pytest.mark.parametrize("order", range(1, 11))
def test_full_circle_angle_position(order):
    domains = angle_domains(order)
    assert domains.count(AngleDomain.FULL) == 1
    assert domains.index(AngleDomain.FULL) + 1 == (1 << order) - order


def test_domain_contains():
    assert AngleDomain.CLOSED.contains(math.pi)
    assert not AngleDomain.HALF.contains(math.pi)
    assert AngleDomain.FULL.contains(math.pi)
    assert AngleDomain.HALF.contains(-1e-12, tol=1e-9)
    assert not AngleDomain.FULL.contains(-0.1)


@pytest.mark.parametrize(("size", "order"), [(1, 1), (3, 2), (7, 3), (1023, 10)])
def test_sphere_order(size, order):
    assert sphere_order(size) == order


@pytest.mark.parametrize("size", [0, 2, 4, 6])
def test_sphere_order_rejects_bad_sizes(size):
    with pytest.raises(InputError, match="2\\^n - 1"):
        sphere_order(size)


def test_domain_violations():
    angles = SphereAngles([math.pi, 7.0, 0.5])
    assert angles.domain_violations() == [1, 2]
    assert SphereAngles([0.3, 1.2, math.pi]).domain_violations() == []


def test_embed_order_two():
    t1, t2, t3 = 0.3, 4.0, 1.1
    expected = [
        math.cos(t1) * math.cos(t3),
        math.sin(t1) * math.cos(t3),
        math.cos(t2) * math.sin(t3),
        math.sin(t2) * math.sin(t3),
    ]
    np.testing.assert_allclose(embed_sphere(SphereAngles([t1, t2, t3])), expected)


def test_embed_zero_angles():
    vector = embed_sphere(SphereAngles(np.zeros(7)))
    np.testing.assert_array_equal(vector, [1, 0, 0, 0, 0, 0, 0, 0])


def test_embed_order_three_leading_slot(rng):
    angles = random_sphere_angles(rng, 3)
    t = angles.theta
    vector = embed_sphere(angles)
    assert vector[0] == pytest.approx(math.cos(t[0]) * math.cos(t[2]) * math.cos(t[6]))
    assert vector[7] == pytest.approx(math.sin(t[4]) * math.sin(t[5]) * math.sin(t[6]))


@pytest.mark.parametrize("order", range(1, 11))
def test_embed_unit_norm(rng, order):
    for _ in range(20):
        vector = embed_sphere(random_sphere_angles(rng, order))
        assert np.linalg.norm(vector) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("order", [1, 2, 3, 5])
def test_invert_embed_sphere_round_trip(rng, order):
    for _ in range(20):
        vector = embed_sphere(random_sphere_angles(rng, order))
        recovered = invert_embed_sphere(vector)
        assert recovered.domain_violations(1e-9) == []
        np.testing.assert_allclose(embed_sphere(recovered), vector, atol=1e-9)


def test_invert_embed_sphere_covers_the_sphere(rng):
    # Any unit vector has coordinates on the particular orientation.
    vector = rng.normal(size=8)
    vector /= np.linalg.norm(vector)
    recovered = invert_embed_sphere(vector)
    np.testing.assert_allclose(embed_sphere(recovered), vector, atol=1e-9)


def test_invert_embed_sphere_rejects_non_unit():
    with pytest.raises(NonUnitInputError):
        invert_embed_sphere([1.0, 1.0, 0.0, 0.0])


def test_invert_embed_sphere_rejects_nan():
    with pytest.raises(NonUnitInputError):
        invert_embed_sphere([np.nan, 0.0, 0.0, 1.0])


def test_theta_partition_order_one():
    partition = theta_partition(1)
    assert partition.groups == (frozenset({1}),)
    assert partition.representatives == (1,)


def test_theta_partition_order_two():
    partition = theta_partition(2)
    assert partition.groups == (frozenset({1, 2}), frozenset({3}))
    assert partition.representatives == (2, 3)


def test_theta_partition_order_three():
    partition = theta_partition(3)
    assert partition.groups == (frozenset({1, 2, 4, 5}), frozenset({3, 6}), frozenset({7}))
    assert partition.representatives == (5, 3, 7)


@pytest.mark.parametrize("order", range(1, 13))
def test_theta_partition_sizes(order):
    partition = theta_partition(order)
    assert len(partition.groups) == order
    assert len(partition.groups[0]) == 1 << (order - 1)
    for m in range(2, order + 1):
        assert len(partition.groups[m - 1]) == 1 << (order - m)
    assert set().union(*partition.groups) == set(range(1, 1 << order))


def test_theta_partition_too_large():
    with pytest.raises(ConfigurationError):
        theta_partition(21)


def test_index_partition_rejects_overlap():
    with pytest.raises(InputError, match="overlap"):
        IndexPartition(2, (frozenset({1, 2}), frozenset({2, 3})), (2, 3))


def test_index_partition_rejects_gaps():
    with pytest.raises(InputError, match="cover"):
        IndexPartition(2, (frozenset({1}), frozenset({3})), (1, 3))


def test_spread():
    theta = theta_partition(3).spread([0.1, 0.2, 0.3])
    np.testing.assert_array_equal(theta, [0.1, 0.1, 0.2, 0.1, 0.1, 0.2, 0.3])


@pytest.mark.parametrize(
    ("point", "expected"),
    [
        ((1, 0, 0, 0), (1, 0, 0)),
        ((0, 0, 1, 0), (-1, 0, 0)),
        ((0.5, 0.5, 0.5, 0.5), (0, 0, 1)),
        ((0.5, -0.5, 0.5, 0.5), (0, 1, 0)),
    ],
)
def test_hopf(point, expected):
    np.testing.assert_allclose(hopf(point), expected, atol=1e-15)


def test_hopf_rejects_non_unit():
    with pytest.raises(NonUnitInputError):
        hopf([1, 1, 0, 0])


def test_hopf_rejects_wrong_dimension():
    with pytest.raises(InputError, match="R\\^4"):
        hopf([1, 0, 0])


def test_hopf_matches_polyspherical_form(rng):
    for _ in range(100):
        angles = random_sphere_angles(rng, 2)
        image = hopf(embed_sphere(angles))
        np.testing.assert_allclose(image, hopf_polyspherical(*angles.theta), atol=1e-12)
        assert np.linalg.norm(image) == pytest.approx(1.0, abs=1e-12)


def test_hopf_lands_on_unit_sphere(rng):
    points = rng.normal(size=(200, 4))
    for point in points / np.linalg.norm(points, axis=1, keepdims=True):
        assert np.linalg.norm(hopf(point)) == pytest.approx(1.0, abs=1e-12)

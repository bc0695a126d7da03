"""
Polyspherical coordinates for the particular orientation of S^{2^n - 1}.

A sphere of order m is built from two spheres of order m - 1 joined by one top
angle, (w cos(theta), z sin(theta)). The cosine branch w is always a positive
hemisphere block, whose angles all lie in [0, pi). The sine branch z repeats the
construction of its parent. Angles are numbered so that the top angle of a block
comes after all of the angles of both branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike

from lgfibration.errors import InputError, NonUnitInputError, OffManifoldError
from lgfibration.multicomplex import (
    DEFAULT_TOLERANCE,
    TWO_PI,
    FloatArray,
    check_order,
    frozen_array,
    wrap_angles,
)


class AngleDomain(StrEnum):
    HALF = "half"  # [0, pi)
    FULL = "full"  # [0, 2pi)
    CLOSED = "closed"  # [0, pi]

    @property
    def upper(self) -> float:
        return TWO_PI if self is AngleDomain.FULL else math.pi

    def contains(self, value: float, tol: float = 0.0) -> bool:
        if self is AngleDomain.CLOSED:
            return -tol <= value <= math.pi + tol
        return -tol <= value < self.upper + tol


def _block_domains(order: int, positive: bool) -> list[AngleDomain]:
    if order == 1:
        return [AngleDomain.HALF if positive else AngleDomain.FULL]

    head = _block_domains(order - 1, positive=True)
    tail = _block_domains(order - 1, positive=positive)
    top = AngleDomain.HALF if positive else AngleDomain.CLOSED
    return head + tail + [top]


@lru_cache(maxsize=32)
def angle_domains(order: int) -> tuple[AngleDomain, ...]:
    """
    The domain of every angle theta_1 ... theta_{2^n - 1}, in index order.
    """
    return tuple(_block_domains(check_order(order), positive=False))


def sphere_order(size: int) -> int:
    """
    The order n of a vector of 2^n - 1 sphere angles.
    """
    order = (size + 1).bit_length() - 1
    if size < 1 or (1 << order) - 1 != size:
        raise InputError(f"Expected 2^n - 1 sphere angles, got {size}")
    return check_order(order)


@dataclass(frozen=True, eq=False)
class SphereAngles:
    """
    The 2^n - 1 angles of a point on the particular orientation of S^{2^n - 1}.
    """

    theta: FloatArray

    def __post_init__(self) -> None:
        theta = frozen_array(self.theta)
        if theta.ndim != 1:
            raise InputError(f"Sphere angles must be a flat vector, got shape {theta.shape}")
        sphere_order(theta.size)
        object.__setattr__(self, "theta", theta)

    @property
    def order(self) -> int:
        return sphere_order(self.theta.size)

    def domain_violations(self, tol: float = 0.0) -> list[int]:
        """
        The (1-based) indices of angles lying outside of their domain.
        """
        domains = angle_domains(self.order)
        return [
            index
            for index, (value, domain) in enumerate(zip(self.theta, domains, strict=True), 1)
            if not domain.contains(float(value), tol)
        ]

    def __repr__(self) -> str:
        return f"SphereAngles({self.theta.tolist()})"


def embed_array(theta: ArrayLike, order: int) -> FloatArray:
    """
    Vectorized embedding of a stack of sphere angle vectors (last axis).
    """
    angles = np.asarray(theta, dtype=np.float64)
    if order == 1:
        return np.stack([np.cos(angles[..., 0]), np.sin(angles[..., 0])], axis=-1)

    half = (1 << (order - 1)) - 1
    top = angles[..., -1:]
    head = embed_array(angles[..., :half], order - 1)
    tail = embed_array(angles[..., half : 2 * half], order - 1)
    return np.concatenate([head * np.cos(top), tail * np.sin(top)], axis=-1)


def embed_sphere(angles: SphereAngles) -> FloatArray:
    """
    The unit vector in R^{2^n} with the given polyspherical coordinates.
    """
    return embed_array(angles.theta, angles.order)


def _last_sign(block: FloatArray, tol: float) -> float:
    # A positive hemisphere vector has a positive last nonzero component.
    threshold = tol * float(np.linalg.norm(block))
    nonzero = np.flatnonzero(np.abs(block) > threshold)
    if nonzero.size == 0:
        return 1.0
    return 1.0 if block[nonzero[-1]] > 0 else -1.0


def _unwind(block: FloatArray, positive: bool, out: FloatArray, tol: float) -> None:
    if block.size == 2:
        if positive:
            out[0] = math.atan2(max(float(block[1]), 0.0), float(block[0]))
        else:
            out[0] = wrap_angles(math.atan2(float(block[1]), float(block[0])))
        return

    half = block.size // 2
    head, tail = block[:half], block[half:]
    sign = _last_sign(head, tol)
    out[-1] = math.atan2(float(np.linalg.norm(tail)), sign * float(np.linalg.norm(head)))
    _unwind(head * sign, True, out[: half - 1], tol)
    _unwind(tail, positive, out[half - 1 : 2 * half - 2], tol)


def invert_embed_sphere(v: ArrayLike, tol: float = DEFAULT_TOLERANCE) -> SphereAngles:
    """
    Recover the polyspherical coordinates of a unit vector in R^{2^n}.

    Raises OffManifoldError if re-embedding the recovered angles doesn't
    reproduce the vector within tolerance.
    """
    vector = np.asarray(v, dtype=np.float64)
    order = sphere_order(vector.size - 1)

    norm = float(np.linalg.norm(vector))
    if not abs(norm - 1) <= tol:
        raise NonUnitInputError(f"Expected a unit vector, got norm {norm!r}")
    vector = vector / norm

    theta = np.empty(vector.size - 1)
    _unwind(vector, False, theta, tol)

    residual = float(np.max(np.abs(embed_array(theta, order) - vector)))
    if residual > tol:
        raise OffManifoldError(
            f"Vector is not on the particular orientation (residual {residual:.3g})"
        )
    return SphereAngles(theta)


@dataclass(frozen=True)
class IndexPartition:
    """
    Groups of sphere angle indices that collapse onto a single rotor angle.

    groups[k - 1] lists the sphere indices feeding rotor angle theta_k, which
    is read from sphere index representatives[k - 1].
    """

    order: int
    groups: tuple[frozenset[int], ...]
    representatives: tuple[int, ...]

    def __post_init__(self) -> None:
        if not len(self.groups) == len(self.representatives) == self.order:
            raise InputError(f"A partition of order {self.order} needs {self.order} groups")

        seen: set[int] = set()
        for group, representative in zip(self.groups, self.representatives, strict=True):
            if seen & group:
                raise InputError(f"Partition groups overlap at {sorted(seen & group)}")
            if representative not in group:
                raise InputError(f"Representative {representative} is outside of its group")
            seen |= group

        if seen != set(range(1, 1 << self.order)):
            raise InputError("Partition groups don't cover every sphere index")

    def spread(self, values: ArrayLike) -> FloatArray:
        """
        Assign each group's value to every sphere index in the group.
        """
        values = np.asarray(values, dtype=np.float64)
        theta = np.empty((1 << self.order) - 1)
        for group, value in zip(self.groups, values, strict=True):
            theta[[index - 1 for index in group]] = value
        return theta


def _theta_set(base: int, level: int) -> set[int]:
    m = (base + 1).bit_length() - 1
    members = {base}
    for ell in range(1, level + 1):
        shift = (1 << (m + ell - 1)) - 1
        members = {k + shift for k in members} | members
    return members


@lru_cache(maxsize=32)
def theta_partition(order: int) -> IndexPartition:
    """
    Partition the sphere indices {1, ..., 2^n - 1} into the n rotor groups.

    The full circle group grows from index 1 and is read from 2^n - n, the group
    for rotor angle k >= 2 grows from index 2^k - 1.
    """
    check_order(order)
    groups = [frozenset(_theta_set(1, order - 1))]
    representatives = [(1 << order) - order]
    for m in range(2, order + 1):
        groups.append(frozenset(_theta_set((1 << m) - 1, order - m)))
        representatives.append((1 << m) - 1)
    return IndexPartition(order, tuple(groups), tuple(representatives))


def hopf(p: ArrayLike, tol: float = DEFAULT_TOLERANCE) -> FloatArray:
    """
    The Hopf map S^3 -> S^2 in Cartesian form.
    """
    a, b, c, d = _unit_quadruple(p, tol)
    return np.array([a * a + b * b - c * c - d * d, 2 * (a * d - b * c), 2 * (a * c + b * d)])


def _unit_quadruple(p: ArrayLike, tol: float) -> tuple[float, float, float, float]:
    vector = np.asarray(p, dtype=np.float64)
    if vector.shape != (4,):
        raise InputError(f"The Hopf map takes a point of R^4, got shape {vector.shape}")
    norm = float(np.linalg.norm(vector))
    if not abs(norm - 1) <= tol:
        raise NonUnitInputError(f"Expected a unit vector, got norm {norm!r}")
    a, b, c, d = (float(x) for x in vector)
    return a, b, c, d


def hopf_polyspherical(theta1: float, theta2: float, theta3: float) -> FloatArray:
    """
    The Hopf map of the point with polyspherical coordinates (theta1, theta2, theta3).
    """
    return np.array(
        [
            math.cos(2 * theta3),
            -math.sin(2 * theta3) * math.sin(theta1 - theta2),
            math.sin(2 * theta3) * math.cos(theta1 - theta2),
        ]
    )

"""
Arithmetic in the commutative multicomplex ring C_n.

Basis blades are indexed by bitmasks: bit k-1 of a blade index is set when the
simple unit i_k is a factor of the blade, and index 0 is the real unit. Every
i_k squares to -1 and all units commute, so the product of two blades is the
XOR of their indices with one sign flip per shared unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from lgfibration.errors import (
    ConfigurationError,
    InputError,
    NonUnitInputError,
    OffManifoldError,
    OrderMismatchError,
)

# Dense storage needs 2^n coefficients, 2^20 is about 8MB per element.
MAX_ORDER = 20

DEFAULT_TOLERANCE = 1e-9

TWO_PI = 2 * math.pi

type FloatArray = NDArray[np.float64]


def check_order(order: int) -> int:
    if not 1 <= order <= MAX_ORDER:
        raise ConfigurationError(f"Order must be between 1 and {MAX_ORDER}, got {order}")
    return order


def frozen_array(values: ArrayLike) -> FloatArray:
    """
    Copy the values into a float array that can't be modified in place.
    """
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@lru_cache(maxsize=MAX_ORDER)
def _blade_indices(order: int) -> NDArray[np.int64]:
    indices = np.arange(1 << order, dtype=np.int64)
    indices.setflags(write=False)
    return indices


def _blade_signs(a: ArrayLike, b: ArrayLike) -> NDArray[np.int64]:
    shared = np.bitwise_count(np.bitwise_and(a, b)) & 1
    return 1 - 2 * shared.astype(np.int64)


def blade_mul(a: int, b: int, order: int | None = None) -> tuple[int, int]:
    """
    Multiply two basis blades, returning the sign and the resulting blade index.
    """
    if a < 0 or b < 0 or (order is not None and max(a, b) >= 1 << order):
        raise InputError(f"Blade indices ({a}, {b}) are out of range for order {order}")

    sign = -1 if (a & b).bit_count() % 2 else 1
    return sign, a ^ b


@dataclass(frozen=True, eq=False)
class Multicomplex:
    """
    An element of C_n stored as a dense vector of 2^n blade coefficients.
    """

    order: int
    coeffs: FloatArray

    def __post_init__(self) -> None:
        check_order(self.order)
        coeffs = frozen_array(self.coeffs)
        if coeffs.shape != (1 << self.order,):
            raise InputError(
                f"An order {self.order} element needs {1 << self.order} coefficients, "
                f"got shape {coeffs.shape}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, order: int) -> Multicomplex:
        return cls(order, np.zeros(1 << check_order(order)))

    @classmethod
    def one(cls, order: int) -> Multicomplex:
        return cls.blade(0, order)

    @classmethod
    def blade(cls, index: int, order: int, value: float = 1.0) -> Multicomplex:
        coeffs = np.zeros(1 << check_order(order))
        if not 0 <= index < coeffs.size:
            raise InputError(f"Blade index {index} is out of range for order {order}")
        coeffs[index] = value
        return cls(order, coeffs)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def allclose(self, other: Multicomplex, tol: float = DEFAULT_TOLERANCE) -> bool:
        _check_same_order(self, other)
        return bool(np.max(np.abs(self.coeffs - other.coeffs)) <= tol)

    def __add__(self, other: Multicomplex) -> Multicomplex:
        _check_same_order(self, other)
        return Multicomplex(self.order, self.coeffs + other.coeffs)

    def __sub__(self, other: Multicomplex) -> Multicomplex:
        _check_same_order(self, other)
        return Multicomplex(self.order, self.coeffs - other.coeffs)

    def __neg__(self) -> Multicomplex:
        return Multicomplex(self.order, -self.coeffs)

    def __mul__(self, other: Multicomplex | float) -> Multicomplex:
        if isinstance(other, Multicomplex):
            return mul(self, other)
        return Multicomplex(self.order, self.coeffs * float(other))

    def __rmul__(self, other: float) -> Multicomplex:
        return Multicomplex(self.order, self.coeffs * float(other))

    def __repr__(self) -> str:
        return f"Multicomplex(order={self.order}, coeffs={self.coeffs.tolist()})"


def _check_same_order(x: Multicomplex, y: Multicomplex) -> None:
    if x.order != y.order:
        raise OrderMismatchError(f"Cannot combine elements of order {x.order} and {y.order}")


def mul(x: Multicomplex, y: Multicomplex) -> Multicomplex:
    """
    The ring product, the bilinear extension of blade_mul.

    The loop runs over the nonzero blades of the sparser operand. Operands are
    put in a canonical order first so that mul(x, y) and mul(y, x) sum their
    terms identically.
    """
    _check_same_order(x, y)
    if _sparser_first(y, x):
        x, y = y, x

    indices = _blade_indices(x.order)
    result = np.zeros(indices.size)
    for b in np.flatnonzero(y.coeffs):
        partners = indices ^ b
        result += y.coeffs[b] * _blade_signs(partners, b) * x.coeffs[partners]
    return Multicomplex(x.order, result)


def _sparser_first(x: Multicomplex, y: Multicomplex) -> bool:
    """
    Whether x should be the operand whose blades are looped over.
    """
    x_count, y_count = np.count_nonzero(x.coeffs), np.count_nonzero(y.coeffs)
    if x_count != y_count:
        return bool(x_count < y_count)

    differing = np.flatnonzero(x.coeffs != y.coeffs)
    if differing.size == 0:
        return False
    first = differing[0]
    return bool(x.coeffs[first] < y.coeffs[first])


def exp_simple(k: int, theta: float, order: int) -> Multicomplex:
    """
    Euler's formula for a single unit, e^{i_k theta} = cos(theta) + i_k sin(theta).
    """
    check_order(order)
    if not 1 <= k <= order:
        raise InputError(f"Unit index {k} is out of range for order {order}")

    coeffs = np.zeros(1 << order)
    coeffs[0] = math.cos(theta)
    coeffs[1 << (k - 1)] = math.sin(theta)
    return Multicomplex(order, coeffs)


def inner_product(x: Multicomplex, y: Multicomplex) -> float:
    """
    The standard inner product of the two coefficient vectors in R^{2^n}.
    """
    _check_same_order(x, y)
    return float(np.dot(x.coeffs, y.coeffs))


def wrap_angles(values: ArrayLike, period: float = TWO_PI) -> FloatArray:
    wrapped = np.mod(np.asarray(values, dtype=np.float64), period)
    # np.mod rounds tiny negative inputs up to the period itself
    return np.where(wrapped >= period, 0.0, wrapped)


def angle_difference(a: ArrayLike, b: ArrayLike) -> FloatArray:
    """
    The absolute difference between two angles measured around the circle.
    """
    delta = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return np.abs(np.mod(delta + math.pi, TWO_PI) - math.pi)


def canonical_angles(theta: ArrayLike) -> FloatArray:
    """
    Reduce rotor angles into theta_1 in [0, 2pi) and theta_k in [0, pi).

    Works on the last axis, so stacks of angle vectors can be reduced at once.
    Uses e^{i_k (t + pi)} = -e^{i_k t}, moving each sign flip onto theta_1.
    """
    reduced = np.array(wrap_angles(theta), dtype=np.float64)
    flips = reduced[..., 1:] >= math.pi
    reduced[..., 1:] -= math.pi * flips
    reduced[..., 0] = wrap_angles(reduced[..., 0] + math.pi * np.count_nonzero(flips, axis=-1))
    return reduced


@dataclass(frozen=True, eq=False)
class RotorAngles:
    """
    The angles (theta_1, ..., theta_n) of the rotor prod_k e^{i_k theta_k}.
    """

    theta: FloatArray

    def __post_init__(self) -> None:
        theta = frozen_array(self.theta)
        if theta.ndim != 1:
            raise InputError(f"Rotor angles must be a flat vector, got shape {theta.shape}")
        check_order(theta.size)
        object.__setattr__(self, "theta", theta)

    @property
    def order(self) -> int:
        return int(self.theta.size)

    @property
    def is_canonical(self) -> bool:
        head, tail = self.theta[0], self.theta[1:]
        return bool(0 <= head < TWO_PI and np.all((tail >= 0) & (tail < math.pi)))

    def canonical(self) -> RotorAngles:
        return RotorAngles(canonical_angles(self.theta))

    def allclose(self, other: RotorAngles, tol: float = DEFAULT_TOLERANCE) -> bool:
        """
        Compare the canonical forms of two sets of angles, modulo 2pi.
        """
        if self.order != other.order:
            return False
        delta = angle_difference(self.canonical().theta, other.canonical().theta)
        return bool(np.max(delta) <= tol)

    def __repr__(self) -> str:
        return f"RotorAngles({self.theta.tolist()})"


def rotor_product(angles: RotorAngles) -> Multicomplex:
    """
    Multiply out prod_k e^{i_k theta_k} one factor at a time.
    """
    result = Multicomplex.one(angles.order)
    for k, theta in enumerate(angles.theta, start=1):
        result = mul(result, exp_simple(k, float(theta), angles.order))
    return result


def closed_form_expansion(angles: RotorAngles) -> Multicomplex:
    """
    Evaluate the expanded form of the rotor,

        prod_k cos(theta_k)
            + sum_k i_k sin(theta_k) prod_{l>k} cos(theta_l) prod_{m<k} e^{i_m theta_m}

    which must agree with rotor_product.
    """
    order = angles.order
    cos, sin = np.cos(angles.theta), np.sin(angles.theta)

    result = Multicomplex.one(order) * float(np.prod(cos))
    leading = Multicomplex.one(order)
    for k in range(1, order + 1):
        trailing = float(np.prod(cos[k:]))
        unit = Multicomplex.blade(1 << (k - 1), order)
        result = result + mul(unit, leading) * (float(sin[k - 1]) * trailing)
        leading = mul(leading, exp_simple(k, float(angles.theta[k - 1]), order))
    return result


def rotor_coefficients(theta: ArrayLike) -> FloatArray:
    """
    Vectorized rotor coefficients for a stack of angle vectors (last axis).

    The coefficient of blade b is the product over k of sin(theta_k) when bit
    k-1 of b is set and cos(theta_k) otherwise.
    """
    angles = np.asarray(theta, dtype=np.float64)
    coeffs = np.ones(angles.shape[:-1] + (1,))
    for k in range(angles.shape[-1]):
        column = angles[..., k : k + 1]
        coeffs = np.concatenate([coeffs * np.cos(column), coeffs * np.sin(column)], axis=-1)
    return coeffs


def rotor_angles(w: Multicomplex, tol: float = DEFAULT_TOLERANCE) -> RotorAngles:
    """
    Factor a unit element back into canonical rotor angles.

    A rotor's coefficient tensor is the outer product of the (cos, sin) pairs of
    its factors, so every fiber through the largest coefficient is a scaled copy
    of one pair. Each pair is recovered up to sign, theta_k for k >= 2 is kept in
    [0, pi), and theta_1 absorbs the overall sign.
    """
    coeffs = w.coeffs
    norm = float(np.linalg.norm(coeffs))
    if not abs(norm - 1) <= tol:
        raise NonUnitInputError(f"Expected a unit element, got norm {norm!r}")

    pivot = int(np.argmax(np.abs(coeffs)))
    theta = np.empty(w.order)
    for k in range(w.order):
        bit = 1 << k
        theta[k] = math.atan2(coeffs[pivot | bit], coeffs[pivot & ~bit])

    theta[0] = wrap_angles(theta[0])
    theta[1:] = wrap_angles(theta[1:], math.pi)
    rebuilt = rotor_coefficients(theta)
    if np.dot(rebuilt, coeffs) < 0:
        theta[0] = wrap_angles(theta[0] + math.pi)
        rebuilt = -rebuilt

    residual = float(np.max(np.abs(rebuilt - coeffs)))
    if residual > tol:
        raise OffManifoldError(f"Element is not a rotor (residual {residual:.3g})")
    return RotorAngles(theta)

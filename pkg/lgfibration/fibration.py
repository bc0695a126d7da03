"""
The LG fibration S^{2^n - 1} -> S^n and the maps it factors through.

    sphere angles --contract--> rotor angles --project--> S^n
                                     |                     ^
                                torus_embed                mu
                                     v                     |
                                partial torus -------------+

The projection multiplies e_2 ... e_n by a global sign taken from the half
circle theta_1 falls in. It is invertible everywhere except on the kernel,
where some theta_k (k >= 2) is pi/2 and every earlier angle stops mattering.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from lgfibration.errors import (
    InputError,
    InvalidRadiiError,
    KernelAmbiguityError,
    NonUnitInputError,
    OffSurfaceError,
)
from lgfibration.multicomplex import (
    DEFAULT_TOLERANCE,
    FloatArray,
    Multicomplex,
    RotorAngles,
    canonical_angles,
    check_order,
    frozen_array,
    rotor_angles,
    wrap_angles,
)
from lgfibration.polysphere import SphereAngles, theta_partition

_logger = logging.getLogger(__name__)

# Residual below which an inversion candidate is accepted without trying the rest.
_EXACT_RESIDUAL = 64 * float(np.finfo(np.float64).eps)

_NEWTON_STEPS = 2


@dataclass(frozen=True, eq=False)
class ProjectedPoint:
    """
    A point of S^n, the coordinates along e_0 ... e_n.
    """

    coords: FloatArray

    def __post_init__(self) -> None:
        coords = frozen_array(self.coords)
        if coords.ndim != 1 or coords.size < 2:
            raise InputError(f"A projected point needs at least 2 coordinates, got {coords.shape}")
        check_order(coords.size - 1)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_coords(cls, coords: ArrayLike, tol: float = DEFAULT_TOLERANCE) -> ProjectedPoint:
        point = cls(np.asarray(coords, dtype=np.float64))
        if not abs(point.norm - 1) <= tol:
            raise NonUnitInputError(f"Expected a unit vector, got norm {point.norm!r}")
        return point

    @property
    def order(self) -> int:
        return int(self.coords.size - 1)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def allclose(self, other: ProjectedPoint, tol: float = DEFAULT_TOLERANCE) -> bool:
        if self.order != other.order:
            return False
        return bool(np.max(np.abs(self.coords - other.coords)) <= tol)

    def __repr__(self) -> str:
        return f"ProjectedPoint({self.coords.tolist()})"


def default_radii(order: int) -> tuple[float, ...]:
    return (1.0,) * (order - 1)


def check_radii(radii: Sequence[float] | None, order: int) -> tuple[float, ...]:
    """
    Validate the torus radius offsets (a_2, ..., a_n).
    """
    if radii is None:
        return default_radii(order)

    values = tuple(float(a) for a in radii)
    if len(values) != order - 1:
        raise InvalidRadiiError(f"Order {order} needs {order - 1} radii, got {len(values)}")
    for a in values:
        if not math.isfinite(a) or a < 1:
            raise InvalidRadiiError(f"Torus radii must be at least 1, got {a!r}")
    return values


@dataclass(frozen=True, eq=False)
class TorusPoint:
    """
    A point on the partial torus with radius offsets (a_2, ..., a_n).
    """

    coords: FloatArray
    radii: tuple[float, ...]

    def __post_init__(self) -> None:
        coords = frozen_array(self.coords)
        if coords.ndim != 1 or coords.size < 2:
            raise InputError(f"A torus point needs at least 2 coordinates, got {coords.shape}")
        order = check_order(coords.size - 1)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "radii", check_radii(self.radii, order))

    @property
    def order(self) -> int:
        return int(self.coords.size - 1)

    def __repr__(self) -> str:
        return f"TorusPoint({self.coords.tolist()}, radii={list(self.radii)})"


@dataclass(frozen=True)
class KernelReport:
    offending_indices: frozenset[int]
    tolerance: float

    @property
    def is_kernel(self) -> bool:
        return bool(self.offending_indices)


@dataclass(frozen=True)
class FiberClass:
    """
    The preimage of a projected point: every assignment of the free angles
    projects to the same image.
    """

    collapse_index: int | None
    free_indices: frozenset[int]
    image: ProjectedPoint


def contract(angles: SphereAngles, tol: float = DEFAULT_TOLERANCE) -> RotorAngles:
    """
    Collapse sphere angles onto the rotor angles (theta_{2^n - n}, theta_3, theta_7, ...).

    A top angle of pi is folded back to 0 by turning theta_1 half a circle.
    """
    partition = theta_partition(angles.order)
    theta = angles.theta[[index - 1 for index in partition.representatives]]
    if angles.order > 1 and abs(theta[-1] - math.pi) <= tol:
        theta[0] += math.pi
        theta[-1] = 0.0
    theta[0] = wrap_angles(theta[0])
    return RotorAngles(theta)


def _trailing_products(factors: FloatArray) -> FloatArray:
    # trailing[..., k] is the product of factors[..., l] over l > k
    trailing = np.ones_like(factors)
    trailing[..., :-1] = np.cumprod(factors[..., :0:-1], axis=-1)[..., ::-1]
    return trailing


def half_circle_sign(theta: ArrayLike) -> FloatArray:
    halves = np.floor(np.asarray(theta, dtype=np.float64) / math.pi)
    return np.where(np.mod(halves, 2) == 1, -1.0, 1.0)


def project_array(theta: ArrayLike) -> FloatArray:
    """
    Vectorized projection of a stack of rotor angle vectors (last axis).

    Evaluates the full sign product prod_{m<k} (-1)^floor(theta_m / pi) for
    every component, on canonical angles.
    """
    angles = canonical_angles(theta)
    cos, sin = np.cos(angles), np.sin(angles)

    leading = np.ones_like(angles)
    leading[..., 1:] = np.cumprod(half_circle_sign(angles[..., :-1]), axis=-1)

    coords = np.empty(angles.shape[:-1] + (angles.shape[-1] + 1,))
    coords[..., 0] = np.prod(cos, axis=-1)
    coords[..., 1:] = sin * _trailing_products(cos) * leading
    return coords


def project_reduced_array(theta: ArrayLike) -> FloatArray:
    """
    The projection with a single global sign on e_2 ... e_n.
    """
    angles = canonical_angles(theta)
    cos, sin = np.cos(angles), np.sin(angles)

    signs = np.ones_like(angles)
    signs[..., 1:] = half_circle_sign(angles[..., :1])

    coords = np.empty(angles.shape[:-1] + (angles.shape[-1] + 1,))
    coords[..., 0] = np.prod(cos, axis=-1)
    coords[..., 1:] = signs * sin * _trailing_products(cos)
    return coords


def project(angles: RotorAngles) -> ProjectedPoint:
    return ProjectedPoint(project_array(angles.theta))


def project_reduced(angles: RotorAngles) -> ProjectedPoint:
    return ProjectedPoint(project_reduced_array(angles.theta))


def project_coefficients(w: Multicomplex, tol: float = DEFAULT_TOLERANCE) -> ProjectedPoint:
    """
    Project a rotor given by its 2^n blade coefficients.
    """
    return project(rotor_angles(w, tol))


def lg(angles: SphereAngles) -> ProjectedPoint:
    """
    The LG fibration, the projection of the contracted sphere angles.
    """
    return project(contract(angles))


def lg_via_torus(angles: SphereAngles, radii: Sequence[float] | None = None) -> ProjectedPoint:
    """
    The LG fibration taken the long way around, through the partial torus.
    """
    return mu(torus_embed(contract(angles), radii))


def kernel_check(angles: RotorAngles, tol: float = DEFAULT_TOLERANCE) -> KernelReport:
    theta = angles.canonical().theta
    offending = frozenset(
        k for k in range(2, angles.order + 1) if abs(theta[k - 1] - math.pi / 2) <= tol
    )
    return KernelReport(offending, tol)


def fiber_class(angles: RotorAngles, tol: float = DEFAULT_TOLERANCE) -> FiberClass:
    """
    Describe the set of rotors sharing this rotor's projection.

    The highest kernel index m wipes out every angle before it, so the free
    set is {1, ..., m - 1}, with theta_1 confined to its half circle since that
    still picks the sign of e_m ... e_n. With several kernel indices the fiber
    is taken from the largest. It is empty off the kernel.
    """
    report = kernel_check(angles, tol)
    image = project(angles)
    if not report.is_kernel:
        return FiberClass(None, frozenset(), image)

    collapse_index = max(report.offending_indices)
    return FiberClass(collapse_index, frozenset(range(1, collapse_index)), image)


def _unwind_projection(coords: FloatArray, sign: float, choices: dict[int, float]) -> FloatArray:
    """
    Recover rotor angles from the bottom up given the global sign.

    q holds the signed product prod_{l>k} cos(theta_l), whose sign at level k is
    fixed by the sign of component k, or by choices[k] when that is too small.
    """
    order = coords.size - 1
    theta = np.empty(order)

    phi = math.atan2(coords[1], coords[0])
    theta[0] = wrap_angles(phi)
    q = math.hypot(coords[0], coords[1])
    if (theta[0] >= math.pi) != (sign < 0):
        theta[0] = wrap_angles(phi + math.pi)
        q = -q

    for k in range(2, order + 1):
        component = float(coords[k])
        if k == order:
            sigma = 1.0
        else:
            sigma = choices.get(k, math.copysign(1.0, sign * component))
        theta[k - 1] = math.atan2(max(sign * component * sigma, 0.0), q * sigma)
        q = sigma * math.hypot(q, component)
    return theta


def invert_projection(
    p: ProjectedPoint | ArrayLike, tol: float = DEFAULT_TOLERANCE
) -> RotorAngles:
    """
    Recover the canonical rotor angles of a point of S^n.

    Components within tolerance of zero don't reveal which side of pi/2 their
    angle lies on, so both choices are tried and the candidate that projects
    closest to the input wins.
    """
    coords = np.asarray(p.coords if isinstance(p, ProjectedPoint) else p, dtype=np.float64)
    if coords.ndim != 1 or coords.size < 2:
        raise InputError(f"A projected point needs at least 2 coordinates, got {coords.shape}")
    order = check_order(coords.size - 1)

    norm = float(np.linalg.norm(coords))
    if not abs(norm - 1) <= tol:
        raise NonUnitInputError(f"Expected a unit vector, got norm {norm!r}")
    coords = coords / norm

    if order == 1:
        return RotorAngles([wrap_angles(math.atan2(coords[1], coords[0]))])
    if max(abs(coords[0]), abs(coords[1])) <= tol:
        raise KernelAmbiguityError(
            "The point is the image of a kernel fiber, its preimage is not unique"
        )

    upper = coords[2:]
    significant = np.flatnonzero(np.abs(upper) > tol)
    preferred = -1.0 if significant.size and upper[significant[-1]] < 0 else 1.0
    ambiguous = [k for k in range(2, order) if abs(coords[k]) <= tol]

    best_residual, best_theta = math.inf, None
    for sign in (preferred, -preferred):
        for picks in itertools.product((1.0, -1.0), repeat=len(ambiguous)):
            theta = _unwind_projection(coords, sign, dict(zip(ambiguous, picks, strict=True)))
            residual = float(np.max(np.abs(project_array(theta) - coords)))
            if residual < best_residual:
                best_residual, best_theta = residual, theta
            if best_residual <= _EXACT_RESIDUAL:
                break
        if best_residual <= _EXACT_RESIDUAL:
            break

    if best_theta is None or best_residual > tol:
        raise OffSurfaceError(f"No rotor projects onto the point (residual {best_residual:.3g})")
    if ambiguous:
        _logger.debug(f"Resolved {len(ambiguous)} ambiguous levels, residual {best_residual:.3g}")
    return RotorAngles(best_theta).canonical()


def _torus_trailing(theta: FloatArray, radii: FloatArray) -> FloatArray:
    # trailing[k] = prod_{l > k} (a_l + cos(theta_l)), 0-based angle indices
    factors = np.concatenate([[1.0], radii + np.cos(theta[1:])])
    return _trailing_products(factors)


def _torus_coords(theta: FloatArray, radii: FloatArray) -> FloatArray:
    trailing = _torus_trailing(theta, radii)
    sign = half_circle_sign(theta[0])
    coords = np.empty(theta.size + 1)
    coords[0] = math.cos(theta[0]) * trailing[0]
    coords[1] = math.sin(theta[0]) * trailing[0]
    coords[2:] = sign * np.sin(theta[1:]) * trailing[1:]
    return coords


def _torus_jacobian(theta: FloatArray, radii: FloatArray) -> FloatArray:
    order = theta.size
    coords = _torus_coords(theta, radii)
    trailing = _torus_trailing(theta, radii)
    sign = half_circle_sign(theta[0])

    jacobian = np.zeros((order + 1, order))
    jacobian[0, 0] = -coords[1]
    jacobian[1, 0] = coords[0]
    for j in range(1, order):
        # every coordinate below e_j carries the factor (a_j + cos(theta_j))
        factor = radii[j - 1] + math.cos(theta[j])
        ratio = -math.sin(theta[j]) / factor if factor > 0 else 0.0
        jacobian[: j + 1, j] = coords[: j + 1] * ratio
        jacobian[j + 1, j] = sign * math.cos(theta[j]) * trailing[j]
    return jacobian


def torus_embed(angles: RotorAngles, radii: Sequence[float] | None = None) -> TorusPoint:
    """
    Place a rotor on the partial torus with radius offsets (a_2, ..., a_n).
    """
    values = check_radii(radii, angles.order)
    theta = angles.canonical().theta
    return TorusPoint(_torus_coords(theta, np.asarray(values)), values)


def _torus_candidates(
    coords: FloatArray, radii: FloatArray, sign: float, tol: float
) -> Iterator[FloatArray]:
    """
    Walk down from theta_n, branching on the sign of each cosine.
    """
    order = coords.size - 1
    theta = np.zeros(order)

    def descend(k: int, trailing: float) -> Iterator[FloatArray]:
        if trailing < -tol:
            return
        if trailing <= tol:
            # a cosine factor of zero flattens every lower coordinate, so the
            # remaining angles are free apart from the half circle of theta_1
            theta[1:k] = 0.0
            theta[0] = wrap_angles(math.atan2(coords[1], coords[0]))
            if half_circle_sign(theta[0]) != sign:
                theta[0] = wrap_angles(theta[0] + math.pi)
            yield theta.copy()
        if trailing <= 0:
            return
        if k == 1:
            theta[0] = wrap_angles(math.atan2(coords[1], coords[0]))
            yield theta.copy()
            return

        sine = sign * coords[k] / trailing
        if sine < -tol or sine > 1 + tol:
            return
        sine = min(max(sine, 0.0), 1.0)
        cosine = math.sqrt(1 - sine * sine)
        for branch in (cosine, -cosine) if cosine > tol else (cosine,):
            angle = math.atan2(sine, branch)
            if angle >= math.pi:
                continue
            theta[k - 1] = angle
            yield from descend(k - 1, trailing * (radii[k - 2] + branch))

    yield from descend(order, 1.0)


def _polish(theta: FloatArray, coords: FloatArray, radii: FloatArray) -> FloatArray:
    """
    Gauss-Newton steps against the torus parameterization.

    The cosines recovered from sines lose precision near pi/2, the Jacobian
    of the embedding has full rank there so a couple of steps restore it.
    """
    polished = theta.copy()
    for _ in range(_NEWTON_STEPS):
        residual = _torus_coords(polished, radii) - coords
        step, *_ = np.linalg.lstsq(_torus_jacobian(polished, radii), residual, rcond=None)
        polished = polished - step
        polished[0] = wrap_angles(polished[0])
        polished[1:] = np.clip(polished[1:], 0.0, np.nextafter(math.pi, 0.0))
    return polished


def torus_invert(t: TorusPoint, tol: float = DEFAULT_TOLERANCE) -> RotorAngles:
    """
    Recover the unique rotor angles of a point on the partial torus.
    """
    coords, radii = t.coords, np.asarray(t.radii)
    scale = max(1.0, float(np.max(np.abs(coords))))

    upper = coords[2:]
    significant = upper[np.abs(upper) > tol * scale]
    if significant.size == 0:
        signs: tuple[float, ...] = (1.0, -1.0)
    elif np.all(significant > 0):
        signs = (1.0,)
    elif np.all(significant < 0):
        signs = (-1.0,)
    else:
        raise OffSurfaceError("Torus coordinates e_2 ... e_n disagree in sign")

    best_residual, best_theta = math.inf, None
    for sign in signs:
        for theta in _torus_candidates(coords, radii, sign, tol):
            residual = float(np.max(np.abs(_torus_coords(theta, radii) - coords)))
            if residual < best_residual:
                best_residual, best_theta = residual, theta

    if best_theta is None:
        raise OffSurfaceError("No angle assignment reaches the torus point")

    polished = _polish(best_theta, coords, radii)
    polished_residual = float(np.max(np.abs(_torus_coords(polished, radii) - coords)))
    if polished_residual <= best_residual:
        best_residual, best_theta = polished_residual, polished

    if best_residual > tol * scale:
        raise OffSurfaceError(f"Point is off the partial torus (residual {best_residual:.3g})")
    return RotorAngles(best_theta)


def mu(t: TorusPoint, tol: float = DEFAULT_TOLERANCE) -> ProjectedPoint:
    """
    Collapse the partial torus onto S^n, letting every radius offset go to zero.
    """
    theta = torus_invert(t, tol).theta
    return ProjectedPoint(_torus_coords(theta, np.zeros(t.order - 1)))

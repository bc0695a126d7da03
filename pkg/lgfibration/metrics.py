"""
How well the projection preserves inner products between rotors.

For rotors w_1 = prod e^{i_k alpha_k} and w_2 = prod e^{i_k beta_k} the inner
product in R^{2^n} is prod_k cos(alpha_k - beta_k). The difference function
compares it with the inner product of the two projected points, a pair is
invariant when the two agree.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass, replace
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike

from lgfibration.errors import ConfigurationError, GridTooLargeError, OrderMismatchError
from lgfibration.fibration import half_circle_sign, project_array
from lgfibration.multicomplex import (
    DEFAULT_TOLERANCE,
    TWO_PI,
    FloatArray,
    RotorAngles,
    check_order,
)

_logger = logging.getLogger(__name__)

DEFAULT_MAX_EVALUATIONS = 10**8

# Grid points evaluated per vectorized batch.
DEFAULT_CHUNK_SIZE = 1 << 16


class GridPlacement(StrEnum):
    # cell centers stay clear of the sign flips at 0, pi/2 and pi
    CENTER = "center"
    EDGE = "edge"


@dataclass(frozen=True, eq=False)
class AnglePair:
    alpha: RotorAngles
    beta: RotorAngles

    def __post_init__(self) -> None:
        if self.alpha.order != self.beta.order:
            raise OrderMismatchError(
                f"Cannot pair rotors of order {self.alpha.order} and {self.beta.order}"
            )

    @classmethod
    def of(cls, alpha: ArrayLike, beta: ArrayLike) -> AnglePair:
        return cls(RotorAngles(np.asarray(alpha)), RotorAngles(np.asarray(beta)))

    @property
    def order(self) -> int:
        return self.alpha.order


def rotor_inner_array(alphas: ArrayLike, betas: ArrayLike) -> FloatArray:
    # cos of |alpha - beta| keeps the result exactly symmetric in the pair
    delta = np.abs(np.asarray(alphas, dtype=np.float64) - np.asarray(betas, dtype=np.float64))
    return np.prod(np.cos(delta), axis=-1)


def difference_array(alphas: ArrayLike, betas: ArrayLike) -> FloatArray:
    """
    Vectorized difference function over stacks of angle vectors (last axis).
    """
    alphas = np.asarray(alphas, dtype=np.float64)
    betas = np.asarray(betas, dtype=np.float64)
    projected = np.sum(project_array(alphas) * project_array(betas), axis=-1)
    values = np.abs(rotor_inner_array(alphas, betas) - projected)
    # a rotor paired with itself is invariant, rounding in |P|^2 aside
    return np.where(np.all(alphas == betas, axis=-1), 0.0, values)


def closed_form_difference_n2_array(alphas: ArrayLike, betas: ArrayLike) -> FloatArray:
    alphas = np.asarray(alphas, dtype=np.float64)
    betas = np.asarray(betas, dtype=np.float64)
    signs = half_circle_sign(alphas[..., 0]) * half_circle_sign(betas[..., 0])
    sines = np.sin(alphas[..., 1]) * np.sin(betas[..., 1])
    return np.abs(sines * (np.cos(alphas[..., 0] - betas[..., 0]) - signs))


def invariance_condition_n2_array(
    alphas: ArrayLike, betas: ArrayLike, tol: float = DEFAULT_TOLERANCE
) -> np.ndarray:
    alphas = np.asarray(alphas, dtype=np.float64)
    betas = np.asarray(betas, dtype=np.float64)
    signs = half_circle_sign(alphas[..., 0]) * half_circle_sign(betas[..., 0])
    sines = np.abs(np.sin(alphas[..., 1]) * np.sin(betas[..., 1]))
    cosines = np.abs(np.cos(alphas[..., 0] - betas[..., 0]) - signs)
    return (sines <= tol) | (cosines <= tol)


def rotor_inner(pair: AnglePair) -> float:
    return float(rotor_inner_array(pair.alpha.theta, pair.beta.theta))


def difference(pair: AnglePair) -> float:
    """
    |prod cos(alpha_k - beta_k) - <P(alpha), P(beta)>|, always in [0, 2].
    """
    return float(difference_array(pair.alpha.theta, pair.beta.theta))


def _require_order_two(pair: AnglePair) -> None:
    if pair.order != 2:
        raise OrderMismatchError(f"The closed form only exists for order 2, got {pair.order}")


def closed_form_difference_n2(pair: AnglePair) -> float:
    """
    The order 2 difference simplified to
    |sin(a_2) sin(b_2) (cos(a_1 - b_1) - (-1)^(floor(a_1 / pi) + floor(b_1 / pi)))|.
    """
    _require_order_two(pair)
    return float(closed_form_difference_n2_array(pair.alpha.theta, pair.beta.theta))


def invariance_condition_n2(pair: AnglePair, tol: float = DEFAULT_TOLERANCE) -> bool:
    """
    Either factor of the order 2 closed form vanishes.
    """
    _require_order_two(pair)
    return bool(invariance_condition_n2_array(pair.alpha.theta, pair.beta.theta, tol))


def is_invariant_pair(pair: AnglePair, tol: float = DEFAULT_TOLERANCE) -> bool:
    return difference(pair) <= tol


def grid_axes(order: int, resolution: int, placement: GridPlacement) -> list[FloatArray]:
    """
    The sample values along each of the 2n axes (alpha first, then beta).
    """
    offset = 0.5 if placement is GridPlacement.CENTER else 0.0
    steps = (np.arange(resolution) + offset) / resolution
    widths = [TWO_PI] + [math.pi] * (order - 1)
    return [steps * width for width in widths] * 2


def iter_difference_grid(
    order: int,
    resolution: int,
    placement: GridPlacement = GridPlacement.CENTER,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> Iterator[tuple[FloatArray, FloatArray, FloatArray]]:
    """
    Evaluate the difference function over the full grid, one chunk at a time.

    Yields (alphas, betas, values) with the grid enumerated in row-major order,
    the last beta angle varying fastest.
    """
    axes = grid_axes(order, resolution, placement)
    shape = (resolution,) * (2 * order)
    total = resolution ** (2 * order)
    for start in range(0, total, chunk_size):
        digits = np.unravel_index(np.arange(start, min(start + chunk_size, total)), shape)
        points = np.stack([axis[d] for axis, d in zip(axes, digits, strict=True)], axis=-1)
        alphas, betas = points[:, :order], points[:, order:]
        yield alphas, betas, difference_array(alphas, betas)


@dataclass(frozen=True, eq=False)
class DifferenceScan:
    order: int
    resolution: int
    placement: GridPlacement
    tolerance: float
    evaluations: int
    minimum: float
    maximum: float
    invariant_count: int
    alphas: FloatArray | None = None
    betas: FloatArray | None = None
    values: FloatArray | None = None

    @property
    def invariant_fraction(self) -> float:
        return self.invariant_count / self.evaluations

    def results(self) -> Iterator[tuple[AnglePair, float]]:
        if self.alphas is None or self.betas is None or self.values is None:
            return
        for alpha, beta, value in zip(self.alphas, self.betas, self.values, strict=True):
            yield AnglePair.of(alpha, beta), float(value)

    def summary(self) -> dict[str, float | int | str]:
        return {
            "order": self.order,
            "resolution": self.resolution,
            "placement": str(self.placement),
            "tolerance": self.tolerance,
            "evaluations": self.evaluations,
            "min": self.minimum,
            "max": self.maximum,
            "invariant_count": self.invariant_count,
            "invariant_fraction": self.invariant_fraction,
        }


class ScanTally:
    """
    Running extremes and invariant count over chunks of difference values.
    """

    def __init__(
        self, order: int, resolution: int, placement: GridPlacement, tol: float
    ) -> None:
        self.order = order
        self.resolution = resolution
        self.placement = placement
        self.tolerance = tol
        self.evaluations = 0
        self.minimum = math.inf
        self.maximum = -math.inf
        self.invariant_count = 0

    def add(self, values: FloatArray) -> None:
        if values.size == 0:
            return
        self.evaluations += int(values.size)
        self.minimum = min(self.minimum, float(np.min(values)))
        self.maximum = max(self.maximum, float(np.max(values)))
        self.invariant_count += int(np.count_nonzero(values <= self.tolerance))

    def result(self) -> DifferenceScan:
        return DifferenceScan(
            order=self.order,
            resolution=self.resolution,
            placement=self.placement,
            tolerance=self.tolerance,
            evaluations=self.evaluations,
            minimum=self.minimum,
            maximum=self.maximum,
            invariant_count=self.invariant_count,
        )


def check_grid(order: int, resolution: int, max_evaluations: int) -> int:
    check_order(order)
    if resolution < 2:
        raise ConfigurationError(f"Grid resolution must be at least 2, got {resolution}")

    total = resolution ** (2 * order)
    if total > max_evaluations:
        raise GridTooLargeError(
            f"A resolution {resolution} grid at order {order} needs {total} evaluations, "
            f"the limit is {max_evaluations}"
        )
    return total


def scan_difference(
    order: int,
    resolution: int,
    tol: float = DEFAULT_TOLERANCE,
    placement: GridPlacement = GridPlacement.CENTER,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
    keep_results: bool = True,
) -> DifferenceScan:
    """
    Exhaustively evaluate the difference function over a grid of angle pairs.
    """
    total = check_grid(order, resolution, max_evaluations)
    _logger.info(f"Scanning {total} pairs at order {order}, resolution {resolution}")

    tally = ScanTally(order, resolution, placement, tol)
    chunks: list[tuple[FloatArray, FloatArray, FloatArray]] = []
    for alphas, betas, values in iter_difference_grid(order, resolution, placement):
        tally.add(values)
        if keep_results:
            chunks.append((alphas, betas, values))

    scan = tally.result()
    if not keep_results:
        return scan

    return replace(
        scan,
        alphas=np.concatenate([chunk[0] for chunk in chunks]),
        betas=np.concatenate([chunk[1] for chunk in chunks]),
        values=np.concatenate([chunk[2] for chunk in chunks]),
    )

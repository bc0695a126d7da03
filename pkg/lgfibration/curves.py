"""
Curves on S^3 constrained by theta_2 = a * theta_1, pushed through the fibration.

The projected curve is

    x' = cos(t) cos(a t),  y' = sin(t) cos(a t),  z' = (-1)^floor(t / pi) sin(a t)

and the plain polyspherical curve drops the sign on z. The XY trace of both is
the rose r = cos(a t). The sign flips at t = 0 and t = pi leave corners in z'.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from lgfibration.errors import ConfigurationError
from lgfibration.fibration import half_circle_sign
from lgfibration.multicomplex import TWO_PI, FloatArray

_logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 3600

# Samples this close to the origin don't belong to any petal.
PETAL_ZERO = 1e-9

# A second difference this many times the median marks a corner.
KINK_RATIO = 10.0


@dataclass(frozen=True)
class CurveSpec:
    a: int
    samples: int = DEFAULT_SAMPLES

    def __post_init__(self) -> None:
        if self.a < 1:
            raise ConfigurationError(f"The curve multiplier must be at least 1, got {self.a}")
        if self.samples < 2:
            raise ConfigurationError(f"A curve needs at least 2 samples, got {self.samples}")

    @property
    def step(self) -> float:
        return TWO_PI / self.samples


@dataclass(frozen=True, eq=False)
class CurveTable:
    spec: CurveSpec
    theta1: FloatArray
    projected: FloatArray
    plain: FloatArray


def sample_curve(spec: CurveSpec) -> CurveTable:
    theta = TWO_PI * np.arange(spec.samples) / spec.samples
    ring, height = np.cos(spec.a * theta), np.sin(spec.a * theta)
    x, y = np.cos(theta) * ring, np.sin(theta) * ring
    return CurveTable(
        spec=spec,
        theta1=theta,
        projected=np.stack([x, y, half_circle_sign(theta) * height], axis=-1),
        plain=np.stack([x, y, height], axis=-1),
    )


def _cyclic_runs(indices: np.ndarray, size: int) -> list[np.ndarray]:
    """
    Split sorted indices into runs of consecutive values, joining across the wrap.
    """
    if indices.size == 0:
        return []
    runs = np.split(indices, np.flatnonzero(np.diff(indices) > 1) + 1)
    if len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == size - 1:
        runs[0] = np.concatenate([runs.pop(), runs[0]])
    return runs


def _count_distinct(points: list[FloatArray], radius: float) -> int:
    distinct: list[FloatArray] = []
    for point in points:
        if all(np.linalg.norm(point - other) > radius for other in distinct):
            distinct.append(point)
    return len(distinct)


def count_petals(table: CurveTable) -> int:
    """
    Count the lobes of the XY trace.

    A lobe is a stretch of samples where the signed radius keeps one sign. For
    odd a the curve traces every lobe twice, so lobes are told apart by the
    position of their tips.
    """
    theta = table.theta1
    xy = table.projected[:, :2]
    radius = xy[:, 0] * np.cos(theta) + xy[:, 1] * np.sin(theta)

    kept = np.flatnonzero(np.abs(radius) > PETAL_ZERO)
    if kept.size == 0:
        return 0
    signs = np.sign(radius[kept])
    starts = np.flatnonzero(signs != np.roll(signs, 1))
    if starts.size == 0:
        starts = np.array([0])

    tips: list[FloatArray] = []
    for start, end in zip(starts, np.roll(starts, -1), strict=True):
        stop = end if end > start else end + kept.size
        lobe = kept[np.arange(start, stop) % kept.size]
        tips.append(xy[lobe[np.argmax(np.abs(radius[lobe]))]])

    return _count_distinct(tips, 4 * table.spec.step)


def count_kinks(table: CurveTable) -> int:
    """
    Count the points where the projected curve isn't differentiable.
    """
    z = table.projected[:, 2]
    jumps = np.abs(np.roll(z, -1) - 2 * z + np.roll(z, 1))
    threshold = KINK_RATIO * float(np.median(jumps))
    runs = _cyclic_runs(np.flatnonzero(jumps > threshold), z.size)

    corners = [table.projected[run[np.argmax(jumps[run])]] for run in runs]
    radius = 4 * table.spec.step * (table.spec.a + 1)
    count = _count_distinct(corners, radius)
    _logger.debug(f"a={table.spec.a}: {len(runs)} flagged runs, {count} distinct corners")
    return count


def expected_petals(a: int) -> int:
    return a if a % 2 else 2 * a


def expected_kinks(a: int) -> int:
    return 1 if a % 2 else 2


def curve_features(spec: CurveSpec) -> tuple[int, int]:
    """
    Sample the curve and return its (petal, kink) counts.
    """
    table = sample_curve(spec)
    return count_petals(table), count_kinks(table)


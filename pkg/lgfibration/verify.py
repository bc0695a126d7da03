"""
Randomized property suites behind the verify command.

Every suite runs once per order with its own generator seeded from
(seed, suite index, order), so a report only depends on the run configuration.
A suite passes when its largest deviation stays within min(nominal, tolerance),
suites that count failures use a nominal threshold of zero.
"""

import logging
import math
from collections.abc import Callable
from typing import NamedTuple

import numpy as np

from lgfibration.curves import CurveSpec, curve_features, expected_kinks, expected_petals
from lgfibration.errors import BaseFibrationError, KernelAmbiguityError
from lgfibration.fibration import (
    contract,
    invert_projection,
    mu,
    project,
    project_array,
    project_reduced_array,
    torus_embed,
    torus_invert,
)
from lgfibration.metrics import (
    GridPlacement,
    check_grid,
    closed_form_difference_n2_array,
    difference_array,
    invariance_condition_n2_array,
    iter_difference_grid,
    rotor_inner_array,
)
from lgfibration.multicomplex import (
    DEFAULT_TOLERANCE,
    FloatArray,
    RotorAngles,
    angle_difference,
    closed_form_expansion,
    rotor_coefficients,
    rotor_product,
)
from lgfibration.polysphere import (
    AngleDomain,
    SphereAngles,
    angle_domains,
    embed_array,
    hopf,
    hopf_polyspherical,
    theta_partition,
)
from lgfibration.records import Table
from lgfibration.utils import RunConfig

_logger = logging.getLogger(__name__)

IDENTITY_THRESHOLD = 1e-12
ROUND_TRIP_THRESHOLD = 1e-9

# Rotors closer than this to pi/2 are left out of round trips.
KERNEL_MARGIN = 1e-6

FREE_ANGLE_SAMPLES = 100

CURVE_MULTIPLIERS = range(1, 9)


class SuiteResult(NamedTuple):
    suite: str
    order: int
    samples: int
    max_deviation: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.threshold


type SuiteCheck = Callable[[int, np.random.Generator, RunConfig], tuple[int, float]]


class Suite(NamedTuple):
    name: str
    check: SuiteCheck
    nominal: float
    min_order: int
    max_order: int | None = None

    def orders(self, config: RunConfig) -> range:
        top = config.order if self.max_order is None else min(self.max_order, config.order)
        return range(self.min_order, top + 1)


def random_rotor_angles(
    rng: np.random.Generator, order: int, draws: int, margin: float = 0.0
) -> FloatArray:
    """
    Uniform canonical rotor angles, optionally kept away from the kernel.
    """
    theta = rng.uniform(0.0, math.pi, (draws, order))
    theta[:, 0] *= 2
    if margin > 0:
        near = np.abs(theta[:, 1:] - math.pi / 2) <= margin
        while np.any(near):
            theta[:, 1:][near] = rng.uniform(0.0, math.pi, int(np.count_nonzero(near)))
            near = np.abs(theta[:, 1:] - math.pi / 2) <= margin
    return theta


def random_sphere_angles(rng: np.random.Generator, order: int, draws: int) -> FloatArray:
    """
    Uniform sphere angles within their domains. Every eighth draw sits on the
    closed end of the top angle so the contraction has to fold it.
    """
    widths = np.array(
        [2 * math.pi if d is AngleDomain.FULL else math.pi for d in angle_domains(order)]
    )
    theta = rng.uniform(0.0, 1.0, (draws, widths.size)) * widths
    if order > 1:
        theta[::8, -1] = math.pi
    return theta


def _max(values: FloatArray | list[float]) -> float:
    return float(np.max(values)) if len(values) else 0.0


def _working_tolerance(config: RunConfig) -> float:
    # Inverse maps need at least the default slack, the configured tolerance
    # only tightens the pass thresholds.
    return max(config.tolerance, DEFAULT_TOLERANCE)


def _radii(config: RunConfig, order: int, rng: np.random.Generator) -> tuple[float, ...]:
    if config.radii is not None:
        return config.radii[: order - 1]
    return tuple(float(a) for a in rng.uniform(1.0, 3.0, order - 1))


def check_rotor_closed_form(order: int, rng: np.random.Generator, config: RunConfig):
    deviations = []
    for theta in random_rotor_angles(rng, order, config.draws):
        angles = RotorAngles(theta)
        delta = rotor_product(angles).coeffs - closed_form_expansion(angles).coeffs
        deviations.append(float(np.max(np.abs(delta))))
    return config.draws, _max(deviations)


def check_rotor_norm(order: int, rng: np.random.Generator, config: RunConfig):
    coeffs = rotor_coefficients(random_rotor_angles(rng, order, config.draws))
    return config.draws, _max(np.abs(np.linalg.norm(coeffs, axis=-1) - 1))


def check_inner_identity(order: int, rng: np.random.Generator, config: RunConfig):
    alphas = random_rotor_angles(rng, order, config.draws)
    betas = random_rotor_angles(rng, order, config.draws)
    dots = np.sum(rotor_coefficients(alphas) * rotor_coefficients(betas), axis=-1)
    return config.draws, _max(np.abs(dots - rotor_inner_array(alphas, betas)))


def check_embed_norm(order: int, rng: np.random.Generator, config: RunConfig):
    vectors = embed_array(random_sphere_angles(rng, order, config.draws), order)
    return config.draws, _max(np.abs(np.linalg.norm(vectors, axis=-1) - 1))


def check_partition(order: int, rng: np.random.Generator, config: RunConfig):
    partition = theta_partition(order)
    expected = [1 << (order - 1)] + [1 << (order - m) for m in range(2, order + 1)]
    sizes = [len(group) for group in partition.groups]
    return 1, float(sum(size != want for size, want in zip(sizes, expected, strict=True)))


def check_contraction(order: int, rng: np.random.Generator, config: RunConfig):
    partition = theta_partition(order)
    representatives = [index - 1 for index in partition.representatives]
    deviations = []
    for theta in random_sphere_angles(rng, order, config.draws):
        assigned = partition.spread(theta[representatives])
        rotor = rotor_product(contract(SphereAngles(theta), _working_tolerance(config)))
        deviations.append(float(np.max(np.abs(embed_array(assigned, order) - rotor.coeffs))))
    return config.draws, _max(deviations)


def check_projection_norm(order: int, rng: np.random.Generator, config: RunConfig):
    coords = project_array(random_rotor_angles(rng, order, config.draws))
    return config.draws, _max(np.abs(np.linalg.norm(coords, axis=-1) - 1))


def check_sign_reduction(order: int, rng: np.random.Generator, config: RunConfig):
    theta = random_rotor_angles(rng, order, config.draws)
    return config.draws, _max(np.abs(project_array(theta) - project_reduced_array(theta)))


def check_round_trip(order: int, rng: np.random.Generator, config: RunConfig):
    deviations = []
    for theta in random_rotor_angles(rng, order, config.draws, margin=KERNEL_MARGIN):
        angles = RotorAngles(theta)
        recovered = invert_projection(project(angles), _working_tolerance(config))
        deviations.append(float(np.max(angle_difference(recovered.theta, theta))))
    return config.draws, _max(deviations)


def check_kernel_rejection(order: int, rng: np.random.Generator, config: RunConfig):
    accepted = 0
    for theta in random_rotor_angles(rng, order, config.draws):
        theta[rng.integers(1, order)] = math.pi / 2
        try:
            invert_projection(project(RotorAngles(theta)), _working_tolerance(config))
        except KernelAmbiguityError:
            continue
        accepted += 1
    return config.draws, float(accepted)


def check_kernel_collapse(order: int, rng: np.random.Generator, config: RunConfig):
    bases = max(1, config.draws // FREE_ANGLE_SAMPLES)
    deviations = []
    for theta in random_rotor_angles(rng, order, bases):
        k = int(rng.integers(2, order + 1))
        theta[k - 1] = math.pi / 2
        variants = np.tile(theta, (FREE_ANGLE_SAMPLES, 1))
        variants[:, : k - 1] = random_rotor_angles(rng, k - 1, FREE_ANGLE_SAMPLES)
        # theta_1 keeps its half circle, it still sets the sign of the pole
        half = math.pi * math.floor(theta[0] / math.pi)
        variants[:, 0] = np.mod(variants[:, 0], math.pi) + half
        images = project_array(variants)
        deviations.append(float(np.max(np.abs(images - images[0]))))
    return bases * FREE_ANGLE_SAMPLES, _max(deviations)


def check_diagram(order: int, rng: np.random.Generator, config: RunConfig):
    deviations = []
    for theta in random_rotor_angles(rng, order, config.draws):
        angles = RotorAngles(theta)
        radii = _radii(config, order, rng)
        via_torus = mu(torus_embed(angles, radii), _working_tolerance(config))
        deviations.append(float(np.max(np.abs(project(angles).coords - via_torus.coords))))
    return config.draws, _max(deviations)


def check_torus_round_trip(order: int, rng: np.random.Generator, config: RunConfig):
    deviations = []
    for theta in random_rotor_angles(rng, order, config.draws):
        radii = _radii(config, order, rng)
        point = torus_embed(RotorAngles(theta), radii)
        recovered = torus_invert(point, _working_tolerance(config))
        deviations.append(float(np.max(angle_difference(recovered.theta, theta))))
    return config.draws, _max(deviations)


def check_difference_simplification(order: int, rng: np.random.Generator, config: RunConfig):
    alphas = random_rotor_angles(rng, order, config.draws)
    betas = random_rotor_angles(rng, order, config.draws)
    delta = difference_array(alphas, betas) - closed_form_difference_n2_array(alphas, betas)
    return config.draws, _max(np.abs(delta))


def check_difference_bounds(order: int, rng: np.random.Generator, config: RunConfig):
    values = difference_array(
        random_rotor_angles(rng, order, config.draws),
        random_rotor_angles(rng, order, config.draws),
    )
    return config.draws, _max(np.maximum(np.maximum(-values, values - 2), 0.0))


def check_difference_symmetry(order: int, rng: np.random.Generator, config: RunConfig):
    alphas = random_rotor_angles(rng, order, config.draws)
    betas = random_rotor_angles(rng, order, config.draws)
    asymmetry = np.abs(difference_array(alphas, betas) - difference_array(betas, alphas))
    return config.draws, _max(np.concatenate([asymmetry, difference_array(alphas, alphas)]))


def check_invariance_grid(order: int, rng: np.random.Generator, config: RunConfig):
    total = check_grid(order, config.resolution, config.max_evaluations)
    mismatches = 0
    for alphas, betas, values in iter_difference_grid(
        order, config.resolution, GridPlacement.CENTER
    ):
        condition = invariance_condition_n2_array(alphas, betas, config.tolerance)
        mismatches += int(np.count_nonzero(condition != (values <= config.tolerance)))
    return total, float(mismatches)


def check_hopf(order: int, rng: np.random.Generator, config: RunConfig):
    theta = random_sphere_angles(rng, 2, config.draws)
    deviations = []
    for angles, point in zip(theta, embed_array(theta, 2), strict=True):
        image = hopf(point, _working_tolerance(config))
        expected = hopf_polyspherical(*angles)
        deviations.append(float(np.max(np.abs(image - expected))))
        deviations.append(abs(float(np.linalg.norm(image)) - 1))
    return config.draws, _max(deviations)


def check_curve_features(order: int, rng: np.random.Generator, config: RunConfig):
    mismatches = 0
    for a in CURVE_MULTIPLIERS:
        petals, kinks = curve_features(CurveSpec(a))
        mismatches += (petals != expected_petals(a)) + (kinks != expected_kinks(a))
    return len(CURVE_MULTIPLIERS), float(mismatches)


SUITES = [
    Suite("rotor-closed-form", check_rotor_closed_form, IDENTITY_THRESHOLD, 1),
    Suite("rotor-norm", check_rotor_norm, IDENTITY_THRESHOLD, 1),
    Suite("inner-product-identity", check_inner_identity, IDENTITY_THRESHOLD, 1),
    Suite("embed-norm", check_embed_norm, IDENTITY_THRESHOLD, 1),
    Suite("theta-partition", check_partition, 0.0, 1),
    Suite("contraction-consistency", check_contraction, IDENTITY_THRESHOLD, 1),
    Suite("projection-norm", check_projection_norm, IDENTITY_THRESHOLD, 2),
    Suite("sign-reduction", check_sign_reduction, IDENTITY_THRESHOLD, 2),
    Suite("projection-round-trip", check_round_trip, ROUND_TRIP_THRESHOLD, 2),
    Suite("kernel-rejection", check_kernel_rejection, 0.0, 2),
    Suite("kernel-collapse", check_kernel_collapse, IDENTITY_THRESHOLD, 2),
    Suite("diagram-commutativity", check_diagram, IDENTITY_THRESHOLD, 2),
    Suite("torus-round-trip", check_torus_round_trip, ROUND_TRIP_THRESHOLD, 2),
    Suite("difference-simplification", check_difference_simplification, IDENTITY_THRESHOLD, 2, 2),
    Suite("difference-bounds", check_difference_bounds, IDENTITY_THRESHOLD, 2),
    Suite("difference-symmetry", check_difference_symmetry, 0.0, 2),
    Suite("invariance-grid", check_invariance_grid, 0.0, 2, 2),
    Suite("hopf-oracle", check_hopf, IDENTITY_THRESHOLD, 2, 2),
    Suite("curve-features", check_curve_features, 0.0, 2, 2),
]


def run_verification(config: RunConfig, suites: list[Suite] | None = None) -> list[SuiteResult]:
    results = []
    for index, suite in enumerate(suites or SUITES):
        threshold = min(suite.nominal, config.tolerance)
        for order in suite.orders(config):
            rng = np.random.default_rng([config.seed, index, order])
            try:
                samples, deviation = suite.check(order, rng, config)
            except BaseFibrationError as e:
                _logger.warning(f"{suite.name} (order {order}) raised {type(e).__name__}: {e}")
                samples, deviation = 0, math.inf
            result = SuiteResult(suite.name, order, samples, deviation, threshold)
            _logger.info(
                f"{suite.name} (order {order}): {'pass' if result.passed else 'FAIL'}, "
                f"max deviation {deviation:.3g} over {samples} samples"
            )
            results.append(result)
    return results


def verification_table(results: list[SuiteResult]) -> Table:
    return Table(
        fields=["suite", "order", "samples", "max_deviation", "threshold", "passed"],
        rows=[
            [r.suite, r.order, r.samples, r.max_deviation, r.threshold, r.passed]
            for r in results
        ],
        summary={
            "results": len(results),
            "failed": sum(not r.passed for r in results),
        },
    )

import logging
import sys
from collections.abc import Callable
from functools import wraps
from typing import IO, Any

import click
import numpy as np

from lgfibration.curves import DEFAULT_SAMPLES, CurveSpec, count_kinks, count_petals, sample_curve
from lgfibration.errors import (
    AngleDomainError,
    BaseFibrationError,
    InputError,
    KernelAmbiguityError,
    NonUnitInputError,
    OffSurfaceError,
    RecordParseError,
    VerificationFailure,
)
from lgfibration.fibration import contract, invert_projection, kernel_check, project
from lgfibration.metrics import (
    DEFAULT_MAX_EVALUATIONS,
    GridPlacement,
    ScanTally,
    check_grid,
    iter_difference_grid,
)
from lgfibration.multicomplex import DEFAULT_TOLERANCE, Multicomplex, RotorAngles, rotor_angles
from lgfibration.polysphere import SphereAngles, invert_embed_sphere
from lgfibration.records import Cell, Record, Table, TableWriter, parse_records, render_table
from lgfibration.utils import OutputFormat, RunConfig, smart_decode
from lgfibration.verify import run_verification, verification_table

_logger = logging.getLogger("lgfibration")

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def handle_errors(f: Callable[..., Any]) -> Callable[..., Any]:
    """
    Turn library errors into a message on stderr and the matching exit code.
    """

    @wraps(f)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return f(*args, **kwargs)
        except ValueError as e:
            return _fail(InputError(str(e)))
        except BaseFibrationError as e:
            return _fail(e)

    return wrapper


def _fail(e: BaseFibrationError) -> None:
    click.echo(f"{e.title}: {e}", err=True)
    if e.detail:
        _logger.debug(e.detail)
    sys.exit(e.exit_code)


def _parse_radii(
    ctx: click.Context, param: click.Parameter, value: str | None
) -> tuple[float, ...] | None:
    if value is None:
        return None
    try:
        return tuple(float(a) for a in value.split(","))
    except ValueError:
        raise click.BadParameter("expected comma separated numbers") from None


def order_option(f: Callable[..., Any]) -> Callable[..., Any]:
    return click.option("--order", "-n", type=int, default=2, show_default=True)(f)


def tolerance_option(f: Callable[..., Any]) -> Callable[..., Any]:
    return click.option("--tol", type=float, default=DEFAULT_TOLERANCE, show_default=True)(f)


def output_options(f: Callable[..., Any]) -> Callable[..., Any]:
    f = click.option(
        "--format",
        "output_format",
        type=click.Choice([fmt.value for fmt in OutputFormat]),
        default=OutputFormat.CSV.value,
        show_default=True,
    )(f)
    f = click.option("--output", "-o", default="-", help="Output path, - for stdout.")(f)
    return f


def read_records(stream: IO[bytes]) -> list[Record]:
    text, charset = smart_decode(stream.read())
    _logger.debug(f"Decoded input as {charset}")
    return parse_records(text)


def write_table(table: Table, config: RunConfig) -> None:
    with click.open_file(config.output, "w", encoding="utf-8") as fp:
        fp.write(render_table(table, config.output_format))


def _format_coords(values: np.ndarray) -> list[Cell]:
    return [float(value) for value in values]


@click.group()
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default="WARNING",
    show_default=True,
)
def cli(log_level: str) -> None:
    """
    Project, invert, and verify the LG fibration S^(2^n - 1) -> S^n.
    """
    if not logging.getLogger().handlers:
        logging.basicConfig(format=LOG_FORMAT, stream=sys.stderr)
    _logger.setLevel(log_level.upper())


@cli.command("project")
@click.argument("input", type=click.File("rb"), default="-")
@order_option
@tolerance_option
@click.option(
    "--coords",
    type=click.Choice(["sphere", "rotor"]),
    default="sphere",
    show_default=True,
    help="How rows of 2^n coordinates are read.",
)
@output_options
@handle_errors
def cmd_project(
    input: IO[bytes], order: int, tol: float, coords: str, output_format: str, output: str
) -> None:
    """
    Project records of 2^n - 1 sphere angles, or 2^n coordinates, onto S^n.
    """
    config = RunConfig(
        order=order, tolerance=tol, output_format=OutputFormat(output_format), output=output
    ).validate()

    angle_width = (1 << order) - 1
    rows: list[list[Cell]] = []
    for record in read_records(input):
        try:
            rotor = _project_input(record, order, angle_width, coords, tol)
        except InputError as e:
            if isinstance(e, RecordParseError):
                raise
            raise type(e)(f"line {record.line_number}: {e}") from e

        status = "kernel-proximate" if kernel_check(rotor, tol).is_kernel else "ok"
        rows.append([*_format_coords(project(rotor).coords), status])

    fields = [f"e{i}" for i in range(order + 1)] + ["status"]
    write_table(Table(fields, rows), config)


def _project_input(
    record: Record, order: int, angle_width: int, coords: str, tol: float
) -> RotorAngles:
    values = record.values
    if values.size == angle_width:
        angles = SphereAngles(values)
        violations = angles.domain_violations(tol)
        if violations:
            raise AngleDomainError(f"angles {violations} are outside of their domains")
        return contract(angles, tol)

    if values.size == angle_width + 1:
        if coords == "rotor":
            return rotor_angles(Multicomplex(order, values), tol)
        return contract(invert_embed_sphere(values, tol), tol)

    raise RecordParseError(
        f"expected {angle_width} angles or {angle_width + 1} coordinates "
        f"for order {order}, got {values.size} fields",
        record.line_number,
    )


@cli.command("invert")
@click.argument("input", type=click.File("rb"), default="-")
@order_option
@tolerance_option
@output_options
@handle_errors
def cmd_invert(input: IO[bytes], order: int, tol: float, output_format: str, output: str) -> None:
    """
    Recover rotor angles from records of n + 1 coordinates on S^n.
    """
    config = RunConfig(
        order=order, tolerance=tol, output_format=OutputFormat(output_format), output=output
    ).validate()

    rows: list[list[Cell]] = []
    for record in read_records(input):
        if record.values.size != order + 1:
            raise RecordParseError(
                f"expected {order + 1} coordinates for order {order}, "
                f"got {record.values.size} fields",
                record.line_number,
            )
        try:
            angles = invert_projection(record.values, tol)
        except KernelAmbiguityError:
            status = "kernel-ambiguous"
        except NonUnitInputError:
            status = "non-unit"
        except OffSurfaceError:
            status = "off-surface"
        else:
            rows.append([*_format_coords(angles.theta), "ok"])
            continue

        _logger.info(f"line {record.line_number}: {status}")
        rows.append([*([None] * order), status])

    fields = [f"theta{k}" for k in range(1, order + 1)] + ["status"]
    write_table(Table(fields, rows), config)


@cli.command("verify")
@order_option
@tolerance_option
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--draws", type=int, default=1000, show_default=True, help="Draws per suite.")
@click.option(
    "--resolution",
    type=int,
    default=8,
    show_default=True,
    help="Grid resolution of the invariance check.",
)
@click.option("--radii", callback=_parse_radii, help="Torus radius offsets, comma separated.")
@click.option("--max-evaluations", type=int, default=DEFAULT_MAX_EVALUATIONS)
@output_options
@handle_errors
def cmd_verify(
    order: int,
    tol: float,
    seed: int,
    draws: int,
    resolution: int,
    radii: tuple[float, ...] | None,
    max_evaluations: int,
    output_format: str,
    output: str,
) -> None:
    """
    Run the property suites for orders up to n and report their deviations.
    """
    config = RunConfig(
        order=order,
        tolerance=tol,
        seed=seed,
        resolution=resolution,
        output_format=OutputFormat(output_format),
        output=output,
        draws=draws,
        max_evaluations=max_evaluations,
        radii=radii,
    ).validate()

    results = run_verification(config)
    write_table(verification_table(results), config)

    failed = sorted({r.suite for r in results if not r.passed})
    if failed:
        raise VerificationFailure(f"{len(failed)} suite(s) failed: {', '.join(failed)}")


@cli.command("curve")
@click.option("--a", "a", type=int, default=1, show_default=True, help="theta_2 = a * theta_1")
@click.option("--samples", type=int, default=DEFAULT_SAMPLES, show_default=True)
@output_options
@handle_errors
def cmd_curve(a: int, samples: int, output_format: str, output: str) -> None:
    """
    Sample the order 2 curve theta_2 = a * theta_1, projected and plain.
    """
    config = RunConfig(output_format=OutputFormat(output_format), output=output).validate()
    table = sample_curve(CurveSpec(a, samples))

    columns = np.column_stack([table.theta1, table.projected, table.plain])
    summary: dict[str, Cell] = {
        "a": a,
        "samples": samples,
        "petals": count_petals(table),
        "kinks": count_kinks(table),
    }
    fields = ["theta1", "x_proj", "y_proj", "z_proj", "x", "y", "z"]
    rows = [_format_coords(row) for row in columns]
    write_table(Table(fields, rows, summary), config)


@cli.command("scan")
@order_option
@tolerance_option
@click.option("--resolution", type=int, default=8, show_default=True)
@click.option(
    "--placement",
    type=click.Choice([p.value for p in GridPlacement]),
    default=GridPlacement.CENTER.value,
    show_default=True,
)
@click.option("--max-evaluations", type=int, default=DEFAULT_MAX_EVALUATIONS, show_default=True)
@output_options
@handle_errors
def cmd_scan(
    order: int,
    tol: float,
    resolution: int,
    placement: str,
    max_evaluations: int,
    output_format: str,
    output: str,
) -> None:
    """
    Evaluate the difference function over a grid of rotor angle pairs.
    """
    config = RunConfig(
        order=order,
        tolerance=tol,
        resolution=resolution,
        output_format=OutputFormat(output_format),
        output=output,
        placement=GridPlacement(placement),
        max_evaluations=max_evaluations,
    ).validate()

    total = check_grid(config.order, config.resolution, config.max_evaluations)
    _logger.info(f"Scanning {total} pairs at order {order}, resolution {resolution}")

    fields = (
        [f"alpha{k}" for k in range(1, order + 1)]
        + [f"beta{k}" for k in range(1, order + 1)]
        + ["difference"]
    )
    tally = ScanTally(config.order, config.resolution, config.placement, config.tolerance)
    with click.open_file(config.output, "w", encoding="utf-8") as fp:
        writer = TableWriter(fp, fields, config.output_format)
        for alphas, betas, values in iter_difference_grid(
            config.order, config.resolution, config.placement
        ):
            tally.add(values)
            writer.write_rows(np.column_stack([alphas, betas, values]).tolist())
        writer.close(tally.result().summary())


def main() -> None:
    cli(auto_envvar_prefix="LGFIB")

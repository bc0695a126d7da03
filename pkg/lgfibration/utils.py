from enum import StrEnum
from typing import NamedTuple

import chardet

from lgfibration.errors import ConfigurationError, InvalidRadiiError
from lgfibration.fibration import check_radii
from lgfibration.metrics import DEFAULT_MAX_EVALUATIONS, GridPlacement
from lgfibration.multicomplex import DEFAULT_TOLERANCE, MAX_ORDER


class OutputFormat(StrEnum):
    CSV = "csv"
    JSON = "json"


class RunConfig(NamedTuple):
    order: int = 2
    tolerance: float = DEFAULT_TOLERANCE
    seed: int = 0
    resolution: int = 8
    output_format: OutputFormat = OutputFormat.CSV
    output: str = "-"
    draws: int = 1000
    placement: GridPlacement = GridPlacement.CENTER
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS
    radii: tuple[float, ...] | None = None

    def validate(self) -> "RunConfig":
        if not self.tolerance > 0:
            raise ConfigurationError(f"Tolerance must be positive, got {self.tolerance}")
        if not 1 <= self.order <= MAX_ORDER:
            raise ConfigurationError(f"Order must be between 1 and {MAX_ORDER}, got {self.order}")
        if self.resolution < 2:
            raise ConfigurationError(f"Resolution must be at least 2, got {self.resolution}")
        if self.draws < 1:
            raise ConfigurationError(f"Draw count must be at least 1, got {self.draws}")
        if self.max_evaluations < 1:
            raise ConfigurationError("The evaluation limit must be at least 1")
        if self.seed < 0:
            raise ConfigurationError(f"Seed must be non-negative, got {self.seed}")
        if self.radii is not None:
            if len(self.radii) < self.order - 1:
                raise InvalidRadiiError(
                    f"Order {self.order} needs {self.order - 1} radii, got {len(self.radii)}"
                )
            check_radii(self.radii[: self.order - 1], self.order)
        return self


def smart_decode(
    data: bytes,
    charset: str | None = None,
    errors: str = "replace",
    default_charset: str = "UTF-8",
) -> tuple[str, str]:
    """
    Decode an input record file. Without an explicit charset UTF-8 is tried
    first, then whatever chardet is confident about.
    """
    if charset:
        detected_charset = charset
    else:
        try:
            data.decode(default_charset)
        except UnicodeDecodeError:
            guess = chardet.detect(data)
            encoding = guess["encoding"] if guess["confidence"] > 0.5 else None
            detected_charset = encoding or default_charset
        else:
            detected_charset = default_charset

    text = data.decode(detected_charset, errors=errors)
    # A byte order mark would otherwise end up glued to the first field.
    return text.removeprefix("\ufeff"), detected_charset


def format_float(value: float) -> str:
    """
    Render a float with 17 significant digits, enough to round-trip exactly.
    """
    return f"{value:.17g}"

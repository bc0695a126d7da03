from typing import ClassVar


class BaseFibrationError(Exception):
    """
    Base class for errors raised by the library, carrying the exit code
    that the command line interface terminates with.
    """

    exit_code: ClassVar[int]
    title: ClassVar[str]

    @property
    def detail(self) -> str | None:
        """
        The underlying error that this exception was raised from, if any.
        """
        if self.__cause__ is None:
            return None
        if str(self.__cause__):
            return f"{type(self.__cause__).__name__}: {self.__cause__}"
        return type(self.__cause__).__name__


class InputError(BaseFibrationError):
    """
    The values handed to an operation were malformed or out of range.
    """

    exit_code = 2
    title = "Invalid Input"


class RecordParseError(InputError):
    """
    A line of an input record file could not be parsed.
    """

    title = "Unparseable Record"

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class OrderMismatchError(InputError):
    """
    Two operands belong to multicomplex rings of different order.
    """

    title = "Order Mismatch"


class AngleDomainError(InputError):
    """
    An angle index or value falls outside of the range its position allows.
    """

    title = "Angle Out Of Domain"


class NonUnitInputError(InputError):
    """
    A vector that should lie on a unit sphere does not.
    """

    title = "Non-Unit Input"


class KernelAmbiguityError(InputError):
    """
    The point lies in the image of the projection kernel, so its preimage
    is not unique.
    """

    title = "Kernel Ambiguity"


class OffSurfaceError(InputError):
    """
    No angle assignment reproduces the point within tolerance.
    """

    title = "Off Surface"


class OffManifoldError(InputError):
    """
    A coordinate vector is not on the manifold an inverse map was asked
    to unwind it from.
    """

    title = "Off Manifold"


class ConfigurationError(BaseFibrationError):
    """
    The run configuration is invalid.
    """

    exit_code = 3
    title = "Invalid Configuration"


class GridTooLargeError(ConfigurationError):
    """
    A difference scan would exceed the configured evaluation cap.
    """

    title = "Grid Too Large"


class InvalidRadiiError(ConfigurationError):
    """
    Torus radius offsets are missing, too many, or below one.
    """

    title = "Invalid Radii"


class VerificationFailure(BaseFibrationError):
    """
    One or more verification suites exceeded their threshold.
    """

    exit_code = 1
    title = "Verification Failed"

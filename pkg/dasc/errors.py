"""Exception hierarchy shared by every dasc module.

Each exception class carries the exit code the command-line interface maps it to.
"""

from typing import Optional, Tuple


class DascError(Exception):
    """Base class for all errors raised by dasc"""

    exit_code: int = 5


class ParameterError(DascError, ValueError):
    """A parameter is outside its valid range"""

    exit_code = 3


class DimensionError(DascError, ValueError):
    """Arrays that must agree in shape do not"""

    exit_code = 3


class FormatError(DascError, ValueError):
    """A file or configuration text is malformed"""

    exit_code = 3


class ImageIOError(DascError, OSError):
    """A file could not be read or written"""

    exit_code = 2


class DegenerateDataError(DascError, ValueError):
    """Input data cannot support the requested computation (e.g. a single-class training set)"""

    exit_code = 4


class UndefinedMetricError(DascError, ValueError):
    """A metric has an empty normalizer"""

    exit_code = 4


class InternalError(DascError, RuntimeError):
    """A numerical invariant was violated during computation"""

    exit_code = 5

    def __init__(self, message: str, location: Optional[Tuple[int, int]] = None):
        if location is not None:
            message = f"{message} at pixel (x={location[0]}, y={location[1]})"
        super().__init__(message)
        self.location = location

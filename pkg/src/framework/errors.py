"""
Exception hierarchy for dentfit.

Every failure raised by the services derives from `DentFitError`, so the CLI
can map it to exit code 1 with a readable message.
"""

from typing import Optional


class DentFitError(Exception):
    """Base class for all dentfit errors."""


class DomainError(DentFitError, ValueError):
    """An argument lies outside the domain of a model function."""


class ParseError(DentFitError):
    """
    A point cloud or grid file could not be parsed.

    Attributes:
        line (int | None): 1-based line number of the offending input, if known.
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InsufficientDataError(DentFitError):
    """Fewer points than an operation needs."""


class UnsupportedFormatError(DentFitError):
    """
    Input uses a format dentfit does not read.

    Attributes:
        format (str): The detected format name (e.g. `binary_little_endian`).
    """

    def __init__(self, message: str, format: str):
        self.format = format
        super().__init__(message)


class SchemaError(DentFitError):
    """Input is well-formed but lacks a required element or property."""


class DegenerateGeometryError(DentFitError):
    """Points do not span a plane (coincident or collinear)."""


class RobustFitFailedError(DentFitError):
    """RANSAC found no plane supported by at least half of the points."""


class DegenerateSegmentError(DentFitError):
    """A segment carries no depression to fit."""


class ResourceLimitError(DentFitError):
    """A requested grid exceeds the configured cell cap."""


class EmptyFieldError(DentFitError):
    """A height field or residual set has no usable cells."""

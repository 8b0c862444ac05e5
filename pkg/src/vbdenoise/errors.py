"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 2,
I/O and codec problems with 3, numerical failures with 4.
"""


class VbdenoiseError(Exception):
    """Base class for all package errors."""


class ConfigurationError(VbdenoiseError):
    """Invalid parameter value or inconsistent configuration."""


class DomainError(VbdenoiseError):
    """Input data outside the domain an operation requires."""


class UnsupportedResolutionError(VbdenoiseError):
    """Predictor cannot operate at the requested image resolution."""


class CodecError(VbdenoiseError):
    """Unsupported or malformed image file."""


class WeightsFormatError(VbdenoiseError):
    """Malformed weights container (bad magic, version, checksum, shape...)."""


class GridRangeError(VbdenoiseError):
    """Quadrature grid too small: posterior mass leaks past the boundary."""

    def __init__(self, message, suggested_x_range=None, suggested_phi_range=None):
        super().__init__(message)
        self.suggested_x_range = suggested_x_range
        self.suggested_phi_range = suggested_phi_range


class NumericalError(VbdenoiseError):
    """Non-finite values or other numerical breakdown during computation."""

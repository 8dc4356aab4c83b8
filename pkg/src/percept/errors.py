"""Error taxonomy shared by the library, the CLI, and the HTTP service.

Exit-code mapping for the CLI: usage errors exit 1, data/validation errors
exit 2, numerical failures exit 3.
"""


class PerceptError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 2


class UsageError(PerceptError):
    """Bad invocation: unknown flags, missing arguments, malformed options."""

    exit_code = 1


class DataError(PerceptError):
    """Invalid input data: bad file formats, mismatched shapes, failed preconditions."""

    exit_code = 2


class NumericalError(PerceptError):
    """Numerical failure: eigendecomposition breakdown, non-PSD covariance, etc."""

    exit_code = 3

"""Exception types shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, data errors
exit 2, numerical failures exit 3.
"""


class CovridgeError(Exception):
    """Base class for every error raised by this package."""


class UsageError(CovridgeError):
    """Caller misuse: bad arguments, mismatched shapes, unknown names."""


class DataError(CovridgeError):
    """Input data that cannot be used: non-finite values, bad labels, malformed files."""


class DegenerateDataError(DataError):
    """Data without enough variation to estimate anything (for example all-constant rows)."""


class NumericalError(CovridgeError):
    """Numerical failure: singular systems, eigenvalues at or below the floor."""

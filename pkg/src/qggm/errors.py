"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: ValidationError -> 2,
NumericalError -> 3, ArtifactError (missing/unwritable files) -> 4.
"""


class QggmError(Exception):
    """Base class for package errors."""


class ValidationError(QggmError, ValueError):
    """Bad inputs: shape mismatches, non-finite entries, invalid configs."""


class NumericalError(QggmError, RuntimeError):
    """Numerical failure: divergence, non-convergence, degenerate systems."""


class ArtifactError(QggmError, OSError):
    """I/O level failure: missing upstream artifacts, refusing to overwrite."""

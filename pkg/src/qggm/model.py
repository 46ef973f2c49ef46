"""Data containers, the Gram matrix, and the column-wise pseudo-likelihood.

The model treats each variable's conditional regression on the others as an
independent Gaussian column score; the full pseudo-likelihood is the sum of
the p column scores.  The precision state is a positive fixed diagonal plus
a generally asymmetric off-diagonal matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = [
    "as_data_matrix",
    "gram",
    "PrecisionDraw",
    "log_pseudo_likelihood",
    "log_pseudo_likelihood_column",
]

LOG_2PI = math.log(2.0 * math.pi)


def as_data_matrix(Y) -> np.ndarray:
    """Validate and return Y as a float (n, p) array with finite entries."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[0] < 1 or Y.shape[1] < 1:
        raise ValidationError(f"data matrix must be 2-D non-empty, got shape {Y.shape}")
    if not np.all(np.isfinite(Y)):
        bad = np.argwhere(~np.isfinite(Y))[0]
        raise ValidationError(f"non-finite entry at row {bad[0]}, column {bad[1]}")
    return Y


def gram(Y) -> np.ndarray:
    """Cross-product matrix S with S[k, j] = sum_r Y[r, k] * Y[r, j].

    The upper triangle is computed once and mirrored, so the result is
    symmetric to exact equality.
    """
    Y = as_data_matrix(Y)
    S = Y.T @ Y
    S = np.triu(S) + np.triu(S, 1).T
    return S


@dataclass
class PrecisionDraw:
    """Precision-matrix state: fixed positive diagonal, free off-diagonals.

    ``offdiag[j, i]`` is the coefficient of variable j in column i's score;
    the matrix need not be symmetric.  Treated as read-only by operations in
    this module.
    """

    diag: np.ndarray
    offdiag: np.ndarray
    p: int = field(init=False)

    def __post_init__(self):
        self.diag = np.asarray(self.diag, dtype=np.float64)
        self.offdiag = np.asarray(self.offdiag, dtype=np.float64)
        p = self.diag.shape[0]
        if self.diag.ndim != 1 or p < 1:
            raise ValidationError("diag must be a non-empty 1-D array")
        if self.offdiag.shape != (p, p):
            raise ValidationError(
                f"offdiag shape {self.offdiag.shape} does not match diag length {p}"
            )
        if not np.all(np.isfinite(self.diag)) or not np.all(np.isfinite(self.offdiag)):
            raise ValidationError("precision entries must be finite")
        if np.any(self.diag <= 0):
            raise ValidationError("diagonal entries must be strictly positive")
        if np.any(np.diagonal(self.offdiag) != 0):
            raise ValidationError("offdiag must have an exactly zero diagonal")
        self.p = p

    @classmethod
    def zeros(cls, diag) -> "PrecisionDraw":
        diag = np.asarray(diag, dtype=np.float64)
        return cls(diag=diag, offdiag=np.zeros((diag.shape[0], diag.shape[0])))

    def matrix(self) -> np.ndarray:
        """Dense p x p matrix with the diagonal filled in."""
        M = self.offdiag.copy()
        np.fill_diagonal(M, self.diag)
        return M

    def copy(self) -> "PrecisionDraw":
        return PrecisionDraw(diag=self.diag.copy(), offdiag=self.offdiag.copy())


def _check_compatible(Y: np.ndarray, omega: PrecisionDraw):
    if Y.shape[1] != omega.p:
        raise ValidationError(
            f"column count mismatch: data has {Y.shape[1]}, precision has {omega.p}"
        )


def log_pseudo_likelihood_column(Y, omega: PrecisionDraw, j: int) -> float:
    """Column j's score: (n/2) log(w_jj / 2pi) - (w_jj / 2) ||Y_j + X_j||^2,

    where X_j = sum_{k != j} (w_kj / w_jj) Y_k.  Constant 2pi factors are
    included so values match external oracles exactly.
    """
    Y = as_data_matrix(Y)
    _check_compatible(Y, omega)
    if not 0 <= j < omega.p:
        raise ValidationError(f"column index {j} out of range for p={omega.p}")
    n = Y.shape[0]
    w_jj = omega.diag[j]
    resid = Y[:, j] + Y @ (omega.offdiag[:, j] / w_jj)
    return 0.5 * n * (math.log(w_jj) - LOG_2PI) - 0.5 * w_jj * float(resid @ resid)


def log_pseudo_likelihood(Y, omega: PrecisionDraw) -> float:
    """Sum of the p independent column scores."""
    Y = as_data_matrix(Y)
    _check_compatible(Y, omega)
    return sum(log_pseudo_likelihood_column(Y, omega, j) for j in range(omega.p))

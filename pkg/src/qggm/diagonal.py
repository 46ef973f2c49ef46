"""Plug-in diagonal estimation via per-column lasso residual variance.

Each variable is regressed on the others by an l1-penalized least-squares
fit; the inverse of the degrees-of-freedom-adjusted residual mean square
estimates the conditional precision (1 / conditional variance).  No
intercept is fit and predictors are not standardized: the generative model
is mean zero with unit-scale columns, and standardizing would change the
penalty grid anchor lambda_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NumericalError, ValidationError
from .model import as_data_matrix
from .rng import RngStream

__all__ = ["LassoFit", "lasso_cd", "DiagonalEstimate", "estimate_diagonal"]

CD_TOL = 1e-7
# Fold fits only rank lambdas, so they run at a looser tolerance; the final
# returned fit uses CD_TOL and is the one whose KKT certificate matters.
CV_TOL = 1e-5
CD_MAX_SWEEPS = 10_000
GRID_SIZE = 50
GRID_SPAN = 1e-3


@dataclass
class LassoFit:
    """One converged coordinate-descent fit."""

    beta: np.ndarray
    lam: float
    s_hat: int
    mse_df: float
    sweeps: int


def lasso_cd(X, y, lam: float) -> LassoFit:
    """Minimize (1/2n)||y - X beta||^2 + lam ||beta||_1 by cyclic descent.

    Converged when the largest coefficient change over a sweep drops below
    1e-7.  Soft-thresholding produces exact zeros, so s_hat counts them with
    no epsilon.
    """
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValidationError("X must be (n, k) and y length n")
    n = X.shape[0]
    if n < 2:
        raise ValidationError("need n >= 2 rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y)) and math.isfinite(lam)):
        raise ValidationError("inputs must be finite")
    if lam <= 0:
        raise ValidationError("lam must be positive")

    G = np.ascontiguousarray(X.T @ X / n)
    b = X.T @ y / n
    beta = np.zeros(X.shape[1])
    sweeps = _kernels.lasso_sweeps(G, b, lam, beta, CD_TOL, CD_MAX_SWEEPS)
    if sweeps < 0:
        raise NumericalError(f"coordinate descent did not converge in {CD_MAX_SWEEPS} sweeps")
    return _finish_fit(X, y, lam, beta, int(sweeps))


def _finish_fit(X, y, lam, beta, sweeps) -> LassoFit:
    n = X.shape[0]
    s_hat = int(np.count_nonzero(beta))
    rss = float(np.sum((y - X @ beta) ** 2))
    mse_df = rss / (n - s_hat) if n - s_hat > 0 else math.inf
    return LassoFit(beta=beta.copy(), lam=float(lam), s_hat=s_hat, mse_df=mse_df, sweeps=sweeps)


def kkt_violation(X, y, fit: LassoFit) -> float:
    """Largest stationarity violation of the fit (0 at an exact optimum).

    Inactive coordinates need |X_j'r| / n <= lam; active ones need
    X_j'r / n = lam * sign(beta_j).
    """
    n = X.shape[0]
    grad = X.T @ (y - X @ fit.beta) / n
    active = fit.beta != 0
    viol_inactive = np.maximum(np.abs(grad[~active]) - fit.lam, 0.0)
    viol_active = np.abs(grad[active] - fit.lam * np.sign(fit.beta[active]))
    worst = 0.0
    if viol_inactive.size:
        worst = max(worst, float(viol_inactive.max()))
    if viol_active.size:
        worst = max(worst, float(viol_active.max()))
    return worst


@dataclass
class DiagonalEstimate:
    """Per-column plug-in precisions with selection bookkeeping."""

    omega: np.ndarray
    lam: np.ndarray
    s_hat: np.ndarray
    flagged: tuple

    def to_dict(self) -> dict:
        return {
            "omega": self.omega.tolist(),
            "lambda": self.lam.tolist(),
            "s_hat": self.s_hat.tolist(),
            "flagged_columns": list(self.flagged),
        }


def _lambda_grid(lam_max: float) -> np.ndarray:
    return np.geomspace(lam_max, GRID_SPAN * lam_max, GRID_SIZE)


def _fold_slices(n: int, folds: int, stream: RngStream):
    perm = stream.permutation(n)
    sizes = np.full(folds, n // folds)
    sizes[: n % folds] += 1
    out = []
    start = 0
    for size in sizes:
        out.append(perm[start : start + size])
        start += size
    return out


def _estimate_column(Y: np.ndarray, i: int, folds: int, seed: int):
    n = Y.shape[0]
    X = np.ascontiguousarray(np.delete(Y, i, axis=1))
    y = Y[:, i]
    lam_max = float(np.max(np.abs(X.T @ y)) / n)
    if lam_max <= 0:  # y orthogonal to every predictor; null fit
        lam_max = 1.0
    grid = _lambda_grid(lam_max)

    cv_sse = np.zeros(GRID_SIZE)
    fold_idx = _fold_slices(n, folds, RngStream(seed, i))
    for held in fold_idx:
        mask = np.ones(n, dtype=bool)
        mask[held] = False
        Xtr, ytr = X[mask], y[mask]
        Gtr = np.ascontiguousarray(Xtr.T @ Xtr / Xtr.shape[0])
        btr = Xtr.T @ ytr / Xtr.shape[0]
        betas, fail = _kernels.lasso_path(Gtr, btr, grid, CV_TOL, CD_MAX_SWEEPS)
        if fail >= 0:
            raise NumericalError(
                f"coordinate descent did not converge (column {i}, lambda index {fail})"
            )
        resid = y[held][None, :] - betas @ X[held].T
        cv_sse += np.sum(resid**2, axis=1)

    best = int(np.argmin(cv_sse / n))
    fit = lasso_cd(X, y, float(grid[best]))
    fallback = False
    if not math.isfinite(fit.mse_df) or fit.mse_df <= 0:
        fit = lasso_cd(X, y, float(grid[0]))
        fallback = True
        if not math.isfinite(fit.mse_df) or fit.mse_df <= 0:
            raise NumericalError(f"degenerate residual variance for column {i}")
    return 1.0 / fit.mse_df, fit.lam, fit.s_hat, fallback


def estimate_diagonal(Y, folds: int = 5, seed: int = 0, jobs: int = 1) -> DiagonalEstimate:
    """Plug-in omega_ii for every column by cross-validated lasso.

    For column i, lambda minimizes held-out MSE over a 50-point log grid
    from lambda_max down to 1e-3 * lambda_max; then
    omega_ii = ((1/(n - s_hat)) * ||y - X beta||^2)^{-1}.  Columns whose
    selected fit saturates (n - s_hat <= 0) fall back to the lambda_max fit
    and are flagged.  Columns are independent, so jobs > 1 fans them out over
    a thread pool (the descent kernel releases the GIL); results do not
    depend on jobs.
    """
    Y = as_data_matrix(Y)
    n, p = Y.shape
    if p < 2:
        raise ValidationError("need at least two columns")
    if folds < 2 or folds > n:
        raise ValidationError(f"folds must lie in [2, n], got {folds}")

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda i: _estimate_column(Y, i, folds, seed), range(p)))
    else:
        results = [_estimate_column(Y, i, folds, seed) for i in range(p)]

    omega = np.array([r[0] for r in results])
    lam_sel = np.array([r[1] for r in results])
    s_sel = np.array([r[2] for r in results], dtype=np.int64)
    flagged = tuple(i for i, r in enumerate(results) if r[3])
    return DiagonalEstimate(omega=omega, lam=lam_sel, s_hat=s_sel, flagged=flagged)

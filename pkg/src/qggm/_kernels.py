"""Compiled inner loops (numba when available, plain Python otherwise).

Only the hot O(p^3)-per-sweep pieces live here: the sequential column
redraw of the precision sampler and the lasso coordinate-descent sweep.
The same source runs undecorated if numba is missing, so results do not
depend on the JIT being present, only the speed does.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def _update_column_impl(offdiag, diag, S, lam2, tau2, z, i):
    """Redraw column i of offdiag in place (systematic scan over rows).

    z holds the p-1 standard normal innovations in increasing-row order.
    Returns -1 on success, or i*p + j flagging the first non-finite
    conditional encountered.
    """
    p = offdiag.shape[0]
    oii = diag[i]
    col = offdiag[:, i].copy()
    col[i] = oii
    # u[j] = sum_k col[k] * S[k, j]; kept current as entries of col change
    u = np.dot(S, col)
    zi = 0
    for j in range(p):
        if j == i:
            continue
        old = offdiag[j, i]
        prec = S[j, j] / oii + 1.0 / (tau2 * lam2[j, i])
        var = 1.0 / prec
        mean = -((u[j] - old * S[j, j]) / oii) * var
        if not (math.isfinite(mean) and math.isfinite(var)):
            return i * p + j
        new = mean + math.sqrt(var) * z[zi]
        zi += 1
        offdiag[j, i] = new
        d = new - old
        for jj in range(p):
            u[jj] += d * S[j, jj]
    return -1


if HAVE_NUMBA:
    update_column = njit(cache=True, nogil=True)(_update_column_impl)
else:
    update_column = _update_column_impl


def _sweep_impl(offdiag, diag, S, lam2, tau2, Z):
    """One systematic sweep over all columns; Z[i] feeds column i."""
    p = offdiag.shape[0]
    for i in range(p):
        code = update_column(offdiag, diag, S, lam2, tau2, Z[i], i)
        if code >= 0:
            return code
    return -1


def _sweep_parallel_impl(offdiag, diag, S, lam2, tau2, Z):
    """Same sweep with columns dispatched in parallel.

    Column i's conditional depends only on column i and the fixed globals,
    so the result is identical to the sequential sweep.
    """
    p = offdiag.shape[0]
    codes = np.empty(p, dtype=np.int64)
    for i in prange(p):
        codes[i] = update_column(offdiag, diag, S, lam2, tau2, Z[i], i)
    worst = -1
    for i in range(p):
        if codes[i] > worst:
            worst = codes[i]
    return worst


def _lasso_sweeps_impl(G, b, lam, beta, tol, max_sweeps):
    """Cyclic coordinate descent on (1/2n)||y - X beta||^2 + lam ||beta||_1.

    G = X'X / n and b = X'y / n.  beta is updated in place.  Returns the
    number of sweeps used, or -1 if max coefficient change stayed above tol
    for max_sweeps sweeps.
    """
    p = G.shape[0]
    for s in range(max_sweeps):
        delta = 0.0
        for j in range(p):
            gjj = G[j, j]
            old = beta[j]
            if gjj <= 0.0:
                new = 0.0
            else:
                rho = b[j] - np.dot(G[j], beta) + gjj * old
                if rho > lam:
                    new = (rho - lam) / gjj
                elif rho < -lam:
                    new = (rho + lam) / gjj
                else:
                    new = 0.0
            d = abs(new - old)
            if d > delta:
                delta = d
            beta[j] = new
        if delta < tol:
            return s + 1
    return -1


if HAVE_NUMBA:
    sweep = njit(cache=True, nogil=True)(_sweep_impl)
    sweep_parallel = njit(cache=True, nogil=True, parallel=True)(_sweep_parallel_impl)
    lasso_sweeps = njit(cache=True, nogil=True)(_lasso_sweeps_impl)
else:
    sweep = _sweep_impl
    sweep_parallel = _sweep_parallel_impl
    lasso_sweeps = _lasso_sweeps_impl


def _lasso_path_impl(G, b, lams, tol, max_sweeps):
    """Warm-started descent along a decreasing-lambda grid.

    Returns (betas, fail_index); fail_index is -1 when every grid point
    converged, else the index of the first failure.
    """
    L = lams.shape[0]
    p = G.shape[0]
    betas = np.zeros((L, p))
    beta = np.zeros(p)
    for k in range(L):
        status = lasso_sweeps(G, b, lams[k], beta, tol, max_sweeps)
        if status < 0:
            return betas, k
        betas[k] = beta
    return betas, -1


if HAVE_NUMBA:
    lasso_path = njit(cache=True, nogil=True)(_lasso_path_impl)
else:
    lasso_path = _lasso_path_impl

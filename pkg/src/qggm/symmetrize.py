"""Projection of an asymmetric estimate onto symmetric matrices.

The projection minimizes the max-absolute-column-sum operator norm of the
correction.  Exact mode states the problem as a linear program (symmetric
entries free, one slack per ordered pair, one scalar bounding every column
sum) and solves it with the internal simplex; heuristic mode keeps, for each
pair, whichever of the two opposing entries is smaller in magnitude, which
preserves near-zero sparsity and is O(p^2).  Auto picks exact up to p = 30.

Diagonal entries pass through unchanged in both modes; they are already
symmetric coordinates and moving them cannot reduce the objective.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError, ValidationError
from .lp import LpProblem, solve_lp

__all__ = [
    "EXACT_MAX_P",
    "operator_l1_norm",
    "spectral_norm",
    "symmetrize_l1",
    "resolve_symmetrize_mode",
]

EXACT_MAX_P = 30


def _as_square(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError("matrix entries must be finite")
    return A


def operator_l1_norm(A) -> float:
    """Maximum absolute column sum (the 1->1 induced operator norm)."""
    A = _as_square(A)
    return float(np.max(np.sum(np.abs(A), axis=0)))


def spectral_norm(A, rel_tol: float = 1e-8, max_iter: int = 10_000) -> float:
    """Largest singular value by power iteration on A'A."""
    A = _as_square(A)
    p = A.shape[0]
    x = np.ones(p) / np.sqrt(p)
    prev = 0.0
    for _ in range(max_iter):
        y = A.T @ (A @ x)
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            return 0.0
        x = y / ny
        sigma = float(np.sqrt(ny))
        if abs(sigma - prev) <= rel_tol * max(sigma, 1e-300):
            return sigma
        prev = sigma
    raise NumericalError("power iteration did not converge")


def resolve_symmetrize_mode(p: int, mode: str) -> str:
    if mode not in ("exact", "heuristic", "auto"):
        raise ValidationError(f"mode must be exact/heuristic/auto, got {mode!r}")
    if mode == "auto":
        return "exact" if p <= EXACT_MAX_P else "heuristic"
    return mode


def _symmetrize_heuristic(A: np.ndarray) -> np.ndarray:
    p = A.shape[0]
    out = A.copy()
    iu, ju = np.triu_indices(p, k=1)
    up = A[iu, ju]
    lo = A[ju, iu]
    # ties resolve to the (i, j), i < j entry
    pick = np.where(np.abs(up) <= np.abs(lo), up, lo)
    out[iu, ju] = pick
    out[ju, iu] = pick
    return out


def _symmetrize_exact(A: np.ndarray) -> np.ndarray:
    p = A.shape[0]
    iu, ju = np.triu_indices(p, k=1)
    n_pairs = iu.size           # free symmetric unknowns x_ij, i < j
    n_ord = p * (p - 1)         # slacks t_ij, one per ordered pair
    nvar = n_pairs + n_ord + 1  # + the column-sum bound  m

    pair_id = {}
    for k in range(n_pairs):
        pair_id[(int(iu[k]), int(ju[k]))] = k
    ordered = [(i, j) for i in range(p) for j in range(p) if i != j]
    t_id = {pair: n_pairs + k for k, pair in enumerate(ordered)}
    m_id = nvar - 1

    rows = []
    rhs = []
    for (i, j) in ordered:
        x = pair_id[(min(i, j), max(i, j))]
        t = t_id[(i, j)]
        target = A[i, j]
        row = np.zeros(nvar)
        row[x] = 1.0
        row[t] = -1.0
        rows.append(row)
        rhs.append(target)
        row = np.zeros(nvar)
        row[x] = -1.0
        row[t] = -1.0
        rows.append(row)
        rhs.append(-target)
    for j in range(p):
        row = np.zeros(nvar)
        for i in range(p):
            if i != j:
                row[t_id[(i, j)]] = 1.0
        row[m_id] = -1.0
        rows.append(row)
        rhs.append(0.0)

    c = np.zeros(nvar)
    c[m_id] = 1.0
    bounds = tuple(
        [(None, None)] * n_pairs + [(0, None)] * n_ord + [(0, None)]
    )
    x, _ = solve_lp(LpProblem(objective=c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds))

    out = A.copy()
    out[iu, ju] = x[:n_pairs]
    out[ju, iu] = x[:n_pairs]
    return out


def symmetrize_l1(omega_bar, mode: str = "auto") -> np.ndarray:
    """Symmetric matrix minimizing the l1-operator-norm correction.

    Exact mode is the LP optimum; heuristic mode is the min-magnitude
    selection, an upper bound on the optimum that still satisfies the
    factor-2 triangle bound against any symmetric reference.  The output's
    upper triangle is mirrored, so it is exactly symmetric.
    """
    A = _as_square(omega_bar)
    mode = resolve_symmetrize_mode(A.shape[0], mode)
    if np.array_equal(A, A.T):  # already the optimum, objective zero
        return A.copy()
    out = _symmetrize_exact(A) if mode == "exact" else _symmetrize_heuristic(A)
    return np.triu(out) + np.triu(out, 1).T

"""Dense two-phase tableau simplex for the symmetrization program.

Internal use only: small problems (a few thousand variables at most), all
constraints of the form A x <= b with per-variable bounds restricted to
"nonnegative" or "free" (free variables are split internally).  Pivoting is
Dantzig's rule, falling back to Bland's anti-cycling rule after a run of
degenerate pivots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

__all__ = ["LpProblem", "solve_lp"]

_TOL = 1e-9


@dataclass(frozen=True)
class LpProblem:
    """minimize objective . x  subject to  A_ub x <= b_ub and bounds.

    bounds[k] is either (0, None) for a nonnegative variable or (None, None)
    for a free one; None bounds default to all-nonnegative.
    """

    objective: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    bounds: tuple | None = None

    def validated(self):
        c = np.asarray(self.objective, dtype=np.float64)
        A = np.asarray(self.A_ub, dtype=np.float64)
        b = np.asarray(self.b_ub, dtype=np.float64)
        if A.ndim != 2 or c.ndim != 1 or b.ndim != 1:
            raise ValidationError("objective/b_ub must be vectors, A_ub a matrix")
        m, n = A.shape
        if c.shape[0] != n or b.shape[0] != m:
            raise ValidationError("inconsistent LP dimensions")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValidationError("LP coefficients must be finite")
        bounds = self.bounds if self.bounds is not None else ((0, None),) * n
        if len(bounds) != n:
            raise ValidationError("one bound pair per variable required")
        for lo, hi in bounds:
            if hi is not None or lo not in (0, None):
                raise ValidationError("only (0, None) and (None, None) bounds supported")
        return c, A, b, tuple(bounds)


def _pivot(T, obj, basis, r, col):
    T[r] /= T[r, col]
    piv_row = T[r]
    for i in range(T.shape[0]):
        if i != r and T[i, col] != 0.0:
            T[i] -= T[i, col] * piv_row
    if obj[col] != 0.0:
        obj -= obj[col] * piv_row
    basis[r] = col


def _run_phase(T, obj, basis, allowed, max_pivots, bland_after):
    """Drive obj's reduced costs nonnegative over the allowed columns."""
    degenerate_run = 0
    bland = False
    for _ in range(max_pivots):
        red = obj[:-1]
        if bland:
            cand = np.where(allowed & (red < -_TOL))[0]
            if cand.size == 0:
                return
            col = int(cand[0])
        else:
            masked = np.where(allowed, red, np.inf)
            col = int(np.argmin(masked))
            if masked[col] >= -_TOL:
                return
        pos = T[:, col] > _TOL
        if not np.any(pos):
            raise NumericalError("LP is unbounded (internal error: impossible by construction)")
        ratios = np.where(pos, T[:, -1] / np.where(pos, T[:, col], 1.0), np.inf)
        best = np.min(ratios)
        ties = np.where(ratios <= best + _TOL)[0]
        # lowest basis index among ties keeps Bland's rule valid when engaged
        r = int(ties[np.argmin(np.asarray(basis)[ties])])
        if best <= _TOL:
            degenerate_run += 1
            if degenerate_run > bland_after:
                bland = True
        else:
            degenerate_run = 0
        _pivot(T, obj, basis, r, col)
    raise NumericalError("simplex cycling guard exceeded")


def solve_lp(problem: LpProblem):
    """Solve the LP; returns (x, objective_value)."""
    c, A, b, bounds = problem.validated()
    m, n = A.shape

    # Split free variables into positive/negative parts.
    free = [k for k, (lo, _) in enumerate(bounds) if lo is None]
    n_split = n + len(free)
    A2 = np.empty((m, n_split))
    c2 = np.empty(n_split)
    A2[:, :n] = A
    c2[:n] = c
    for extra, k in enumerate(free):
        A2[:, n + extra] = -A[:, k]
        c2[n + extra] = -c[k]

    # Equality form with slacks; negative rhs rows get artificials.
    rows_neg = b < 0
    A2 = np.where(rows_neg[:, None], -A2, A2)
    b2 = np.where(rows_neg, -b, b)
    n_art = int(np.count_nonzero(rows_neg))

    total = n_split + m + n_art
    T = np.zeros((m, total + 1))
    T[:, :n_split] = A2
    T[:, -1] = b2
    basis = [0] * m
    art_cols = []
    ai = 0
    for i in range(m):
        T[i, n_split + i] = -1.0 if rows_neg[i] else 1.0
        if rows_neg[i]:
            col = n_split + m + ai
            T[i, col] = 1.0
            art_cols.append(col)
            basis[i] = col
            ai += 1
        else:
            basis[i] = n_split + i

    max_pivots = max(2000, 200 * (m + total))
    bland_after = 2 * total

    if n_art:
        # Phase 1: minimize the artificial total.
        cc = np.zeros(total)
        cc[art_cols] = 1.0
        obj = np.empty(total + 1)
        cb = cc[basis]
        obj[:-1] = cc - cb @ T[:, :-1]
        obj[-1] = -float(cb @ T[:, -1])
        allowed = np.ones(total, dtype=bool)
        _run_phase(T, obj, basis, allowed, max_pivots, bland_after)
        if -obj[-1] > 1e-7:
            raise NumericalError("LP infeasible (internal error: impossible by construction)")
        # Pivot leftover artificials out of the basis, or drop dead rows.
        keep = np.ones(m, dtype=bool)
        art_set = set(art_cols)
        for i in range(m):
            if basis[i] in art_set:
                nz = np.where(np.abs(T[i, :n_split + m]) > _TOL)[0]
                if nz.size:
                    _pivot(T, obj, basis, i, int(nz[0]))
                else:
                    keep[i] = False
        T = T[keep]
        basis = [bc for bc, k in zip(basis, keep) if k]
        T = np.delete(T, art_cols, axis=1)

    total2 = T.shape[1] - 1
    cc = np.zeros(total2)
    cc[:n_split] = c2
    obj = np.empty(total2 + 1)
    cb = cc[basis]
    obj[:-1] = cc - cb @ T[:, :-1]
    obj[-1] = -float(cb @ T[:, -1])
    allowed = np.ones(total2, dtype=bool)
    _run_phase(T, obj, basis, allowed, max_pivots, bland_after)

    full = np.zeros(total2)
    for i, bc in enumerate(basis):
        full[bc] = T[i, -1]
    x = full[:n].copy()
    for extra, k in enumerate(free):
        x[k] -= full[n + extra]
    return x, float(c @ x)

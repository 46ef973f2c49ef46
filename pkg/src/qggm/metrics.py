"""Evaluation metrics, chain diagnostics, and reference contraction rates.

Edge selection follows the credible-interval rule: a pair (i, j) counts as
an edge when the equal-tailed interval of either orientation excludes zero
(the OR rule over the asymmetric draws).  An auxiliary thresholding rule
based on the concentration radius a_n is exposed for diagnostics only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ValidationError
from .gibbs import PosteriorSummary, equal_tailed_interval
from .rng import RngStream

__all__ = [
    "frobenius_error",
    "select_edges",
    "select_edges_threshold",
    "tpr_fpr",
    "roc_sweep",
    "default_roc_levels",
    "gelman_rubin",
    "contraction_rates",
    "monitored_scalars",
    "EvalReport",
]


def frobenius_error(est, truth) -> float:
    """Elementwise-l2 distance between two equally shaped matrices."""
    est = np.asarray(est, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if est.shape != truth.shape:
        raise ValidationError(f"shape mismatch: {est.shape} vs {truth.shape}")
    return float(np.linalg.norm(est - truth))


def _interval_stack(summary: PosteriorSummary, level: float):
    if level in summary.lower:
        return summary.lower[level], summary.upper[level]
    sorted_pool = np.sort(summary.samples, axis=0)
    return equal_tailed_interval(sorted_pool, level)


def select_edges(summary: PosteriorSummary, level: float) -> np.ndarray:
    """Symmetric boolean edge matrix from the OR rule at one credible level."""
    if not 0.0 < level < 1.0:
        raise ValidationError(f"level must lie in (0, 1), got {level}")
    lo, hi = _interval_stack(summary, level)
    excludes = (lo > 0.0) | (hi < 0.0)
    selected = excludes | excludes.T
    np.fill_diagonal(selected, False)
    return selected


def select_edges_threshold(summary: PosteriorSummary, a_n: float) -> np.ndarray:
    """Auxiliary rule: |posterior mean| > a_n in either orientation."""
    if a_n <= 0:
        raise ValidationError("a_n must be positive")
    big = np.abs(summary.mean) > a_n
    selected = big | big.T
    np.fill_diagonal(selected, False)
    return selected


def _support_bool(truth_support, p: int) -> np.ndarray:
    M = np.zeros((p, p), dtype=bool)
    arr = np.asarray(truth_support)
    if arr.dtype == bool and arr.shape == (p, p):
        M = np.triu(arr | arr.T, k=1)
        return M | M.T
    for i, j in truth_support:
        if not 0 <= i < p and 0 <= j < p:
            raise ValidationError(f"support pair ({i}, {j}) out of range")
        M[i, j] = M[j, i] = True
    np.fill_diagonal(M, False)
    return M


def tpr_fpr(selected: np.ndarray, truth_support, p: int):
    """(tpr, fpr) counted over upper-triangular pairs.

    tpr is nan (undefined) for an empty support; fpr is nan when every pair
    is a true edge.
    """
    selected = np.asarray(selected, dtype=bool)
    if selected.shape != (p, p):
        raise ValidationError("selected must be a p x p boolean matrix")
    if not np.array_equal(selected, selected.T):
        raise ValidationError("selected must be symmetric")
    support = _support_bool(truth_support, p)
    iu = np.triu_indices(p, k=1)
    sel = selected[iu]
    sup = support[iu]
    n_support = int(sup.sum())
    n_null = sup.size - n_support
    tpr = float(np.count_nonzero(sel & sup)) / n_support if n_support else math.nan
    fpr = float(np.count_nonzero(sel & ~sup)) / n_null if n_null else math.nan
    return tpr, fpr


def default_roc_levels(num: int = 200) -> np.ndarray:
    """Log-spaced credible levels from 1% to 99.99%."""
    return np.geomspace(0.01, 0.9999, num)


def roc_sweep(summary: PosteriorSummary, truth_support, levels=None):
    """[(level, fpr, tpr)] over increasingly wide credible intervals.

    Quantile nesting makes both rates non-increasing in the level.
    """
    if levels is None:
        levels = default_roc_levels()
    levels = np.asarray(levels, dtype=np.float64)
    if np.any(levels <= 0) or np.any(levels >= 1) or np.any(np.diff(levels) <= 0):
        raise ValidationError("levels must be strictly increasing within (0, 1)")
    p = summary.p
    sorted_pool = np.sort(summary.samples, axis=0)
    out = []
    for level in levels:
        lo, hi = equal_tailed_interval(sorted_pool, float(level))
        excludes = (lo > 0.0) | (hi < 0.0)
        selected = excludes | excludes.T
        np.fill_diagonal(selected, False)
        tpr, fpr = tpr_fpr(selected, truth_support, p)
        out.append((float(level), fpr, tpr))
    return out


def gelman_rubin(chains) -> float:
    """Potential scale reduction factor (classic form) for one scalar.

    chains: >= 2 equal-length post-burn-in series.  R-hat near 1 indicates
    mixing; the usual pass criterion is R-hat < 1.1.
    """
    arr = np.asarray(chains, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise ValidationError("need >= 2 chains of equal length")
    m = arr.shape[1]
    if m < 10:
        raise ValidationError("chains must have length >= 10")
    W = float(np.mean(np.var(arr, axis=1, ddof=1)))
    if W == 0.0:
        raise ValidationError("zero within-chain variance")
    b_over_m = float(np.var(np.mean(arr, axis=1), ddof=1))
    var_plus = (m - 1) / m * W + b_over_m
    return math.sqrt(var_plus / W)


def contraction_rates(p: int, n: int, support):
    """(epsilon_n, rate_spectral) reference quantities.

    s*_j counts each upper pair toward both endpoint columns; S* sums them
    over ordered pairs, d* is the max column count.  epsilon_n =
    sqrt(S* log p / n); rate_spectral = d* sqrt(log p / n).
    """
    if p < 2 or n < 1:
        raise ValidationError("need p >= 2 and n >= 1")
    s_col = np.zeros(p, dtype=np.int64)
    sup = _support_bool(support, p)
    s_col = sup.sum(axis=0)
    s_star = int(s_col.sum())
    d_star = int(s_col.max()) if p else 0
    logp = math.log(p)
    return math.sqrt(s_star * logp / n), d_star * math.sqrt(logp / n)


def monitored_scalars(summary: PosteriorSummary, seed: int = 0) -> dict:
    """Per-chain retained scalar series for convergence monitoring.

    Tracks the Frobenius norm of the draw, tau2, and five seeded
    off-diagonal entries; returns name -> (n_chains, n_kept) arrays.
    """
    p = summary.p
    out = {
        "omega_frob_norm": summary.kept_frob_norm,
        "tau2": summary.kept_tau2,
    }
    stream = RngStream(seed, 0)
    per_chain = summary.per_chain_samples()
    pairs = set()
    budget = min(5, p * (p - 1))
    while len(pairs) < budget:
        i = int(stream.integers(p))
        j = int(stream.integers(p))
        if i != j:
            pairs.add((i, j))
    for i, j in sorted(pairs):
        out[f"omega_{i}_{j}"] = per_chain[:, :, i, j]
    return out


@dataclass
class EvalReport:
    """Metrics and diagnostics for one fitted dataset."""

    frob_error: float
    spectral_error: float
    tpr: float
    fpr: float
    level: float
    epsilon_n: float
    rate_spectral: float
    roc: list | None = None
    gelman_rubin: dict | None = None
    tpr_defined: bool = field(default=True)

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.roc is not None:
            d["roc"] = [list(row) for row in self.roc]
        return d

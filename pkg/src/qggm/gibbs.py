"""Gibbs sampler for the horseshoe quasi-posterior over precision columns.

State per off-diagonal entry: the coefficient omega_ji, its local scale
lambda2_ji with auxiliary v_ji, plus one global scale tau2 with auxiliary
kappa.  One iteration runs, in order: every column's sequential normal
redraw, then the local-scale refresh, then the global-scale refresh (the
full conditionals are reciprocal-exponential / reciprocal-gamma draws).

The diagonal stays frozen for the whole chain (known or plugged in).  Given
tau2, columns are conditionally independent, so the column pass may run in
parallel without changing results; each column owns a persistent substream
keyed by its index, which also makes the pass order irrelevant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import NumericalError, ValidationError
from .model import PrecisionDraw, as_data_matrix, gram
from .rng import RngStream

__all__ = [
    "CLAMP_FLOOR",
    "CLAMP_CEILING",
    "HorseshoeState",
    "GibbsConfig",
    "PosteriorSummary",
    "omega_conditional_params",
    "update_omega_column",
    "update_local_scales",
    "update_global_scale",
    "run_chain",
    "credible_interval",
    "equal_tailed_interval",
]

# Latent scales are clamped here; reciprocal-exponential draws can overflow
# in finite precision and the truncated mass is negligible.
CLAMP_FLOOR = 1e-12
CLAMP_CEILING = 1e12

# Per-chain stream layout: columns take ids 0..p-1, then the three fixed roles.
_STREAM_LOCAL = 0
_STREAM_GLOBAL = 1
_STREAM_INIT = 2
_STREAMS_PER_CHAIN_EXTRA = 8


@dataclass
class HorseshoeState:
    """Latent scales of the augmented prior (off-diagonal entries only)."""

    lambda2: np.ndarray
    v: np.ndarray
    tau2: float
    kappa: float
    p: int = field(init=False)

    def __post_init__(self):
        self.lambda2 = np.asarray(self.lambda2, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        p = self.lambda2.shape[0]
        if self.lambda2.shape != (p, p) or self.v.shape != (p, p):
            raise ValidationError("lambda2 and v must be square matrices of equal size")
        off = ~np.eye(p, dtype=bool)
        for name, arr in (("lambda2", self.lambda2), ("v", self.v)):
            if np.any(np.diagonal(arr) != 0):
                raise ValidationError(f"{name} must have a zero diagonal")
            vals = arr[off]
            if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
                raise ValidationError(f"off-diagonal {name} must be positive and finite")
        for name, val in (("tau2", self.tau2), ("kappa", self.kappa)):
            if not (val > 0 and math.isfinite(val)):
                raise ValidationError(f"{name} must be positive and finite, got {val}")
        self.p = p

    @classmethod
    def initial(cls, p: int) -> "HorseshoeState":
        """Unit scales everywhere (the chain-0 start)."""
        m = np.ones((p, p))
        np.fill_diagonal(m, 0.0)
        return cls(lambda2=m.copy(), v=m.copy(), tau2=1.0, kappa=1.0)

    def copy(self) -> "HorseshoeState":
        return HorseshoeState(
            lambda2=self.lambda2.copy(), v=self.v.copy(), tau2=self.tau2, kappa=self.kappa
        )


@dataclass(frozen=True)
class GibbsConfig:
    """Chain-length bookkeeping and seeding."""

    n_iter: int = 6000
    burn_in: int = 1000
    thin: int = 10
    seed: int = 0
    n_chains: int = 1
    column_parallel: bool = False

    def __post_init__(self):
        if self.burn_in < 0 or self.burn_in >= self.n_iter:
            raise ValidationError("burn_in must satisfy 0 <= burn_in < n_iter")
        if self.thin < 1:
            raise ValidationError("thin must be >= 1")
        if self.n_chains < 1:
            raise ValidationError("n_chains must be >= 1")
        if self.n_kept < 2:
            raise ValidationError(
                f"config keeps {self.n_kept} samples; need at least 2 "
                "(floor((n_iter - burn_in) / thin))"
            )

    @property
    def n_kept(self) -> int:
        """Retained draws per chain."""
        return (self.n_iter - self.burn_in) // self.thin


@dataclass
class PosteriorSummary:
    """Retained draws and their elementwise summaries.

    samples stacks all chains (chain-major) as (n_chains * n_kept, p, p)
    matrices with the fixed diagonal filled in.  lower/upper map each
    requested credible level to equal-tailed quantile matrices.  frob_trace
    and tau2_trace cover every iteration per chain; kept_frob_norm and
    kept_tau2 are the per-chain retained scalar series used for convergence
    diagnostics.
    """

    mean: np.ndarray
    samples: np.ndarray
    lower: dict
    upper: dict
    frob_trace: np.ndarray
    tau2_trace: np.ndarray
    kept_frob_norm: np.ndarray
    kept_tau2: np.ndarray
    diag: np.ndarray
    levels: tuple
    ref_kind: str
    n_chains: int

    @property
    def p(self) -> int:
        return self.mean.shape[0]

    @property
    def n_kept_per_chain(self) -> int:
        return self.samples.shape[0] // self.n_chains

    def per_chain_samples(self) -> np.ndarray:
        """(n_chains, n_kept, p, p) view of the pooled stack."""
        return self.samples.reshape(self.n_chains, -1, self.p, self.p)


# ---------------------------------------------------------------------------
# Full-conditional updates
# ---------------------------------------------------------------------------

def omega_conditional_params(
    omega: PrecisionDraw, state: HorseshoeState, S: np.ndarray, i: int, j: int
):
    """Normal (mean, var) of omega_ji given everything else.

    var = 1 / (s_jj / w_ii + 1 / (tau2 lambda2_ji)); the mean couples the
    rest of column i through the Gram matrix, including the diagonal term
    w_ii * s_ij (the completed square of the column score).
    """
    if i == j:
        raise ValidationError("diagonal entries are fixed, no conditional exists")
    col = omega.offdiag[:, i].copy()
    col[i] = omega.diag[i]
    u_j = float(S[:, j] @ col)
    oii = omega.diag[i]
    prec = S[j, j] / oii + 1.0 / (state.tau2 * state.lambda2[j, i])
    var = 1.0 / prec
    mean = -((u_j - omega.offdiag[j, i] * S[j, j]) / oii) * var
    return mean, var


def update_omega_column(
    state: HorseshoeState, omega: PrecisionDraw, S: np.ndarray, i: int, stream: RngStream
) -> PrecisionDraw:
    """Redraw the off-diagonal entries of column i, rows in increasing order.

    Each row's draw conditions on the already-updated earlier rows of the
    same column; all other columns are untouched.
    """
    p = omega.p
    if not 0 <= i < p:
        raise ValidationError(f"column index {i} out of range for p={p}")
    offdiag = np.ascontiguousarray(omega.offdiag.copy())
    z = stream.standard_normal(p - 1)
    code = _kernels.update_column(
        offdiag, omega.diag, S, state.lambda2, state.tau2, z, i
    )
    if code >= 0:
        raise NumericalError(
            f"non-finite conditional mean at row {code % p}, column {code // p} "
            "(degenerate Gram matrix?)"
        )
    return PrecisionDraw(diag=omega.diag.copy(), offdiag=offdiag)


def _offdiag_index(p: int):
    rows, cols = np.where(~np.eye(p, dtype=bool))
    return rows, cols


def _local_scale_pass(lambda2, v, offdiag, tau2, stream, rows, cols):
    """In-place refresh of lambda2 then v on the off-diagonal positions."""
    om = offdiag[rows, cols]
    e1 = stream.standard_exponential(om.size)
    rate_lam = om * om / (2.0 * tau2) + 1.0 / v[rows, cols]
    lambda2[rows, cols] = np.clip(rate_lam / e1, CLAMP_FLOOR, CLAMP_CEILING)
    e2 = stream.standard_exponential(om.size)
    rate_v = 1.0 + 1.0 / lambda2[rows, cols]
    v[rows, cols] = np.clip(rate_v / e2, CLAMP_FLOOR, CLAMP_CEILING)


def _global_scale_pass(lambda2, kappa, offdiag, stream, rows, cols):
    """Fresh (tau2, kappa); the rate sums over all p(p-1) ordered pairs."""
    p = offdiag.shape[0]
    om = offdiag[rows, cols]
    shape = (p * (p - 1) + 1) / 2.0
    rate_tau = 1.0 / kappa + 0.5 * float(np.sum(om * om / lambda2[rows, cols]))
    g = float(stream.standard_gamma(shape))
    tau2 = float(np.clip(rate_tau / g, CLAMP_FLOOR, CLAMP_CEILING))
    e = float(stream.standard_exponential())
    kappa = float(np.clip((1.0 + 1.0 / tau2) / e, CLAMP_FLOOR, CLAMP_CEILING))
    return tau2, kappa


def update_local_scales(
    state: HorseshoeState, omega: PrecisionDraw, stream: RngStream
) -> HorseshoeState:
    """Fresh lambda2 and v for every off-diagonal pair (lambda2 first)."""
    new = state.copy()
    rows, cols = _offdiag_index(state.p)
    _local_scale_pass(new.lambda2, new.v, omega.offdiag, new.tau2, stream, rows, cols)
    return new


def update_global_scale(
    state: HorseshoeState, omega: PrecisionDraw, stream: RngStream
) -> HorseshoeState:
    """Fresh tau2 and kappa."""
    new = state.copy()
    rows, cols = _offdiag_index(state.p)
    new.tau2, new.kappa = _global_scale_pass(
        new.lambda2, new.kappa, omega.offdiag, stream, rows, cols
    )
    return new


# ---------------------------------------------------------------------------
# Quantiles (the (n+1)q order-statistic interpolation convention)
# ---------------------------------------------------------------------------

def _quantile_sorted(sorted_vals: np.ndarray, q: float) -> np.ndarray:
    """Quantile along axis 0 of pre-sorted data, h = q (n + 1) interpolation."""
    n = sorted_vals.shape[0]
    h = q * (n + 1)
    if h <= 1.0:
        return sorted_vals[0]
    if h >= n:
        return sorted_vals[-1]
    k = int(math.floor(h))
    g = h - k
    return sorted_vals[k - 1] + g * (sorted_vals[k] - sorted_vals[k - 1])


def equal_tailed_interval(sorted_vals: np.ndarray, level: float):
    """Equal-tailed interval at the given level from pre-sorted draws."""
    if not 0.0 < level < 1.0:
        raise ValidationError(f"credible level must lie in (0, 1), got {level}")
    q = (1.0 - level) / 2.0
    return _quantile_sorted(sorted_vals, q), _quantile_sorted(sorted_vals, 1.0 - q)


def credible_interval(samples: np.ndarray, i: int, j: int, level: float):
    """Equal-tailed credible interval of entry (i, j) over retained draws."""
    samples = np.asarray(samples)
    if samples.ndim != 3 or samples.shape[0] < 2:
        raise ValidationError("need a (n >= 2, p, p) stack of retained draws")
    vals = np.sort(samples[:, i, j])
    return equal_tailed_interval(vals, level)


# ---------------------------------------------------------------------------
# Chain driver
# ---------------------------------------------------------------------------

def _chain_stream_base(chain: int, p: int) -> int:
    return chain * (p + _STREAMS_PER_CHAIN_EXTRA)


def _init_chain(chain: int, p: int, seed: int):
    """Start values: zeros/units for chain 0, overdispersed otherwise."""
    offdiag = np.zeros((p, p))
    state = HorseshoeState.initial(p)
    if chain > 0:
        init_stream = RngStream(seed, _chain_stream_base(chain, p) + p + _STREAM_INIT)
        offdiag = 0.1 * init_stream.standard_normal((p, p))
        np.fill_diagonal(offdiag, 0.0)
        state.tau2 = 0.01 if chain % 2 == 1 else 100.0
    return offdiag, state


def run_chain(
    Y,
    diag,
    config: GibbsConfig,
    credible_levels=(0.5,),
    omega_ref: np.ndarray | None = None,
) -> PosteriorSummary:
    """Run the sampler and summarize retained draws.

    diag is the fixed plug-in diagonal.  omega_ref, when given (e.g. the true
    precision matrix in simulations), anchors the per-iteration Frobenius
    trace; otherwise the trace is measured against the zero-off-diagonal
    matrix with the same diagonal.
    """
    Y = as_data_matrix(Y)
    n, p = Y.shape
    if p < 2:
        raise ValidationError("need at least two variables")
    diag = np.asarray(diag, dtype=np.float64)
    if diag.shape != (p,) or np.any(diag <= 0) or not np.all(np.isfinite(diag)):
        raise ValidationError("diag must be p positive finite values")
    levels = tuple(float(l) for l in credible_levels)
    for level in levels:
        if not 0.0 < level < 1.0:
            raise ValidationError(f"credible level must lie in (0, 1), got {level}")

    S = gram(Y)
    if omega_ref is None:
        ref = np.diag(diag)
        ref_kind = "zero-offdiag"
    else:
        ref = np.asarray(omega_ref, dtype=np.float64)
        if ref.shape != (p, p):
            raise ValidationError("omega_ref must be p x p")
        ref_kind = "reference"

    n_kept = config.n_kept
    samples = np.empty((config.n_chains, n_kept, p, p))
    frob_trace = np.empty((config.n_chains, config.n_iter))
    tau2_trace = np.empty((config.n_chains, config.n_iter))
    kept_frob = np.empty((config.n_chains, n_kept))
    kept_tau2 = np.empty((config.n_chains, n_kept))

    rows, cols = _offdiag_index(p)
    sweep = _kernels.sweep_parallel if config.column_parallel else _kernels.sweep
    block = 256

    for chain in range(config.n_chains):
        base = _chain_stream_base(chain, p)
        col_streams = [RngStream(config.seed, base + j) for j in range(p)]
        local_stream = RngStream(config.seed, base + p + _STREAM_LOCAL)
        global_stream = RngStream(config.seed, base + p + _STREAM_GLOBAL)

        offdiag, state = _init_chain(chain, p, config.seed)
        offdiag = np.ascontiguousarray(offdiag)
        lambda2, v = state.lambda2, state.v
        tau2, kappa = state.tau2, state.kappa

        k = 0
        zbuf = None
        for t in range(1, config.n_iter + 1):
            bi = (t - 1) % block
            if bi == 0:
                nb = min(block, config.n_iter - (t - 1))
                zbuf = np.stack(
                    [cs.standard_normal((nb, p - 1)) for cs in col_streams]
                )
            Z = np.ascontiguousarray(zbuf[:, bi, :])
            code = sweep(offdiag, diag, S, lambda2, tau2, Z)
            if code >= 0:
                raise NumericalError(
                    f"non-finite conditional mean at row {code % p}, column {code // p}, "
                    f"iteration {t} (degenerate Gram matrix?)"
                )
            _local_scale_pass(lambda2, v, offdiag, tau2, local_stream, rows, cols)
            tau2, kappa = _global_scale_pass(
                lambda2, kappa, offdiag, global_stream, rows, cols
            )

            M = offdiag.copy()
            np.fill_diagonal(M, diag)
            frob_trace[chain, t - 1] = np.linalg.norm(M - ref)
            tau2_trace[chain, t - 1] = tau2
            if t > config.burn_in and (t - config.burn_in) % config.thin == 0 and k < n_kept:
                samples[chain, k] = M
                kept_frob[chain, k] = np.linalg.norm(M)
                kept_tau2[chain, k] = tau2
                k += 1

    pooled = samples.reshape(config.n_chains * n_kept, p, p)
    sorted_pool = np.sort(pooled, axis=0)
    lower = {}
    upper = {}
    for level in levels:
        lo, hi = equal_tailed_interval(sorted_pool, level)
        lower[level] = lo
        upper[level] = hi

    return PosteriorSummary(
        mean=pooled.mean(axis=0),
        samples=pooled,
        lower=lower,
        upper=upper,
        frob_trace=frob_trace,
        tau2_trace=tau2_trace,
        kept_frob_norm=kept_frob,
        kept_tau2=kept_tau2,
        diag=diag.copy(),
        levels=levels,
        ref_kind=ref_kind,
        n_chains=config.n_chains,
    )

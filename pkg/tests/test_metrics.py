import math

import numpy as np
import pytest

from qggm import (
    GibbsConfig,
    RngStream,
    ValidationError,
    contraction_rates,
    frobenius_error,
    gelman_rubin,
    roc_sweep,
    run_chain,
    select_edges,
    tpr_fpr,
)
from qggm.gibbs import PosteriorSummary
from qggm.metrics import monitored_scalars, select_edges_threshold
from qggm.symmetrize import operator_l1_norm, symmetrize_l1


def _summary_from_samples(samples):
    samples = np.asarray(samples, dtype=np.float64)
    n, p, _ = samples.shape
    srt = np.sort(samples, axis=0)
    from qggm.gibbs import equal_tailed_interval

    lo, hi = equal_tailed_interval(srt, 0.5)
    return PosteriorSummary(
        mean=samples.mean(axis=0),
        samples=samples,
        lower={0.5: lo},
        upper={0.5: hi},
        frob_trace=np.zeros((1, n)),
        tau2_trace=np.zeros((1, n)),
        kept_frob_norm=np.linalg.norm(samples.reshape(1, n, -1), axis=2),
        kept_tau2=np.ones((1, n)),
        diag=np.diagonal(samples[0]).copy(),
        levels=(0.5,),
        ref_kind="none",
        n_chains=1,
    )


# ---------------------------------------------------------------------------
# frobenius
# ---------------------------------------------------------------------------

def test_frobenius_zero_and_single_entry():
    A = np.arange(9.0).reshape(3, 3)
    assert frobenius_error(A, A) == 0.0
    B = A.copy()
    B[1, 2] += 3.0
    assert frobenius_error(A, B) == 3.0


def test_frobenius_matches_elementwise_sum(rng):
    A = rng.normal(size=(4, 4))
    B = rng.normal(size=(4, 4))
    manual = math.sqrt(sum((A[i, j] - B[i, j]) ** 2 for i in range(4) for j in range(4)))
    assert abs(frobenius_error(A, B) - manual) <= 1e-12


def test_frobenius_shape_mismatch():
    with pytest.raises(ValidationError):
        frobenius_error(np.ones((2, 2)), np.ones((3, 3)))


# ---------------------------------------------------------------------------
# selection
# ---------------------------------------------------------------------------

def test_select_edges_positive_samples():
    samples = np.zeros((40, 3, 3))
    samples[:, 0, 1] = np.linspace(0.1, 0.5, 40)  # strictly positive
    samples[:, 1, 0] = np.linspace(0.1, 0.5, 40)
    s = _summary_from_samples(samples)
    sel = select_edges(s, 0.5)
    assert sel[0, 1] and sel[1, 0]
    assert not sel[0, 2] and not sel[2, 2]


def test_select_edges_symmetric_around_zero():
    samples = np.zeros((40, 2, 2))
    samples[:, 0, 1] = np.linspace(-1, 1, 40)
    s = _summary_from_samples(samples)
    assert not select_edges(s, 0.5).any()


def test_select_edges_or_rule():
    samples = np.zeros((40, 2, 2))
    samples[:, 0, 1] = np.linspace(-1, 1, 40)  # covers zero
    samples[:, 1, 0] = np.linspace(0.1, 0.3, 40)  # excludes zero
    s = _summary_from_samples(samples)
    sel = select_edges(s, 0.5)
    assert sel[0, 1] and sel[1, 0]


def test_select_edges_threshold_rule():
    samples = np.zeros((10, 2, 2))
    samples[:, 0, 1] = 0.05
    s = _summary_from_samples(samples)
    assert select_edges_threshold(s, 0.01)[0, 1]
    assert not select_edges_threshold(s, 0.1)[0, 1]


def test_tpr_fpr_exact_recovery():
    sel = np.zeros((4, 4), dtype=bool)
    sel[0, 1] = sel[1, 0] = True
    assert tpr_fpr(sel, [(0, 1)], 4) == (1.0, 0.0)


def test_tpr_fpr_select_everything():
    sel = ~np.eye(4, dtype=bool)
    tpr, fpr = tpr_fpr(sel, [(0, 1)], 4)
    assert (tpr, fpr) == (1.0, 1.0)


def test_tpr_fpr_hand_case():
    sel = np.zeros((4, 4), dtype=bool)
    for i, j in [(0, 1), (2, 3)]:
        sel[i, j] = sel[j, i] = True
    tpr, fpr = tpr_fpr(sel, [(0, 1)], 4)
    assert tpr == 1.0
    assert fpr == pytest.approx(1.0 / 5.0)


def test_tpr_empty_support_flagged():
    sel = np.zeros((3, 3), dtype=bool)
    tpr, fpr = tpr_fpr(sel, [], 3)
    assert math.isnan(tpr)
    assert fpr == 0.0


# ---------------------------------------------------------------------------
# roc
# ---------------------------------------------------------------------------

def test_roc_monotone_and_endpoints(rng):
    samples = 0.02 * rng.normal(size=(80, 4, 4))
    samples[:, 0, 1] += 0.5
    samples[:, 1, 0] += 0.5
    s = _summary_from_samples(samples)
    curve = roc_sweep(s, [(0, 1)], np.geomspace(0.01, 0.9999, 60))
    fprs = [row[1] for row in curve]
    tprs = [row[2] for row in curve]
    for a, b in zip(fprs, fprs[1:]):
        assert b <= a
    for a, b in zip(tprs, tprs[1:]):
        assert b <= a
    assert tprs[0] == 1.0
    assert fprs[0] > 0.5  # near-degenerate intervals select almost everything


def test_roc_perfect_separation_fixture():
    # one strong edge plus null pairs (fpr needs a nonempty null set)
    truth = np.eye(3)
    truth[0, 1] = truth[1, 0] = -0.5
    L = np.linalg.cholesky(truth)
    Z = RngStream(5, 1).standard_normal((200, 3))
    Y = np.linalg.solve(L.T, Z.T).T
    s = run_chain(Y, np.ones(3), GibbsConfig(n_iter=800, burn_in=200, thin=3, seed=2))
    curve = roc_sweep(s, [(0, 1)])
    hits = [row for row in curve if row[2] == 1.0 and row[1] == 0.0]
    assert hits  # some level recovers the single edge perfectly


def test_roc_level_validation():
    s = _summary_from_samples(np.zeros((10, 2, 2)))
    with pytest.raises(ValidationError):
        roc_sweep(s, [(0, 1)], [0.5, 0.4])


# ---------------------------------------------------------------------------
# gelman-rubin
# ---------------------------------------------------------------------------

def test_gr_identical_chains():
    x = np.linspace(0.0, 1.0, 50)
    rhat = gelman_rubin([x, x, x])
    assert rhat == pytest.approx(math.sqrt(49 / 50), rel=1e-12)
    assert rhat < 1.1


def test_gr_iid_chains():
    chains = RngStream(6, 0).standard_normal((2, 10_000))
    rhat = gelman_rubin(chains)
    assert 0.99 <= rhat <= 1.02


def test_gr_disjoint_chains():
    a = RngStream(7, 0).standard_normal(100)
    b = RngStream(7, 1).standard_normal(100) + 10.0
    assert gelman_rubin([a, b]) > 5.0


def test_gr_affine_invariance():
    chains = RngStream(8, 0).standard_normal((3, 500))
    base = gelman_rubin(chains)
    mapped = gelman_rubin(3.7 * chains - 11.0)
    assert abs(base - mapped) <= 1e-10


def test_gr_validation():
    with pytest.raises(ValidationError):
        gelman_rubin([np.zeros(50)])
    with pytest.raises(ValidationError):
        gelman_rubin(np.zeros((2, 50)))
    with pytest.raises(ValidationError):
        gelman_rubin(np.zeros((2, 5)))


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------

def test_rates_empty_support():
    eps, rate = contraction_rates(10, 100, [])
    assert eps == 0.0 and rate == 0.0


def test_rates_hubs_arithmetic():
    from qggm import PatternSpec, generate_pattern

    truth = generate_pattern(PatternSpec(kind="hubs", p=100))
    eps, rate = contraction_rates(100, 150, truth.support)
    assert eps == pytest.approx(math.sqrt(180 * math.log(100) / 150), rel=1e-12)
    assert eps == pytest.approx(2.35, abs=0.01)
    assert rate == pytest.approx(9 * math.sqrt(math.log(100) / 150), rel=1e-12)


def test_rates_scale_with_n():
    support = [(0, 1), (2, 3)]
    e1, r1 = contraction_rates(10, 100, support)
    e2, r2 = contraction_rates(10, 200, support)
    assert e1 / e2 == pytest.approx(math.sqrt(2), rel=1e-12)
    assert r1 / r2 == pytest.approx(math.sqrt(2), rel=1e-12)


# ---------------------------------------------------------------------------
# misc
# ---------------------------------------------------------------------------

def test_monitored_scalars_structure():
    rng = np.random.default_rng(0)
    Y = rng.normal(size=(30, 4))
    s = run_chain(Y, np.ones(4), GibbsConfig(n_iter=40, burn_in=10, thin=3, seed=0, n_chains=2))
    mon = monitored_scalars(s, seed=1)
    assert set(mon) >= {"omega_frob_norm", "tau2"}
    assert len([k for k in mon if k.startswith("omega_")]) >= 6  # norm + 5 entries
    for series in mon.values():
        assert series.shape == (2, s.n_kept_per_chain)
    assert monitored_scalars(s, seed=1).keys() == mon.keys()


def test_frobenius_l1_sanity_envelope(rng):
    for _ in range(10):
        p = 5
        A = rng.normal(size=(p, p))
        truth = rng.normal(size=(p, p))
        truth = (truth + truth.T) / 2
        S = symmetrize_l1(A, mode="heuristic")
        lhs = frobenius_error(S, truth)
        rhs = frobenius_error(A, truth) + 2 * math.sqrt(p) * operator_l1_norm(A - truth)
        assert lhs <= rhs + 1e-9

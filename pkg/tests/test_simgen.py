import numpy as np
import pytest

from qggm import (
    PatternSpec,
    RngStream,
    ValidationError,
    check_pd,
    generate_pattern,
    sample_mvn,
)
from qggm.simgen import PD_FLOOR, _build_random
from qggm.rng import RngStream as RS


def test_hubs_support_arithmetic():
    truth = generate_pattern(PatternSpec(kind="hubs", p=100))
    assert len(truth.support) == 90
    vals = [truth.omega_star[i, j] for i, j in truth.support]
    assert all(v == 0.25 for v in vals)
    col_counts = truth.support_matrix().sum(axis=0)
    assert col_counts.max() == 9  # hub degree


def test_cliques_support_and_block_eigs():
    truth = generate_pattern(PatternSpec(kind="cliques", p=100))
    assert len(truth.support) == 30
    vals = [truth.omega_star[i, j] for i, j in truth.support]
    assert all(v == -0.45 for v in vals)
    block = truth.omega_star[:3, :3]
    eigs = np.sort(np.linalg.eigvalsh(block))
    assert eigs == pytest.approx([0.10, 1.45, 1.45], abs=1e-12)


def test_random_support_count_binomial():
    spec = PatternSpec(kind="random", p=100)
    counts = [
        int(np.count_nonzero(np.triu(_build_random(spec, RS(50, a)), k=1)))
        for a in range(200)
    ]
    # Binomial(4950, 1/100): mean 49.5, sd ~7; the mean over 200 draws has
    # standard error ~0.5
    assert abs(np.mean(counts) - 49.5) <= 2.5


def test_hubs_cliques_split():
    truth = generate_pattern(PatternSpec(kind="hubs-cliques", p=100))
    assert len(truth.support) == 60
    vals = np.array([truth.omega_star[i, j] for i, j in truth.support])
    assert np.count_nonzero(vals == -0.2) == 45
    assert np.count_nonzero(vals == 0.5) == 15


def test_cliques_random_values():
    truth = generate_pattern(PatternSpec(kind="cliques-random", p=100, seed=3))
    vals = np.array([truth.omega_star[i, j] for i, j in truth.support])
    n_within = np.count_nonzero(vals == -0.3)
    n_between = np.count_nonzero(vals == 0.2)
    assert n_within == 30
    assert n_between == len(truth.support) - 30
    assert n_between > 0


def test_hubs_random_extra_edges():
    truth = generate_pattern(PatternSpec(kind="hubs-random", p=100, seed=1))
    vals = np.array([truth.omega_star[i, j] for i, j in truth.support])
    n_hub = np.count_nonzero(vals == 0.25)
    assert n_hub == 90
    extra = vals[vals != 0.25]
    assert np.all((extra <= -0.2) & (extra >= -0.8))


def test_every_truth_clears_pd_floor():
    for kind in ("random", "hubs", "cliques", "hubs-random", "cliques-random", "hubs-cliques"):
        truth = generate_pattern(PatternSpec(kind=kind, p=20, seed=2))
        assert truth.min_eig >= PD_FLOOR - 1e-9
        assert np.array_equal(truth.omega_star, truth.omega_star.T)
        assert np.all(np.diagonal(truth.omega_star) == 1.0)


def test_deterministic_patterns_seed_independent():
    a = generate_pattern(PatternSpec(kind="hubs", p=50, seed=1))
    b = generate_pattern(PatternSpec(kind="hubs", p=50, seed=999))
    assert np.array_equal(a.omega_star, b.omega_star)
    c = generate_pattern(PatternSpec(kind="cliques", p=50, seed=1))
    d = generate_pattern(PatternSpec(kind="cliques", p=50, seed=999))
    assert np.array_equal(c.omega_star, d.omega_star)


def test_random_pattern_seeded_reproducible():
    a = generate_pattern(PatternSpec(kind="random", p=30, seed=5))
    b = generate_pattern(PatternSpec(kind="random", p=30, seed=5))
    assert np.array_equal(a.omega_star, b.omega_star)


def test_pattern_validation():
    with pytest.raises(ValidationError):
        PatternSpec(kind="hubs", p=21)  # not divisible by 10
    with pytest.raises(ValidationError):
        PatternSpec(kind="cliques", p=5, clique_groups=2)  # 6 members > p
    with pytest.raises(ValidationError):
        PatternSpec(kind="mystery", p=10)
    with pytest.raises(ValidationError):
        PatternSpec(kind="hubs-cliques", p=10)  # one group cannot split


def test_check_pd_examples():
    ok, mu = check_pd(np.eye(3), 0.05)
    assert ok and mu == pytest.approx(1.0, abs=1e-9)

    A = np.array([[1.0, 0.999], [0.999, 1.0]])
    ok, mu = check_pd(A, 0.05)
    assert not ok
    assert mu == pytest.approx(0.001, abs=1e-12)

    star = np.eye(10)
    star[0, 1:] = 0.25
    star[1:, 0] = 0.25
    ok, mu = check_pd(star, 0.05)
    assert ok
    assert mu == pytest.approx(1 - 0.75, abs=1e-8)


def test_sample_mvn_identity_covariance():
    truth = generate_pattern(PatternSpec(kind="random", p=4, seed=8, edge_prob=1e-12))
    assert len(truth.support) == 0
    Y = sample_mvn(truth, 5000, RngStream(3, 0))
    C = Y.T @ Y / 5000
    off = ~np.eye(4, dtype=bool)
    assert np.max(np.abs(C[off])) <= 0.06
    assert np.max(np.abs(np.diagonal(C) - 1)) <= 0.08


def test_sample_mvn_sign_flip_through_inverse():
    omega = np.array([[1.0, -0.5], [-0.5, 1.0]])
    from qggm.simgen import GroundTruth

    truth = GroundTruth(omega_star=omega, support=((0, 1),), min_eig=0.5)
    Y = sample_mvn(truth, 5000, RngStream(4, 0))
    corr = np.corrcoef(Y.T)[0, 1]
    assert corr == pytest.approx(0.5, abs=0.05)


def test_sample_mvn_deterministic():
    truth = generate_pattern(PatternSpec(kind="cliques", p=9, clique_groups=3))
    a = sample_mvn(truth, 10, RngStream(7, 3))
    b = sample_mvn(truth, 10, RngStream(7, 3))
    assert np.array_equal(a, b)


def test_sample_precision_converges():
    truth = generate_pattern(PatternSpec(kind="random", p=5, seed=12))
    Y = sample_mvn(truth, 20000, RngStream(9, 0))
    prec = np.linalg.inv(Y.T @ Y / 20000)
    assert np.linalg.norm(prec - truth.omega_star) < 0.15

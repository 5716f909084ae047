import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sorted_l1l2.problems import (
    ProblemSpec,
    child_rng,
    gen_correlated_gaussian,
    gen_ground_truth,
    gen_matrix,
    gen_oversampled_dct,
    make_problem,
    trial_seed,
)


def test_dct_with_zero_frequencies_is_constant():
    A = gen_oversampled_dct(4, 6, 5.0, 0, h=np.zeros(4))
    np.testing.assert_allclose(A, np.full((4, 6), 0.5))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**64 - 1))
def test_dct_entries_bounded(seed):
    A = gen_oversampled_dct(16, 40, 5.0, seed)
    assert np.all(np.abs(A) <= 1 / np.sqrt(16) + 1e-15)


def test_dct_deterministic():
    assert np.array_equal(gen_oversampled_dct(4, 8, 5.0, 11), gen_oversampled_dct(4, 8, 5.0, 11))
    assert not np.array_equal(gen_oversampled_dct(4, 8, 5.0, 11), gen_oversampled_dct(4, 8, 5.0, 12))


def _mean_offdiag_cov(A):
    C = np.cov(A, rowvar=False)
    return C[~np.eye(C.shape[0], dtype=bool)].mean()


@pytest.mark.parametrize("R", [0.0, 0.8])
def test_gaussian_covariance_monte_carlo(R):
    A = gen_correlated_gaussian(100_000, 6, R, 3)
    assert abs(_mean_offdiag_cov(A) - R) <= 0.02
    assert abs(np.var(A, axis=0).mean() - 1.0) <= 0.02


def test_gaussian_normalized_columns():
    A = gen_correlated_gaussian(30, 50, 0.1, 4, normalize_columns=True)
    np.testing.assert_allclose(np.linalg.norm(A, axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(A.mean(axis=0), 0.0, atol=1e-12)


def test_gaussian_rejects_bad_R():
    with pytest.raises(ValueError):
        gen_correlated_gaussian(3, 4, 1.0, 0)


def test_ground_truth_examples():
    x = gen_ground_truth(50, 1, 1, 9)
    assert np.count_nonzero(x) == 1 and np.abs(x).max() == 1.0
    x = gen_ground_truth(1024, 20, 1, 9)
    assert np.count_nonzero(x) == 20
    assert np.array_equal(x, gen_ground_truth(1024, 20, 1, 9))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 15), st.integers(1, 5), st.integers(0, 2**64 - 1))
def test_ground_truth_invariants(s, L, seed):
    n = 100
    x = gen_ground_truth(n, s, L, seed)
    idx = np.flatnonzero(x)
    assert idx.size == s
    assert np.max(np.abs(x)) == 1.0
    if s > 1:
        assert np.min(np.diff(idx)) >= L


def test_ground_truth_infeasible_separation():
    with pytest.raises(ValueError):
        gen_ground_truth(10, 5, 3, 0)


def test_make_problem_noise_free_is_exact():
    spec = ProblemSpec("oversampled_dct", m=20, n=60, sparsity=4, seed=5)
    p = make_problem(spec)
    assert np.max(np.abs(p.A @ p.x_true - p.b)) <= 1e-12 * max(1.0, np.max(np.abs(p.b)))
    assert p.spec == spec
    q = make_problem(spec)
    assert np.array_equal(p.A, q.A) and np.array_equal(p.b, q.b) and np.array_equal(p.x_true, q.x_true)


def test_noise_level_concentrates():
    ratios = []
    for t in range(100):
        spec = ProblemSpec("correlated_gaussian", m=300, n=512, coherence_param=0.0, sparsity=10,
                           noise_sigma=0.1, seed=trial_seed(1, t))
        p = make_problem(spec)
        ratios.append(np.sum((p.b - p.A @ p.x_true) ** 2) / 300 / 0.01)
    ratios = np.array(ratios)
    # chi-square with 300 dof has relative sd ~0.08, so a few seeds may leave the band
    assert abs(ratios.mean() - 1) <= 0.2
    assert np.mean(np.abs(ratios - 1) <= 0.2) >= 0.95


def test_dct_coherence_grows_with_F():
    def coh(F, seed):
        A = gen_oversampled_dct(64, 256, F, seed)
        G = A.T @ A
        d = np.sqrt(np.diag(G))
        G = np.abs(G / np.outer(d, d))
        return G[~np.eye(256, dtype=bool)].mean()

    assert np.mean([coh(10.0, s) for s in range(20)]) > np.mean([coh(5.0, s) for s in range(20)])


def test_spec_validation():
    with pytest.raises(ValueError):
        ProblemSpec("fourier")
    with pytest.raises(ValueError):
        ProblemSpec(sparsity=0)
    with pytest.raises(ValueError):
        ProblemSpec("correlated_gaussian", coherence_param=1.5)
    assert ProblemSpec().replace(m=32).m == 32


def test_seed_streams_independent_of_order():
    a = child_rng(7, 1, 3).standard_normal(3)
    child_rng(7, 2, 0).standard_normal(10)
    assert np.array_equal(a, child_rng(7, 1, 3).standard_normal(3))
    assert trial_seed(0, 1) != trial_seed(0, 2)
    assert 0 <= trial_seed(2**64 - 1, 5) < 2**64


def test_gen_matrix_dispatch():
    spec = ProblemSpec("correlated_gaussian", m=5, n=9, coherence_param=0.2, sparsity=2, seed=1)
    assert np.array_equal(gen_matrix(spec), gen_correlated_gaussian(5, 9, 0.2, 1))

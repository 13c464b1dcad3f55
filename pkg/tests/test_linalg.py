import numpy as np
import pytest

from qmrec import RngStream, gaussian_matrix, small_svd, sym_top_eigs

from oracles import eig2x2_sym, jacobi_eigh, sample_mean_var


def test_gaussian_determinism():
    s = RngStream(42, 7)
    first = gaussian_matrix(2, 2, s)
    second = gaussian_matrix(2, 2, s)
    assert np.array_equal(first, second)


def test_gaussian_moments():
    x = gaussian_matrix(1000, 1, RngStream(1, 0))
    mean, var = sample_mean_var(x)
    assert -0.15 <= mean <= 0.15
    assert 0.8 <= var <= 1.2


def test_gaussian_stream_independence():
    a = gaussian_matrix(3, 2, RngStream(0, 1))
    b = gaussian_matrix(3, 2, RngStream(0, 2))
    assert not np.array_equal(a, b)


def test_gaussian_rejects_empty():
    with pytest.raises(ValueError):
        gaussian_matrix(0, 3, RngStream(0))


def test_top_eigs_diagonal():
    pairs = sym_top_eigs(np.diag([3.0, 2.0, 1.0]), k=2)
    assert np.allclose(pairs.values, [3.0, 2.0])
    assert np.allclose(np.abs(pairs.vectors), np.eye(3)[:, :2])


def test_top_eigs_identity_residual():
    S = np.eye(4)
    pairs = sym_top_eigs(S, k=1)
    assert pairs.values[0] == pytest.approx(1.0)
    v = pairs.vectors[:, 0]
    assert np.linalg.norm(v) == pytest.approx(1.0)
    assert np.linalg.norm(S @ v - pairs.values[0] * v) <= 1e-10 * np.linalg.norm(S)


def test_top_eigs_against_jacobi():
    rng_vals = gaussian_matrix(6, 6, RngStream(5, 0))
    S = (rng_vals + rng_vals.T) / 2
    pairs = sym_top_eigs(S, k=3)
    oracle_vals, _ = jacobi_eigh(S)
    assert np.allclose(pairs.values, oracle_vals[:3], atol=1e-10)
    # eigenvector residuals and orthonormality
    for i in range(3):
        v = pairs.vectors[:, i]
        assert np.linalg.norm(S @ v - pairs.values[i] * v) <= 1e-10 * np.linalg.norm(S)
    assert np.allclose(pairs.vectors.T @ pairs.vectors, np.eye(3), atol=1e-12)


def test_top_eigs_rejects_asymmetric():
    S = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError, match="symmetric"):
        sym_top_eigs(S, k=1)


def test_top_eigs_rejects_bad_k():
    with pytest.raises(ValueError):
        sym_top_eigs(np.eye(3), k=4)


def test_small_svd_identity():
    t = small_svd(np.eye(3))
    assert np.allclose(t.D, np.ones(3))
    assert np.allclose(t.W @ np.diag(t.D) @ t.V.T, np.eye(3), atol=1e-12)


def test_small_svd_permutation():
    t = small_svd(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(t.D, [1.0, 1.0])


def test_small_svd_2x2_against_quadratic_formula():
    M = gaussian_matrix(2, 2, RngStream(9, 0))
    t = small_svd(M)
    G = M.T @ M
    lo_hi = eig2x2_sym(G[0, 0], G[0, 1], G[1, 1])
    assert np.allclose(np.sort(t.D**2)[::-1], lo_hi, atol=1e-12)


def test_small_svd_rejects_nonfinite():
    with pytest.raises(ValueError):
        small_svd(np.array([[np.nan, 0.0], [0.0, 1.0]]))


@pytest.mark.parametrize("size", [1, 2, 5, 9])
def test_small_svd_invariants(size):
    M = gaussian_matrix(size, size, RngStream(11, size))
    t = small_svd(M)
    scale = max(1.0, np.linalg.norm(M))
    assert np.linalg.norm(t.W @ np.diag(t.D) @ t.V.T - M) <= 1e-12 * scale
    assert np.allclose(t.W.T @ t.W, np.eye(size), atol=1e-12)
    assert np.allclose(t.V.T @ t.V, np.eye(size), atol=1e-12)
    assert np.all(np.diff(t.D) <= 0) and np.all(t.D >= 0)

"""Dense matrix kernels: Gaussian sampling, symmetric top-k eigenpairs, small SVD."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import RngStream


@dataclass(frozen=True)
class EigenPairs:
    """Top eigenvalues (non-increasing) with orthonormal eigenvectors as columns."""

    values: np.ndarray  # (k,)
    vectors: np.ndarray  # (n, k)


@dataclass(frozen=True)
class SvdTriplet:
    """Factors of M = W @ diag(D) @ V.T with W, V orthogonal and D descending."""

    W: np.ndarray
    D: np.ndarray
    V: np.ndarray


def gaussian_matrix(rows: int, cols: int, stream: RngStream) -> np.ndarray:
    """Matrix of iid standard normal entries, deterministic per stream."""
    if rows < 1 or cols < 1:
        raise ValueError(f"gaussian_matrix needs rows, cols >= 1, got {rows}x{cols}")
    return stream.generator().standard_normal((rows, cols))


def sym_top_eigs(S: np.ndarray, k: int, tol: float = 1e-10) -> EigenPairs:
    """The k algebraically largest eigenpairs of a symmetric matrix.

    Raises ValueError if S is not symmetric to `tol` (relative to its scale)
    or k is out of range; eigensolver convergence failures propagate as
    numpy.linalg.LinAlgError.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    n = S.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for {n}x{n} matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")
    scale = max(1.0, float(np.abs(S).max()))
    asym = float(np.abs(S - S.T).max())
    if asym > tol * scale:
        raise ValueError(f"matrix is not symmetric: max |S - S.T| = {asym:g}")
    vals, vecs = np.linalg.eigh(S)
    order = np.argsort(vals)[::-1][:k]
    return EigenPairs(values=vals[order].copy(), vectors=vecs[:, order].copy())


def small_svd(M: np.ndarray) -> SvdTriplet:
    """Full SVD of a small square matrix (intended for r x r, r <= 16)."""
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("small_svd requires finite entries")
    W, D, Vt = np.linalg.svd(M)
    return SvdTriplet(W=W, D=D, V=Vt.T)

"""Orthogonal-invariant error metrics via Procrustes alignment.

Recovery is only defined up to a right orthogonal factor, so the distance
between an estimate U and the target X is min over orthogonal O of
||X O - U||_F, attained at O* = W V^T where X^T U = W diag(D) V^T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import small_svd


@dataclass(frozen=True)
class Alignment:
    O_star: np.ndarray  # (r, r) orthogonal
    distance: float
    relative_error: float


def procrustes_align(U: np.ndarray, X: np.ndarray) -> Alignment:
    """Best orthogonal alignment of X onto U and the resulting distances."""
    if U.shape != X.shape:
        raise ValueError(f"shape mismatch: U {U.shape} vs X {X.shape}")
    x_norm = float(np.linalg.norm(X))
    if x_norm == 0:
        raise ValueError("X = 0: relative error is undefined")
    t = small_svd(X.T @ U)
    # O* = W V^T attains the minimum even when X^T U is rank deficient
    # (the minimizer is then non-unique but the distance is not).
    O_star = t.W @ t.V.T
    distance = float(np.linalg.norm(X @ O_star - U))
    return Alignment(O_star=O_star, distance=distance, relative_error=distance / x_norm)


def orbit_distance(U: np.ndarray, X: np.ndarray) -> float:
    return procrustes_align(U, X).distance


def relative_error(U: np.ndarray, X: np.ndarray) -> float:
    return procrustes_align(U, X).relative_error

"""Truncated spectral initialization.

Builds Y = (1/m) sum_i y_i a_i a_i^T over the measurements passing the
truncation test y_i <= (alpha_y/m) sum_k y_k, then seeds the iteration with
U0 = U Sigma^{1/2} where U holds the top-r eigenvectors of Y and
Sigma_ii = (lambda_i - lambda_{r+1}) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import sym_top_eigs
from .model import MeasurementSet


class DegenerateMeasurementsError(ValueError):
    """Raised when sum(y) <= 0 and the relative thresholds are meaningless."""


@dataclass(frozen=True)
class InitConfig:
    # alpha_y is only required to be positive; the theory wants it at least
    # C*sqrt(log(c*kappa*r)) for unspecified constants, and 9 is the
    # experimental default.
    alpha_y: float = 9.0
    eig_tol: float = 1e-10

    def __post_init__(self):
        if self.alpha_y <= 0:
            raise ValueError("alpha_y must be positive")


@dataclass(frozen=True)
class InitResult:
    U0: np.ndarray  # (n, r)
    kept_count: int
    lambdas: np.ndarray  # lambda_1 ... lambda_{r+1}, non-increasing


def truncation_mask(meas: MeasurementSet, alpha_y: float) -> np.ndarray:
    """Boolean mask of measurements kept by the truncation threshold."""
    total = float(np.sum(meas.y))
    if total <= 0:
        raise DegenerateMeasurementsError(f"sum(y) = {total:g} <= 0")
    return meas.y <= (alpha_y / meas.m) * total


def build_Y(A: np.ndarray, meas: MeasurementSet, mask: np.ndarray) -> np.ndarray:
    """(1/m) sum over kept i of y_i a_i a_i^T (exactly symmetric)."""
    m, n = A.shape
    if meas.m != m or mask.shape[0] != m:
        raise ValueError("A, y and mask must agree on m")
    Ak = A[mask]
    yk = meas.y[mask]
    Y = (Ak * yk[:, None]).T @ Ak / m
    return (Y + Y.T) / 2.0


def spectral_init(
    A: np.ndarray, meas: MeasurementSet, r: int, cfg: InitConfig = InitConfig()
) -> InitResult:
    n = A.shape[1]
    if not 1 <= r < n:
        # lambda_{r+1} needs r + 1 <= n
        raise ValueError(f"need 1 <= r < n, got n={n}, r={r}")
    mask = truncation_mask(meas, cfg.alpha_y)
    Y = build_Y(A, meas, mask)
    pairs = sym_top_eigs(Y, r + 1, tol=cfg.eig_tol)
    lam = pairs.values
    # Under noise lambda_i can numerically cross lambda_{r+1}; clamp keeps
    # Sigma^{1/2} real.
    sigma_diag = np.maximum(0.0, (lam[:r] - lam[r]) / 2.0)
    U0 = pairs.vectors[:, :r] * np.sqrt(sigma_diag)[None, :]
    return InitResult(U0=U0, kept_count=int(np.count_nonzero(mask)), lambdas=lam)

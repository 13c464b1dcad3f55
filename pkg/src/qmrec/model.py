"""Ground-truth targets, Gaussian sensing ensembles, and quadratic measurements.

The measurement of a target X in R^{n x r} by a sensing vector a is
y = ||a^T X||^2, a rank-one quadratic functional of X X^T.  Everything here
is deterministic given the input streams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import gaussian_matrix
from .rng import RngStream

# Targets whose smallest spectral value falls below this fraction of the
# largest are resampled: the step-size rules degenerate as sigma_r -> 0.
_RANK_DEFICIENCY_RATIO = 1e-8


@dataclass(frozen=True)
class TargetMatrix:
    """Ground truth X with the cached nonzero spectrum of X X^T."""

    X: np.ndarray  # (n, r)
    spectrum: np.ndarray  # sigma_1 >= ... >= sigma_r > 0

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def r(self) -> int:
        return self.X.shape[1]

    @property
    def sigma_1(self) -> float:
        return float(self.spectrum[0])

    @property
    def sigma_r(self) -> float:
        return float(self.spectrum[-1])

    @property
    def kappa(self) -> float:
        return self.sigma_1 / self.sigma_r

    @property
    def fro_norm(self) -> float:
        return float(np.linalg.norm(self.X))


@dataclass(frozen=True)
class MeasurementSet:
    """Observed vector y with noise metadata."""

    y: np.ndarray  # (m,)
    noise_sigma: float = 0.0
    noiseless: bool = True

    @property
    def m(self) -> int:
        return self.y.shape[0]


def target_from_matrix(X: np.ndarray) -> TargetMatrix:
    """Wrap an explicit X, computing its spectrum from the r x r Gram matrix."""
    X = np.asarray(X, dtype=float)
    n, r = X.shape
    if not 1 <= r < n:
        raise ValueError(f"need 1 <= r < n, got n={n}, r={r}")
    gram = X.T @ X
    spectrum = np.sort(np.linalg.eigvalsh((gram + gram.T) / 2.0))[::-1]
    if spectrum[-1] <= 0:
        raise ValueError("target is rank deficient")
    return TargetMatrix(X=X, spectrum=spectrum)


def random_target(n: int, r: int, stream: RngStream) -> TargetMatrix:
    """Standard-normal target, resampled if numerically rank deficient."""
    if not 1 <= r < n:
        raise ValueError(f"need 1 <= r < n, got n={n}, r={r}")
    for attempt in range(64):
        X = gaussian_matrix(n, r, stream.child(attempt))
        gram = X.T @ X
        spectrum = np.sort(np.linalg.eigvalsh((gram + gram.T) / 2.0))[::-1]
        if spectrum[-1] >= _RANK_DEFICIENCY_RATIO * spectrum[0]:
            return TargetMatrix(X=X, spectrum=spectrum)
    raise RuntimeError("failed to sample a well-conditioned target")


def sensing_ensemble(m: int, n: int, stream: RngStream) -> np.ndarray:
    """m x n matrix whose rows are iid standard Gaussian sensing vectors."""
    return gaussian_matrix(m, n, stream)


def measure(target: TargetMatrix | np.ndarray, A: np.ndarray) -> MeasurementSet:
    """Noiseless quadratic measurements y_i = ||a_i^T X||^2."""
    X = target.X if isinstance(target, TargetMatrix) else np.asarray(target, dtype=float)
    if A.shape[1] != X.shape[0]:
        raise ValueError(
            f"dimension mismatch: A has {A.shape[1]} columns, X has {X.shape[0]} rows"
        )
    y = np.einsum("ij,ij->i", A @ X, A @ X)
    return MeasurementSet(y=y, noise_sigma=0.0, noiseless=True)


def add_noise(meas: MeasurementSet, sigma: float, stream: RngStream) -> MeasurementSet:
    """Additive iid N(0, sigma^2) noise; sigma = 0 returns the input unchanged."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return meas
    eps = sigma * stream.generator().standard_normal(meas.m)
    return MeasurementSet(y=meas.y + eps, noise_sigma=sigma, noiseless=False)

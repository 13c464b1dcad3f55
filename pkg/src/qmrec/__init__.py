"""Low-rank matrix recovery from rank-one quadratic measurements.

Recovers X in R^{n x r} (up to a right orthogonal factor) from observations
y_i = ||a_i^T X||^2 via truncated spectral initialization followed by
exponential-type gradient descent.
"""

from .initialization import InitConfig, InitResult, spectral_init, truncation_mask, build_Y
from .linalg import EigenPairs, SvdTriplet, gaussian_matrix, small_svd, sym_top_eigs
from .metrics import Alignment, orbit_distance, procrustes_align, relative_error
from .model import (
    MeasurementSet,
    TargetMatrix,
    add_noise,
    measure,
    random_target,
    sensing_ensemble,
    target_from_matrix,
)
from .rng import RngStream
from .solver import (
    DivergenceError,
    RunTrace,
    SolverConfig,
    exp_gradient,
    exp_weights,
    objective,
    plain_gradient,
    run,
    step_size,
)

__all__ = [
    "Alignment",
    "DivergenceError",
    "EigenPairs",
    "InitConfig",
    "InitResult",
    "MeasurementSet",
    "RngStream",
    "RunTrace",
    "SolverConfig",
    "SvdTriplet",
    "TargetMatrix",
    "add_noise",
    "build_Y",
    "exp_gradient",
    "exp_weights",
    "gaussian_matrix",
    "measure",
    "objective",
    "orbit_distance",
    "plain_gradient",
    "procrustes_align",
    "random_target",
    "relative_error",
    "run",
    "sensing_ensemble",
    "small_svd",
    "spectral_init",
    "step_size",
    "sym_top_eigs",
    "target_from_matrix",
    "truncation_mask",
]

__version__ = "0.1.0"

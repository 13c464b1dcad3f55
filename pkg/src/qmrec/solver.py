"""Exponential-type gradient descent and the plain gradient-descent baseline.

The iteration minimizes f(U) = (1/4m) sum_i (y_i - ||a_i^T U||^2)^2 via
U <- U - mu * grad, where each summand of the gradient is damped by the
fixed weight w_i = exp(-m y_i / (alpha sum_k y_k)).  The weights depend only
on y, so they are computed once, never per iteration.  The plain variant is
the same update with w_i = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metrics import relative_error
from .model import MeasurementSet, TargetMatrix

# Iterates whose norm blows past this multiple of ||U0||_F abort loudly:
# a bad step size must fail visibly in a benchmark harness.
_DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 20.0
    variant: str = "exponential"  # or "plain"
    step_rule: str = "empirical"  # "empirical" | "theory" | "fixed"
    step_c: float = 0.1  # constant of the empirical rule mu = c * m / sum(y)
    step_mu: float | None = None  # explicit mu for the "fixed" rule
    theory_c2: float | None = None  # defaults to 125 * alpha^2
    max_iters: int = 3000
    success_tol: float = 1e-5  # on relative error, when ground truth is known
    grad_tol: float | None = None  # defaults to 1e-10 * max(1, f_w(U0))

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.variant not in ("exponential", "plain"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.step_rule not in ("empirical", "theory", "fixed"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.success_tol <= 0:
            raise ValueError("success_tol must be positive")


@dataclass
class RunTrace:
    """Per-iteration record of one solver run (index k describes U_k)."""

    objective: list[float] = field(default_factory=list)
    weighted_objective: list[float] = field(default_factory=list)
    grad_norm: list[float] = field(default_factory=list)
    rel_error: list[float] | None = None  # present iff a target was supplied
    U: np.ndarray | None = None
    iterations: int = 0
    converged: bool = False
    stop_reason: str = ""
    step_size: float = 0.0

    @property
    def final_rel_error(self) -> float:
        if self.rel_error is None or not self.rel_error:
            return float("nan")
        return self.rel_error[-1]


class DivergenceError(RuntimeError):
    """Non-finite or exploding iterate; carries the partial trace."""

    def __init__(self, message: str, trace: RunTrace):
        super().__init__(message)
        self.trace = trace


def exp_weights(meas: MeasurementSet, alpha: float) -> np.ndarray:
    """w_i = exp(-m y_i / (alpha sum_k y_k)); in (0, 1] for noiseless y."""
    total = float(np.sum(meas.y))
    if total <= 0:
        raise ValueError(f"sum(y) = {total:g} <= 0")
    # Noisy y_i < 0 gives w_i > 1; the formula is kept as stated.
    return np.exp(-meas.m * meas.y / (alpha * total))


def objective(
    U: np.ndarray, A: np.ndarray, meas: MeasurementSet, w: np.ndarray | None = None
) -> float:
    """f(U) = (1/4m) sum_i w_i (y_i - ||a_i^T U||^2)^2 (w = 1 when omitted)."""
    AU = A @ U
    resid = np.einsum("ij,ij->i", AU, AU) - meas.y
    sq = resid * resid if w is None else w * resid * resid
    return float(np.sum(sq)) / (4 * meas.m)


def exp_gradient(
    U: np.ndarray, A: np.ndarray, meas: MeasurementSet, w: np.ndarray
) -> np.ndarray:
    """Gradient of the weighted objective, weights treated as constants in U."""
    if A.shape[1] != U.shape[0] or A.shape[0] != meas.m:
        raise ValueError("dimension mismatch between U, A and y")
    AU = A @ U
    resid = np.einsum("ij,ij->i", AU, AU) - meas.y
    return A.T @ ((w * resid)[:, None] * AU) / meas.m


def plain_gradient(U: np.ndarray, A: np.ndarray, meas: MeasurementSet) -> np.ndarray:
    """Gradient of the unweighted objective f."""
    return exp_gradient(U, A, meas, np.ones(meas.m))


def step_size(
    cfg: SolverConfig, meas: MeasurementSet, spectrum: np.ndarray | None = None
) -> float:
    """Resolve the step size mu for a run.

    empirical: mu = c * m / sum(y) (experimental default c = 0.1);
    theory:    mu = sigma_r^3 / (c2 * sigma_1 * ||X||_F^6) with c2 = 125 alpha^2
               unless overridden, requiring the target spectrum;
    fixed:     the explicit cfg.step_mu.
    """
    if cfg.step_rule == "fixed":
        if cfg.step_mu is None or cfg.step_mu <= 0:
            raise ValueError("fixed step rule needs a positive step_mu")
        return cfg.step_mu
    if cfg.step_rule == "empirical":
        total = float(np.sum(meas.y))
        if total <= 0:
            raise ValueError(f"sum(y) = {total:g} <= 0")
        return cfg.step_c * meas.m / total
    if spectrum is None:
        raise ValueError("theory step rule needs the target spectrum")
    sigma_1 = float(spectrum[0])
    sigma_r = float(spectrum[-1])
    fro_sq = float(np.sum(spectrum))  # ||X||_F^2 = sum of spectrum
    c2 = cfg.theory_c2 if cfg.theory_c2 is not None else 125.0 * cfg.alpha**2
    return sigma_r**3 / (c2 * sigma_1 * fro_sq**3)


def run(
    A: np.ndarray,
    meas: MeasurementSet,
    U0: np.ndarray,
    cfg: SolverConfig = SolverConfig(),
    target: TargetMatrix | None = None,
) -> RunTrace:
    """Iterate the gradient update from U0, recording metrics each iteration.

    Stops when the relative error against the target drops below
    cfg.success_tol (target supplied), when the gradient norm drops below
    cfg.grad_tol (blind recovery), or at max_iters.  Divergence raises
    DivergenceError with the partial trace attached.
    """
    if A.shape[1] != U0.shape[0]:
        raise ValueError("dimension mismatch between A and U0")
    w = exp_weights(meas, cfg.alpha) if cfg.variant == "exponential" else np.ones(meas.m)
    spectrum = target.spectrum if target is not None else None
    mu = step_size(cfg, meas, spectrum)

    trace = RunTrace(rel_error=[] if target is not None else None, step_size=mu)
    grad_tol = cfg.grad_tol
    u0_norm = max(float(np.linalg.norm(U0)), 1e-300)
    U = U0.copy()

    for k in range(cfg.max_iters + 1):
        AU = A @ U
        resid = np.einsum("ij,ij->i", AU, AU) - meas.y
        f = float(np.sum(resid * resid)) / (4 * meas.m)
        fw = float(np.sum(w * resid * resid)) / (4 * meas.m)
        grad = A.T @ ((w * resid)[:, None] * AU) / meas.m
        gnorm = float(np.linalg.norm(grad))
        if grad_tol is None:
            grad_tol = 1e-10 * max(1.0, fw)

        trace.objective.append(f)
        trace.weighted_objective.append(fw)
        trace.grad_norm.append(gnorm)
        if target is not None:
            trace.rel_error.append(relative_error(U, target.X))

        trace.U = U
        trace.iterations = k
        if target is not None and trace.rel_error[-1] < cfg.success_tol:
            trace.converged = True
            trace.stop_reason = "relative error below success_tol"
            return trace
        if target is None and gnorm < grad_tol:
            trace.converged = True
            trace.stop_reason = "gradient norm below grad_tol"
            return trace
        if k == cfg.max_iters:
            break

        U = U - mu * grad
        if not np.all(np.isfinite(U)) or float(np.linalg.norm(U)) > _DIVERGENCE_FACTOR * u0_norm:
            trace.stop_reason = "diverged"
            raise DivergenceError(f"iterate diverged at iteration {k + 1}", trace)

    trace.stop_reason = "max iterations reached"
    return trace

"""Deterministic batch experiments: phase-transition sweeps and convergence traces.

Trials fan out over a process pool; trial (g, t) at grid index g always uses
stream_id (g << 32) | t regardless of worker scheduling, and results are
aggregated in (grid index, trial index) order, so output files are
byte-identical across runs and across worker counts.
"""

from __future__ import annotations

import csv
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .initialization import InitConfig, spectral_init
from .model import add_noise, measure, random_target, sensing_ensemble
from .rng import RngStream
from .solver import DivergenceError, RunTrace, SolverConfig, run

VARIANTS = ("exponential", "plain")


def parse_m(spec: str, n: int, r: int) -> int:
    """An m value either absolute ("800") or as a multiple of n*r ("2nr")."""
    s = spec.strip().lower()
    match = re.fullmatch(r"([0-9.]+)\s*nr", s)
    if match:
        return int(round(float(match.group(1)) * n * r))
    if re.fullmatch(r"[0-9]+", s):
        return int(s)
    raise ValueError(f"cannot parse m value {spec!r} (expected e.g. '800' or '2nr')")


def parse_m_grid(spec: str, n: int, r: int) -> list[int]:
    values = [parse_m(part, n, r) for part in spec.split(",") if part.strip()]
    if not values:
        raise ValueError("empty m grid")
    return values


@dataclass(frozen=True)
class ExperimentSpec:
    n: int = 200
    r: int = 2
    m_grid: tuple[int, ...] = ()
    trials: int = 100
    alpha: float = 20.0
    alphas: tuple[float, ...] = ()  # convergence traces can sweep several
    alpha_y: float = 9.0
    step_c: float = 0.1
    sigma: float = 0.0
    master_seed: int = 0
    variants: tuple[str, ...] = ("exponential",)
    max_iters: int = 3000
    success_tol: float = 1e-5

    def validate(self) -> None:
        if self.n < 2 or not 1 <= self.r < self.n:
            raise ValueError(f"need n >= 2 and 1 <= r < n, got n={self.n}, r={self.r}")
        if not self.m_grid:
            raise ValueError("m grid must be non-empty")
        if any(m < 1 for m in self.m_grid):
            raise ValueError("all m must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        for v in self.variants:
            if v not in VARIANTS:
                raise ValueError(f"unknown variant {v!r}")


@dataclass(frozen=True)
class TrialResult:
    grid_index: int
    trial_index: int
    variant: str
    final_rel_error: float
    iterations: int
    converged: bool
    diverged: bool


def trial_stream(spec: ExperimentSpec, grid_index: int, trial_index: int) -> RngStream:
    return RngStream(spec.master_seed, (grid_index << 32) | trial_index)


def run_trial_pipeline(
    spec: ExperimentSpec, grid_index: int, trial_index: int, variant: str
) -> tuple[RunTrace | None, object]:
    """random target -> measure -> spectral init -> gradient descent.

    Returns (trace, target); trace is None when the run diverged.
    """
    m = spec.m_grid[grid_index]
    s = trial_stream(spec, grid_index, trial_index)
    target = random_target(spec.n, spec.r, s.child(0))
    A = sensing_ensemble(m, spec.n, s.child(1))
    meas = measure(target, A)
    if spec.sigma > 0:
        meas = add_noise(meas, spec.sigma, s.child(2))
    init = spectral_init(A, meas, spec.r, InitConfig(alpha_y=spec.alpha_y))
    cfg = SolverConfig(
        alpha=spec.alpha,
        variant=variant,
        step_rule="empirical",
        step_c=spec.step_c,
        max_iters=spec.max_iters,
        success_tol=spec.success_tol,
    )
    try:
        trace = run(A, meas, init.U0, cfg, target=target)
    except DivergenceError:
        return None, target
    return trace, target


def _phase_trial(args: tuple) -> list[TrialResult]:
    spec, grid_index, trial_index = args
    out = []
    for variant in spec.variants:
        trace, _ = run_trial_pipeline(spec, grid_index, trial_index, variant)
        if trace is None:
            # A diverged trial counts as a failure, not an excluded run.
            out.append(
                TrialResult(grid_index, trial_index, variant, float("inf"),
                            spec.max_iters, False, True)
            )
        else:
            out.append(
                TrialResult(
                    grid_index,
                    trial_index,
                    variant,
                    trace.final_rel_error,
                    trace.iterations,
                    trace.converged and trace.final_rel_error < spec.success_tol,
                    False,
                )
            )
    return out


def _map_trials(spec: ExperimentSpec, threads: int) -> list[TrialResult]:
    jobs = [
        (spec, g, t) for g in range(len(spec.m_grid)) for t in range(spec.trials)
    ]
    if threads <= 1:
        batches = [_phase_trial(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(_phase_trial, jobs, chunksize=1))
    results = [r for batch in batches for r in batch]
    results.sort(key=lambda r: (r.grid_index, r.trial_index, r.variant))
    return results


@dataclass
class PhaseTransitionReport:
    spec: ExperimentSpec
    rows: list[dict] = field(default_factory=list)
    per_trial: list[TrialResult] = field(default_factory=list)
    wall_time: float = 0.0


def phase_transition(spec: ExperimentSpec, threads: int = 1) -> PhaseTransitionReport:
    """Success rate per (variant, m): fresh X and A every trial."""
    spec.validate()
    t0 = time.perf_counter()
    results = _map_trials(spec, threads)
    rows = []
    for variant in spec.variants:
        for g, m in enumerate(spec.m_grid):
            cell = [r for r in results if r.variant == variant and r.grid_index == g]
            finite = [r.final_rel_error for r in cell if np.isfinite(r.final_rel_error)]
            successes = sum(r.converged for r in cell)
            rows.append(
                {
                    "variant": variant,
                    "m": m,
                    "m_over_nr": m / (spec.n * spec.r),
                    "trials": len(cell),
                    "successes": successes,
                    "success_rate": successes / len(cell),
                    "mean_final_rel_error": float(np.mean(finite)) if finite else float("inf"),
                    "median_final_rel_error": float(np.median(finite)) if finite else float("inf"),
                    "mean_iterations": float(np.mean([r.iterations for r in cell])),
                }
            )
    return PhaseTransitionReport(
        spec=spec, rows=rows, per_trial=results, wall_time=time.perf_counter() - t0
    )


def _convergence_trial(args: tuple) -> list[dict]:
    spec, alpha, variant, seed_index = args
    run_spec = ExperimentSpec(
        n=spec.n, r=spec.r, m_grid=spec.m_grid, trials=spec.trials,
        alpha=alpha, alpha_y=spec.alpha_y, step_c=spec.step_c, sigma=spec.sigma,
        master_seed=spec.master_seed, variants=(variant,),
        max_iters=spec.max_iters, success_tol=spec.success_tol,
    )
    trace, _ = run_trial_pipeline(run_spec, 0, seed_index, variant)
    rows = []
    if trace is None:
        return rows
    for k in range(len(trace.objective)):
        rows.append(
            {
                "variant": variant,
                "alpha": alpha,
                "sigma": spec.sigma,
                "seed_index": seed_index,
                "iteration": k,
                "relative_error": trace.rel_error[k],
                "objective": trace.objective[k],
                "weighted_objective": trace.weighted_objective[k],
                "grad_norm": trace.grad_norm[k],
            }
        )
    return rows


def convergence(spec: ExperimentSpec, threads: int = 1) -> list[dict]:
    """Per-iteration traces at fixed m for each (variant, alpha, seed)."""
    spec.validate()
    if len(spec.m_grid) != 1:
        raise ValueError("convergence runs at a single m")
    alphas = spec.alphas or (spec.alpha,)
    jobs = [
        (spec, alpha, variant, t)
        for variant in spec.variants
        for alpha in alphas
        for t in range(spec.trials)
    ]
    if threads <= 1:
        batches = [_convergence_trial(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(_convergence_trial, jobs, chunksize=1))
    return [row for batch in batches for row in batch]


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12e}"
    return str(v)


def write_csv(path: str | Path, rows: Iterable[dict]) -> None:
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        header = list(rows[0].keys())
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in header])

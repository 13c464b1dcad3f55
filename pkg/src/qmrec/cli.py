"""Benchmark command line: phase-transition, convergence, recover, theory-check, init-quality.

Exit codes: 0 on success, 1 when an asserted probe or acceptance check fails,
2 on usage/validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments, matio, plotting, probes
from .initialization import InitConfig, spectral_init
from .linalg import gaussian_matrix
from .model import MeasurementSet
from .rng import RngStream
from .solver import DivergenceError, SolverConfig, run

PROBE_NAMES = ("concentration", "expectation_identity", "regularity", "init_quality")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--alpha", type=float, default=20.0,
                   help="exponential weight parameter (comma list allowed for convergence)")
    p.add_argument("--alpha-y", type=float, default=9.0, help="truncation parameter")
    p.add_argument("--step-c", type=float, default=0.1,
                   help="empirical step size constant: mu = c * m / sum(y)")
    p.add_argument("--sigma", type=float, default=0.0, help="additive noise std")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--variant", choices=("exp", "plain", "both"), default="exp")
    p.add_argument("--max-iters", type=int, default=3000)
    p.add_argument("--tol", type=float, default=1e-5,
                   help="success threshold on the relative error")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", type=Path, required=True, help="output file path")
    p.add_argument("--no-plot", action="store_true",
                   help="skip rendering the PNG figure next to the CSV")


def _variants(flag: str) -> tuple[str, ...]:
    return {
        "exp": ("exponential",),
        "plain": ("plain",),
        "both": ("exponential", "plain"),
    }[flag]


def _spec_from_args(args, m_grid: list[int], alphas: tuple[float, ...] = ()) -> experiments.ExperimentSpec:
    return experiments.ExperimentSpec(
        n=args.n,
        r=args.r,
        m_grid=tuple(m_grid),
        trials=args.trials,
        alpha=alphas[0] if alphas else args.alpha,
        alphas=alphas,
        alpha_y=args.alpha_y,
        step_c=args.step_c,
        sigma=args.sigma,
        master_seed=args.seed,
        variants=_variants(args.variant),
        max_iters=args.max_iters,
        success_tol=args.tol,
    )


def cmd_phase_transition(args) -> int:
    m_grid = experiments.parse_m_grid(args.m, args.n, args.r)
    spec = _spec_from_args(args, m_grid)
    report = experiments.phase_transition(spec, threads=args.threads)
    experiments.write_csv(args.out, report.rows)
    print(f"wrote {args.out} ({len(report.rows)} rows, {report.wall_time:.1f}s; "
          "X and A resampled each trial)")
    if not args.no_plot:
        fig = plotting.plot_phase_transition(report.rows, args.out.with_suffix(".png"))
        print(f"wrote {fig}")
    return 0


def cmd_convergence(args) -> int:
    m_grid = experiments.parse_m_grid(args.m, args.n, args.r)
    if len(m_grid) != 1:
        raise ValueError("convergence takes a single m")
    alphas = tuple(float(a) for a in str(args.alpha_list or args.alpha).split(","))
    spec = _spec_from_args(args, m_grid, alphas=alphas)
    rows = experiments.convergence(spec, threads=args.threads)
    experiments.write_csv(args.out, rows)
    print(f"wrote {args.out} ({len(rows)} rows)")
    if not args.no_plot:
        fig = plotting.plot_convergence(rows, args.out.with_suffix(".png"))
        print(f"wrote {fig}")
    return 0


def cmd_recover(args) -> int:
    A = matio.load_matrix(args.A)
    y = matio.load_vector(args.y)
    if y.shape[0] != A.shape[0]:
        raise ValueError(
            f"y has {y.shape[0]} entries but A has {A.shape[0]} rows"
        )
    if not 1 <= args.r < A.shape[1]:
        raise ValueError(f"need 1 <= r < n, got r={args.r}, n={A.shape[1]}")
    meas = MeasurementSet(y=y, noiseless=bool(np.all(y >= 0)))
    init = spectral_init(A, meas, args.r, InitConfig(alpha_y=args.alpha_y))
    cfg = SolverConfig(
        alpha=args.alpha,
        variant=_variants(args.variant)[0],
        step_c=args.step_c,
        max_iters=args.max_iters,
        grad_tol=args.grad_tol,
    )
    try:
        trace = run(A, meas, init.U0, cfg)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    matio.save_matrix(args.out, trace.U)
    summary = {
        "m": int(A.shape[0]),
        "n": int(A.shape[1]),
        "r": int(args.r),
        "iterations": trace.iterations,
        "converged": trace.converged,
        "stop_reason": trace.stop_reason,
        "final_objective": trace.objective[-1],
        "final_grad_norm": trace.grad_norm[-1],
        "step_size": trace.step_size,
        "kept_measurements": init.kept_count,
    }
    summary_path = Path(str(args.out) + ".summary.json")
    summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))
    print(f"wrote {args.out} and {summary_path}")
    return 0


def _run_probe(name: str, args) -> probes.ProbeReport:
    stream = RngStream(args.seed, hash_name(name))
    if name == "concentration":
        B = gaussian_matrix(args.probe_n, args.probe_n, stream.child(0))
        M = B @ B.T / args.probe_n
        return probes.concentration_probe(M, args.delta, stream.child(1))
    if name == "expectation_identity":
        n, r = 6, 2
        Q = np.linalg.qr(gaussian_matrix(n, r, stream.child(0)))[0]
        scales = stream.child(1).generator().uniform(0.5, 2.0, size=r)
        X = Q * scales[None, :]
        H = gaussian_matrix(n, r, stream.child(2))
        return probes.expectation_identity_probe(X, H, args.samples, stream.child(3))
    if name == "regularity":
        from .model import measure, random_target, sensing_ensemble

        n, r = 60, 2
        m = 12 * n * r
        target = random_target(n, r, stream.child(0))
        A = sensing_ensemble(m, n, stream.child(1))
        scale = 1.0 / target.fro_norm
        from .model import target_from_matrix

        target = target_from_matrix(target.X * scale)
        meas = measure(target, A)
        return probes.regularity_probe(A, meas, target, args.alpha, 50, stream.child(2))
    if name == "init_quality":
        n, r = 100, 2
        return probes.init_quality_probe(
            n, r, [2 * n * r, 4 * n * r, 8 * n * r], 20, args.alpha_y, stream
        )
    raise KeyError(name)


def hash_name(name: str) -> int:
    # Stable per probe (Python's hash() is salted per process).
    return int.from_bytes(name.encode()[:8].ljust(8, b"\0"), "big")


def cmd_theory_check(args) -> int:
    names = [p.strip() for p in args.probes.split(",") if p.strip()]
    for name in names:
        if name not in PROBE_NAMES:
            print(f"error: unknown probe {name!r} (known: {', '.join(PROBE_NAMES)})",
                  file=sys.stderr)
            return 2
    reports = [_run_probe(name, args) for name in names]
    payload = {
        "seed": args.seed,
        "probes": [r.to_dict() for r in reports],
    }
    args.out.write_text(json.dumps(payload, indent=2) + "\n")
    failed = [r.name for r in reports if r.passed is False]
    for r in reports:
        status = {True: "PASS", False: "FAIL", None: "INFO"}[r.passed]
        print(f"{status} {r.name}")
    print(f"wrote {args.out}")
    return 1 if failed else 0


def cmd_init_quality(args) -> int:
    m_grid = experiments.parse_m_grid(args.m, args.n, args.r)
    report = probes.init_quality_probe(
        args.n, args.r, m_grid, args.trials, args.alpha_y, RngStream(args.seed)
    )
    rows = report.observed["per_m"]
    experiments.write_csv(args.out, rows)
    print(f"wrote {args.out}")
    if not args.no_plot:
        fig = plotting.plot_init_quality(rows, args.out.with_suffix(".png"))
        print(f"wrote {fig}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmrec",
        description="Low-rank recovery from quadratic measurements: benchmarks and probes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phase-transition", help="success rate vs number of measurements")
    _add_common(p)
    p.add_argument("--m", default="1nr,2nr,3nr,4nr",
                   help="comma list of m values, absolute or '<k>nr'")
    p.set_defaults(func=cmd_phase_transition)

    p = sub.add_parser("convergence", help="per-iteration traces at fixed m")
    _add_common(p)
    p.add_argument("--m", default="3nr", help="single m value, absolute or '<k>nr'")
    p.add_argument("--alpha-list", default=None,
                   help="comma list of alpha values (overrides --alpha)")
    p.set_defaults(func=cmd_convergence, trials=1)

    p = sub.add_parser("recover", help="blind recovery from (A, y) files")
    p.add_argument("--A", type=Path, required=True, help="sensing matrix file (m x n)")
    p.add_argument("--y", type=Path, required=True, help="measurement vector file (m x 1)")
    p.add_argument("--r", type=int, required=True, help="target rank")
    p.add_argument("--alpha", type=float, default=20.0)
    p.add_argument("--alpha-y", type=float, default=9.0)
    p.add_argument("--step-c", type=float, default=0.1)
    p.add_argument("--max-iters", type=int, default=3000)
    p.add_argument("--grad-tol", type=float, default=None,
                   help="stationarity stop (default 1e-10 * max(1, f_w(U0)))")
    p.add_argument("--variant", choices=("exp", "plain"), default="exp")
    p.add_argument("--out", type=Path, required=True, help="recovered U output file")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("theory-check", help="run seeded probes of the theory")
    p.add_argument("--probes", default=",".join(PROBE_NAMES),
                   help="comma list of probe names")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=20.0)
    p.add_argument("--alpha-y", type=float, default=9.0)
    p.add_argument("--delta", type=float, default=0.25, help="concentration width")
    p.add_argument("--probe-n", type=int, default=50, help="concentration dimension")
    p.add_argument("--samples", type=int, default=1_000_000,
                   help="Monte-Carlo samples for the identity probe")
    p.add_argument("--out", type=Path, required=True, help="JSON report path")
    p.set_defaults(func=cmd_theory_check)

    p = sub.add_parser("init-quality", help="initialization quality trend vs m")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--m", default="2nr,4nr,8nr")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--alpha-y", type=float, default=9.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_init_quality)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

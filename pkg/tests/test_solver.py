import math

import numpy as np
import pytest

from qmrec import (
    DivergenceError,
    MeasurementSet,
    RngStream,
    SolverConfig,
    exp_gradient,
    exp_weights,
    gaussian_matrix,
    measure,
    objective,
    plain_gradient,
    random_target,
    run,
    sensing_ensemble,
    spectral_init,
    step_size,
)


def _instance(seed, n=4, r=2, m=12):
    s = RngStream(seed, 200)
    t = random_target(n, r, s.child(0))
    A = sensing_ensemble(m, n, s.child(1))
    return t, A, measure(t, A)


def test_exp_weights_constant_y():
    meas = MeasurementSet(y=np.full(7, 3.0))
    w = exp_weights(meas, alpha=20.0)
    assert np.allclose(w, math.exp(-1 / 20), atol=1e-15)


def test_exp_weights_monotone_in_y():
    meas = MeasurementSet(y=np.array([0.1, 0.5, 1.0, 4.0]))
    w = exp_weights(meas, alpha=20.0)
    assert np.all(np.diff(w) < 0)
    assert np.all((0 < w) & (w <= 1))


def test_exp_weights_degenerate():
    with pytest.raises(ValueError):
        exp_weights(MeasurementSet(y=np.array([0.0, 0.0])), 20.0)


def test_gradient_zero_at_truth():
    t, A, meas = _instance(0)
    w = exp_weights(meas, 20.0)
    assert np.array_equal(exp_gradient(t.X, A, meas, w), np.zeros_like(t.X))
    assert np.array_equal(plain_gradient(t.X, A, meas), np.zeros_like(t.X))


def test_gradient_orthogonal_equivariance():
    t, A, meas = _instance(1)
    w = exp_weights(meas, 20.0)
    U = gaussian_matrix(4, 2, RngStream(1, 201))
    theta = 1.1
    O = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    lhs = exp_gradient(U @ O, A, meas, w)
    rhs = exp_gradient(U, A, meas, w) @ O
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_gradients_match_finite_differences(seed):
    from oracles import finite_diff_gradient

    t, A, meas = _instance(seed, n=4, r=2, m=12)
    U = gaussian_matrix(4, 2, RngStream(seed, 202)) * 0.7
    w = exp_weights(meas, 20.0)

    fd_w = finite_diff_gradient(lambda V: objective(V, A, meas, w), U, h=1e-5)
    g_w = exp_gradient(U, A, meas, w)
    assert np.linalg.norm(fd_w - g_w) <= 1e-5 * max(1.0, np.linalg.norm(g_w))

    fd = finite_diff_gradient(lambda V: objective(V, A, meas), U, h=1e-5)
    g = plain_gradient(U, A, meas)
    assert np.linalg.norm(fd - g) <= 1e-5 * max(1.0, np.linalg.norm(g))


def test_plain_is_exp_with_huge_alpha():
    t, A, meas = _instance(2)
    U = gaussian_matrix(4, 2, RngStream(2, 203))
    w = exp_weights(meas, 1e12)
    assert np.max(np.abs(exp_gradient(U, A, meas, w) - plain_gradient(U, A, meas))) <= 1e-9


def test_objective_hand_cases():
    t, A, meas = _instance(3)
    assert objective(t.X, A, meas) == 0.0
    assert objective(np.zeros_like(t.X), A, meas) == pytest.approx(
        np.sum(meas.y**2) / (4 * meas.m)
    )
    # m = 1, A = (1, 0), X = e1, U = 2 e1: f = (1 - 4)^2 / 4
    A1 = np.array([[1.0, 0.0]])
    meas1 = measure(np.array([[1.0], [0.0]]), A1)
    assert objective(np.array([[2.0], [0.0]]), A1, meas1) == pytest.approx(2.25)


def test_empirical_step_size():
    meas = MeasurementSet(y=np.ones(5))
    assert step_size(SolverConfig(), meas) == pytest.approx(0.1)


def test_theory_step_size_plugin():
    # sigma_1 = sigma_r = ||X||_F^2 = 1, alpha = 20: mu = 1 / 50000
    meas = MeasurementSet(y=np.ones(5))
    cfg = SolverConfig(alpha=20.0, step_rule="theory")
    assert step_size(cfg, meas, spectrum=np.array([1.0])) == pytest.approx(1 / 50000)


def test_fixed_step_rule():
    meas = MeasurementSet(y=np.ones(5))
    cfg = SolverConfig(step_rule="fixed", step_mu=0.05)
    assert step_size(cfg, meas) == 0.05
    with pytest.raises(ValueError):
        step_size(SolverConfig(step_rule="fixed"), meas)


def test_run_is_fixed_point_at_truth():
    t, A, meas = _instance(4, n=6, r=2, m=30)
    trace = run(A, meas, t.X, SolverConfig(), target=t)
    assert trace.converged
    assert trace.iterations == 0
    assert trace.rel_error[0] == pytest.approx(0.0, abs=1e-12)


def test_run_descends_and_matches_manual_recursion():
    # Re-evaluate f_w along an independently recomputed iterate sequence.
    s = RngStream(12, 0)
    n, r = 20, 2
    t = random_target(n, r, s.child(0))
    A = sensing_ensemble(8 * n * r, n, s.child(1))
    meas = measure(t, A)
    init = spectral_init(A, meas, r)
    cfg = SolverConfig(max_iters=300)
    trace = run(A, meas, init.U0, cfg, target=t)

    w = exp_weights(meas, cfg.alpha)
    mu = cfg.step_c * meas.m / np.sum(meas.y)
    U = init.U0.copy()
    for k in range(len(trace.weighted_objective)):
        fw = objective(U, A, meas, w)
        assert fw == pytest.approx(trace.weighted_objective[k], rel=1e-12, abs=1e-300)
        if k + 1 < len(trace.weighted_objective):
            assert trace.weighted_objective[k + 1] <= fw  # strict descent here
        AU = A @ U
        resid = np.einsum("ij,ij->i", AU, AU) - meas.y
        U = U - mu * (A.T @ ((w * resid)[:, None] * AU) / meas.m)


def test_run_orbit_equivariance():
    t, A, meas = _instance(5, n=8, r=2, m=80)
    init = spectral_init(A, meas, 2)
    theta = 0.4
    O = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    cfg = SolverConfig(max_iters=50, success_tol=1e-14)
    a = run(A, meas, init.U0, cfg, target=t)
    b = run(A, meas, init.U0 @ O, cfg, target=t)
    assert np.allclose(a.rel_error, b.rel_error, atol=1e-8)
    assert np.allclose(a.U @ O, b.U, atol=1e-8)


def test_run_divergence_guard():
    t, A, meas = _instance(6, n=6, r=1, m=12)
    U0 = gaussian_matrix(6, 1, RngStream(6, 204))
    cfg = SolverConfig(step_rule="fixed", step_mu=10.0, max_iters=100)
    with pytest.raises(DivergenceError) as exc_info:
        run(A, meas, U0, cfg, target=t)
    assert exc_info.value.trace.stop_reason == "diverged"


def test_run_gradient_stop_without_target():
    t, A, meas = _instance(7, n=10, r=2, m=160)
    init = spectral_init(A, meas, 2)
    trace = run(A, meas, init.U0, SolverConfig(max_iters=3000))
    assert trace.converged
    assert trace.stop_reason == "gradient norm below grad_tol"
    assert trace.rel_error is None


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(alpha=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(variant="momentum")
    with pytest.raises(ValueError):
        SolverConfig(max_iters=0)

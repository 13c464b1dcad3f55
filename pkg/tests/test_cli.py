import json

import numpy as np
import pytest

from qmrec import RngStream, measure, random_target, relative_error, sensing_ensemble
from qmrec.cli import main
from qmrec.matio import load_matrix, load_vector, save_matrix


def test_matrix_round_trip(tmp_path):
    M = np.array([[1.5, -2.0], [0.25, 1e-14], [3.0, 4.0]])
    path = tmp_path / "m.txt"
    save_matrix(path, M)
    assert np.array_equal(load_matrix(path), M)


def test_matrix_header_mismatch(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3 2\n1 2\n3 4\n")
    with pytest.raises(ValueError, match="3x2"):
        load_matrix(path)


def test_vector_requires_single_column(tmp_path):
    path = tmp_path / "v.txt"
    save_matrix(path, np.ones((3, 2)))
    with pytest.raises(ValueError):
        load_vector(path)


def _write_instance(tmp_path, seed=0, n=30, r=2, mult=8):
    s = RngStream(seed, 500)
    t = random_target(n, r, s.child(0))
    A = sensing_ensemble(mult * n * r, n, s.child(1))
    meas = measure(t, A)
    save_matrix(tmp_path / "A.txt", A)
    save_matrix(tmp_path / "y.txt", meas.y[:, None])
    return t, A, meas


def test_recover_round_trip(tmp_path):
    t, A, meas = _write_instance(tmp_path)
    out = tmp_path / "U.txt"
    rc = main([
        "recover", "--A", str(tmp_path / "A.txt"), "--y", str(tmp_path / "y.txt"),
        "--r", "2", "--out", str(out),
    ])
    assert rc == 0
    U = load_matrix(out)
    assert relative_error(U, t.X) < 1e-4
    summary = json.loads((tmp_path / "U.txt.summary.json").read_text())
    assert summary["converged"]


def test_recover_length_mismatch_names_both_counts(tmp_path, capsys):
    _write_instance(tmp_path)
    save_matrix(tmp_path / "y.txt", np.ones((7, 1)))
    rc = main([
        "recover", "--A", str(tmp_path / "A.txt"), "--y", str(tmp_path / "y.txt"),
        "--r", "2", "--out", str(tmp_path / "U.txt"),
    ])
    assert rc == 2
    err = capsys.readouterr().err
    assert "7" in err and "480" in err


def test_recover_rejects_r_at_least_n(tmp_path):
    _write_instance(tmp_path)
    rc = main([
        "recover", "--A", str(tmp_path / "A.txt"), "--y", str(tmp_path / "y.txt"),
        "--r", "30", "--out", str(tmp_path / "U.txt"),
    ])
    assert rc == 2


def test_phase_transition_small_run_and_determinism(tmp_path):
    args = [
        "phase-transition", "--n", "24", "--r", "2", "--m", "2nr,6nr",
        "--trials", "4", "--seed", "11", "--max-iters", "400",
    ]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2), "--threads", "2"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert (tmp_path / "a.png").exists()
    header = out1.read_text().splitlines()[0]
    assert header.startswith("variant,m,m_over_nr,trials,successes,success_rate")


def test_phase_transition_rejects_zero_trials(tmp_path):
    rc = main([
        "phase-transition", "--n", "24", "--r", "2", "--m", "2nr",
        "--trials", "0", "--out", str(tmp_path / "x.csv"),
    ])
    assert rc == 2
    assert not (tmp_path / "x.csv").exists()


def test_phase_transition_bad_m_spec(tmp_path):
    rc = main([
        "phase-transition", "--n", "24", "--r", "2", "--m", "2xy",
        "--out", str(tmp_path / "x.csv"),
    ])
    assert rc == 2


def test_convergence_small_run(tmp_path):
    out = tmp_path / "conv.csv"
    rc = main([
        "convergence", "--n", "24", "--r", "2", "--m", "6nr",
        "--alpha-list", "20,100", "--seed", "3", "--max-iters", "500",
        "--out", str(out),
    ])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == (
        "variant,alpha,sigma,seed_index,iteration,relative_error,"
        "objective,weighted_objective,grad_norm"
    )
    assert len(lines) > 10
    assert (tmp_path / "conv.png").exists()


def test_theory_check_small(tmp_path):
    out = tmp_path / "probes.json"
    rc = main([
        "theory-check", "--probes", "concentration,expectation_identity",
        "--samples", "50000", "--probe-n", "20", "--seed", "1",
        "--out", str(out),
    ])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert {p["name"] for p in payload["probes"]} == {
        "concentration", "expectation_identity",
    }
    assert all(p["passed"] for p in payload["probes"])


def test_theory_check_unknown_probe(tmp_path, capsys):
    rc = main(["theory-check", "--probes", "foo", "--out", str(tmp_path / "p.json")])
    assert rc == 2
    assert "unknown probe" in capsys.readouterr().err


def test_init_quality_command(tmp_path):
    out = tmp_path / "init.csv"
    rc = main([
        "init-quality", "--n", "30", "--r", "2", "--m", "2nr,4nr",
        "--trials", "5", "--out", str(out),
    ])
    assert rc == 0
    assert out.exists()
    assert (tmp_path / "init.png").exists()

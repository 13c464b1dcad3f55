"""Plain-text matrix files: first line "rows cols", then one row per line."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def save_matrix(path: str | Path, M: np.ndarray) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w") as f:
        f.write(f"{M.shape[0]} {M.shape[1]}\n")
        for row in M:
            f.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_matrix(path: str | Path) -> np.ndarray:
    path = Path(path)
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: first line must be 'rows cols'")
        try:
            rows, cols = int(header[0]), int(header[1])
        except ValueError:
            raise ValueError(f"{path}: first line must be 'rows cols'") from None
        data = np.loadtxt(f, ndmin=2)
    if data.shape != (rows, cols):
        raise ValueError(
            f"{path}: header promises {rows}x{cols} but body is {data.shape[0]}x{data.shape[1]}"
        )
    return data


def load_vector(path: str | Path) -> np.ndarray:
    """A vector is a matrix with a single column (or a single row)."""
    M = load_matrix(path)
    if M.shape[1] == 1:
        return M[:, 0]
    if M.shape[0] == 1:
        return M[0, :]
    raise ValueError(f"{path}: expected a single-column (or single-row) matrix")

"""Seeded, splittable random streams for reproducible parallel trials."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RngStream:
    """A value identifying one reproducible random sequence.

    Two streams with distinct (master_seed, stream_id) pairs are statistically
    independent; the same pair always reproduces the identical sequence.  A
    stream is a pure value: ``generator()`` builds a fresh generator starting
    at the beginning of the sequence every time it is called.
    """

    master_seed: int
    stream_id: int = 0
    _path: tuple[int, ...] = field(default=())

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence([self.master_seed, self.stream_id, *self._path])
        )

    def child(self, key: int) -> "RngStream":
        """Derive an independent sub-stream (e.g. one per pipeline stage)."""
        return RngStream(self.master_seed, self.stream_id, self._path + (key,))

"""Seeded, counter-based random streams with index-addressable substreams.

Every stream is a Philox generator keyed by ``SeedSequence(seed, spawn_key=path)``,
so the stream for ``(seed, path)`` is the same on every platform and does not
depend on which worker consumes it. Batch work is cut into fixed-size blocks and
block ``j`` always draws from ``stream.substream(j)``; results are therefore
identical for any number of workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

SEED_MASK = (1 << 64) - 1


class RngStream:
    def __init__(self, seed: int, path: Sequence[int] = ()):
        self.seed = int(seed) & SEED_MASK
        self.path = tuple(int(i) for i in path)
        self._gen: np.random.Generator | None = None

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
            self._gen = np.random.Generator(np.random.Philox(ss))
        return self._gen

    def substream(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.path + (int(index),))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, path={self.path})"


def as_stream(rng) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if rng is None:
        raise TypeError("a seed or RngStream is required")
    return RngStream(int(rng))


def default_workers() -> int:
    env = os.environ.get("QCL_THREADS")
    if env:
        return max(1, int(env))
    return 1


def block_sizes(n: int, block: int) -> list[int]:
    full, rest = divmod(n, block)
    return [block] * full + ([rest] if rest else [])


def map_blocks(fn: Callable[[int], T], n_blocks: int, workers: int | None = None) -> list[T]:
    """Evaluate ``fn(0..n_blocks-1)`` and return results in index order."""
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or n_blocks <= 1:
        return [fn(j) for j in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_blocks)))


def unit_ball(gen: np.random.Generator, n: int, dim: int, radius=1.0) -> np.ndarray:
    """Uniform points in a ball by rejection from the enclosing cube, shape (n, dim)."""
    radius = np.broadcast_to(np.asarray(radius, dtype=float), (n,))
    out = np.empty((n, dim))
    todo = np.arange(n)
    while todo.size:
        cand = gen.uniform(-1.0, 1.0, size=(todo.size, dim))
        ok = np.einsum("ij,ij->i", cand, cand) <= 1.0
        out[todo[ok]] = cand[ok]
        todo = todo[~ok]
    return out * radius[:, None]


def powered_ball(gen: np.random.Generator, n: int, dim: int, radius, power: float) -> np.ndarray:
    """Points in a ball of given radius with density proportional to (R^2 - |y|^2)^power.

    With s = |y|^2 / R^2 the radial law is Beta(dim/2, power + 1); the direction
    is uniform on the sphere.
    """
    radius = np.broadcast_to(np.asarray(radius, dtype=float), (n,))
    s = gen.beta(dim / 2.0, power + 1.0, size=n)
    z = gen.standard_normal(size=(n, dim))
    norm = np.sqrt(np.einsum("ij,ij->i", z, z))
    norm[norm == 0.0] = 1.0
    return z / norm[:, None] * (radius * np.sqrt(s))[:, None]


def to_field(y: np.ndarray, complex_field: bool) -> np.ndarray:
    """Interpret real coordinates (n, 2m) as C^m when ``complex_field``."""
    if not complex_field:
        return y
    m = y.shape[1] // 2
    return y[:, :m] + 1j * y[:, m:]

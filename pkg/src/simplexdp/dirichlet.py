"""The Dirichlet mechanism: sampling from and evaluating Dir(k p).

Randomness is always passed in explicitly. :class:`RngSeed` names a
reproducible stream; batch routines split work into fixed-size chunks, each
drawn from its own child stream, so results do not depend on how many worker
threads process the chunks.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BoundarySampleWarning, DomainError
from .specfun import log_multivariate_beta

__all__ = [
    "RngSeed",
    "DirichletParams",
    "sample",
    "sample_batch",
    "log_density",
    "worker_count",
    "chunked",
]

MIN_SHAPE = 1e-12
BOUNDARY_FLOOR = 1e-300
CHUNK_SIZE = 1 << 16
THREADS_ENV = "SIMPLEXDP_THREADS"


@dataclass(frozen=True)
class RngSeed:
    """Address of a reproducible random stream.

    ``seed`` and ``stream_id`` identify the root stream; ``path`` holds the
    keys of nested child streams (row index, repetition index, chunk index...).
    """

    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self):
        for v in (self.seed, self.stream_id, *self.path):
            if not 0 <= int(v) < 2**64:
                raise ValueError("seed, stream id and path keys must be unsigned 64-bit integers")

    def spawn(self, *keys: int) -> "RngSeed":
        return RngSeed(self.seed, self.stream_id, self.path + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.PCG64(seq))


def as_seed(rng) -> RngSeed:
    if isinstance(rng, RngSeed):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngSeed(int(rng))
    raise TypeError(f"expected an RngSeed or integer seed, got {type(rng).__name__}")


@dataclass(frozen=True, eq=False)
class DirichletParams:
    """Centre ``p`` (a point of the open simplex) and concentration ``k``."""

    p: np.ndarray
    k: float

    def __post_init__(self):
        p = np.asarray(getattr(self.p, "probs", self.p), dtype=np.float64)
        if p.ndim != 1 or p.size < 2:
            raise DomainError("p must be a vector with at least two entries")
        if not np.isfinite(self.k) or self.k <= 0:
            raise DomainError(f"k must be positive, got {self.k!r}")
        if np.any(p <= 0):
            raise DomainError("p must lie in the interior of the simplex (all entries > 0)")
        if abs(p.sum() - 1.0) > 1e-9:
            raise DomainError(f"p must sum to 1, sums to {p.sum()!r}")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "k", float(self.k))

    @property
    def shapes(self) -> np.ndarray:
        return self.k * self.p

    @property
    def n(self) -> int:
        return self.p.size


def _standard_gamma(gen: np.random.Generator, shapes: np.ndarray, size: int) -> np.ndarray:
    # numpy's standard_gamma is Marsaglia-Tsang squeeze/rejection for shape >= 1;
    # shapes below 1 are boosted: G(a) = G(a + 1) * U**(1/a).
    small = shapes < 1.0
    boosted = np.where(small, shapes + 1.0, shapes)
    g = gen.standard_gamma(boosted, size=(size, shapes.size))
    if np.any(small):
        u = gen.random(size=(size, int(small.sum())))
        g[:, small] *= u ** (1.0 / shapes[small])
    return g


def _draw(params: DirichletParams, gen: np.random.Generator, size: int) -> np.ndarray:
    shapes = params.shapes
    if np.any(shapes < MIN_SHAPE):
        raise DomainError(
            f"Dirichlet shape k*p_i = {shapes.min():.3g} underflows; "
            "use a larger k or merge sparse categories"
        )
    g = _standard_gamma(gen, shapes, size)
    hit = g <= 0.0
    if np.any(hit):
        warnings.warn(
            f"{int(hit.sum())} gamma variate(s) underflowed to 0 and were set to {BOUNDARY_FLOOR:g}",
            BoundarySampleWarning,
            stacklevel=3,
        )
        g[hit] = BOUNDARY_FLOOR
    return g / g.sum(axis=1, keepdims=True)


def sample(params: DirichletParams, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw from Dir(k p) by normalising independent Gamma(k p_i) variates.

    Returns a vector of length n, or an array of shape ``(size, n)``.
    """
    draws = _draw(params, rng, 1 if size is None else int(size))
    return draws[0] if size is None else draws


def worker_count() -> int:
    """Number of worker threads, capped by the ``SIMPLEXDP_THREADS`` variable."""
    raw = os.environ.get(THREADS_ENV, "")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    return max(1, cap if cap > 0 else (os.cpu_count() or 1))


def chunked(
    fn: Callable[[np.random.Generator, int], object],
    total: int,
    seed: RngSeed,
    chunk: int = CHUNK_SIZE,
    workers: int | None = None,
) -> list:
    """Run ``fn(generator, size)`` over ``total`` items split into fixed chunks.

    Chunk ``c`` always uses the stream ``seed.spawn(c)``, and results come back
    in chunk order, so the output is identical for any worker count.
    """
    sizes = [min(chunk, total - start) for start in range(0, total, chunk)]
    jobs = [(seed.spawn(c), s) for c, s in enumerate(sizes)]
    workers = worker_count() if workers is None else max(1, int(workers))

    def run(job):
        sub, size = job
        return fn(sub.generator(), size)

    if workers == 1 or len(jobs) == 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))


def sample_batch(params: DirichletParams, M: int, seed, chunk: int = CHUNK_SIZE) -> np.ndarray:
    """``M`` draws of Dir(k p) as an ``(M, n)`` array, deterministic for a fixed seed."""
    parts = chunked(lambda gen, size: _draw(params, gen, size), int(M), as_seed(seed), chunk)
    return np.concatenate(parts, axis=0)


def log_density(params: DirichletParams, x: Sequence[float]) -> float:
    """Log of the Dir(k p) density at an interior point ``x`` of the simplex."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != params.p.shape:
        raise DomainError(f"x has shape {x.shape}, expected {params.p.shape}")
    if np.any(x <= 0) or abs(x.sum() - 1.0) > 1e-9:
        raise DomainError("x must be strictly inside the simplex")
    shapes = params.shapes
    return float(-log_multivariate_beta(shapes) + np.sum((shapes - 1.0) * np.log(x)))

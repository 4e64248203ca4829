"""Reproducible multinomial sampling on counter-based random streams.

Draws are generated by the conditional-binomial decomposition: cell ``i``
receives a binomial share of the trials still unassigned, with success
probability ``p_i`` renormalized by the remaining tail mass.  Each
replicate consumes a fixed, counter-aligned span of the Philox output
stream, so a batch can be split at any offset and regenerated
draw-for-draw, independent of how work is scheduled across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy
from numpy.random import Generator, Philox
from scipy.stats import binom

__all__ = ["SeedSpec", "sample_multinomial", "sample_batch", "generator_id"]

from .stats import ObservedCounts

_U64 = 1 << 64

# Philox-4x64 emits 4 64-bit words per counter increment; Generator.random
# consumes one word per double.
_WORDS_PER_BLOCK = 4


@dataclass(frozen=True)
class SeedSpec:
    """Addresses one independent random substream.

    ``master_seed`` selects the experiment; ``stream_id`` selects one task
    within it.  Distinct pairs key distinct Philox cipher streams, so any
    assignment of tasks to workers reproduces the same draws.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for label, value in (("master_seed", self.master_seed),
                             ("stream_id", self.stream_id)):
            if not 0 <= value < _U64:
                raise ValueError(f"{label} must be in [0, 2**64)")

    @property
    def philox_key(self) -> int:
        return self.master_seed * _U64 + self.stream_id

    def with_stream(self, stream_id: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, stream_id)


def generator_id() -> str:
    """Identity and versions of the random machinery, for provenance."""
    return (
        f"philox4x64(numpy {np.__version__}) "
        f"conditional-binomial(scipy {scipy.__version__})"
    )


def _blocks_per_replicate(k: int) -> int:
    # One uniform per cell except the last; rounded up to whole blocks so
    # every replicate starts on a counter boundary.
    return max(1, -((k - 1) // -_WORDS_PER_BLOCK))


def _uniforms(seed: SeedSpec, k: int, reps: int, offset: int) -> np.ndarray:
    bpr = _blocks_per_replicate(k)
    bg = Philox(key=seed.philox_key)
    if offset:
        bg.advance(offset * bpr)
    u = Generator(bg).random(reps * bpr * _WORDS_PER_BLOCK)
    return u.reshape(reps, bpr * _WORDS_PER_BLOCK)[:, : k - 1]


def sample_batch(p, N: int, reps: int, seed: SeedSpec, offset: int = 0) -> np.ndarray:
    """Draw ``reps`` multinomial(N, p) count vectors as an (reps, k) array.

    ``offset`` indexes into the replicate sequence of this stream: the
    concatenation of ``sample_batch(..., reps=a, offset=0)`` and
    ``sample_batch(..., reps=b, offset=a)`` equals
    ``sample_batch(..., reps=a + b)`` exactly.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("p must be a 1-d probability vector")
    if np.any(p < 0):
        raise ValueError("probabilities must be nonnegative")
    if abs(float(p.sum()) - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {float(p.sum())!r}, not 1")
    if N < 1:
        raise ValueError("sample size N must be a positive integer")
    if reps < 0 or offset < 0:
        raise ValueError("reps and offset must be nonnegative")
    k = p.size
    if reps == 0:
        return np.empty((0, k), dtype=np.int64)
    if k == 1:
        return np.full((reps, 1), N, dtype=np.int64)

    u = _uniforms(seed, k, reps, offset)
    # tail[i] = p_i + p_{i+1} + ... ; computed backwards for stability
    tail = np.empty(k)
    acc = 0.0
    for i in range(k - 1, -1, -1):
        acc += float(p[i])
        tail[i] = acc

    counts = np.empty((reps, k), dtype=np.int64)
    remaining = np.full(reps, N, dtype=np.int64)
    for i in range(k - 1):
        if tail[i] <= 0.0:
            counts[:, i] = 0
            continue
        cond = min(float(p[i]) / tail[i], 1.0)
        drawn = binom.ppf(u[:, i], remaining, cond).astype(np.int64)
        counts[:, i] = drawn
        remaining = remaining - drawn
    counts[:, k - 1] = remaining
    return counts


def sample_multinomial(p, N: int, seed: SeedSpec) -> ObservedCounts:
    """Draw a single multinomial(N, p) observation."""
    return ObservedCounts(sample_batch(p, N, 1, seed)[0])

"""Null distributions of the statistics and level-bracketing cutoffs.

Because the statistics are discrete, a cutoff attaining any prescribed
level exactly is generally unavailable.  This module builds the null
distribution of a statistic either exactly (by enumerating every
composition of the sample size over the cells, weighted by the
multinomial pmf) or empirically (by Monte Carlo), and extracts the two
adjacent attainable cutoffs whose sizes straddle a target level.

The rejection rule is strictly ``T > c`` throughout.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from .errors import BracketError, CapacityError
from .sampling import SeedSpec, generator_id, sample_batch
from .stats import VALUE_RTOL, NullModel, StatisticKind, evaluate_batch

__all__ = [
    "NullDistribution",
    "CriticalBracket",
    "count_compositions",
    "iter_composition_chunks",
    "exact_null_distribution",
    "exact_null_distributions",
    "mc_null_distribution",
    "mc_null_distributions",
    "survival_at",
    "critical_bracket",
    "rejection_mask",
    "NullDistributionCache",
]

#: Largest composition count enumerated exactly by default (about N <= 20
#: at k = 10); beyond it callers fall back to Monte Carlo.
DEFAULT_COMPOSITION_BUDGET = 20_000_000

_CHUNK_ROWS = 250_000


def count_compositions(n: int, k: int) -> int:
    """Number of ways to split ``n`` items over ``k`` ordered cells."""
    return math.comb(n + k - 1, k - 1)


def _composition_table(n: int, k: int, memo: dict) -> np.ndarray:
    key = (n, k)
    cached = memo.get(key)
    if cached is not None:
        return cached
    if k == 1:
        out = np.array([[n]], dtype=np.int32)
    else:
        blocks = []
        for v in range(n + 1):
            sub = _composition_table(n - v, k - 1, memo)
            first = np.full((sub.shape[0], 1), v, dtype=np.int32)
            blocks.append(np.hstack([first, sub]))
        out = np.vstack(blocks)
    out.setflags(write=False)
    memo[key] = out
    return out


def iter_composition_chunks(n: int, k: int, max_rows: int = _CHUNK_ROWS,
                            _memo: dict | None = None):
    """Yield every composition of ``n`` into ``k`` parts, in fixed order.

    Chunks are (rows, k) int32 arrays of at most ``max_rows`` rows each
    (single-cell tables may be smaller).  The chunk boundaries depend only
    on ``(n, k, max_rows)``, so partitioned processing merges to the same
    result as a sequential pass.
    """
    memo: dict = {} if _memo is None else _memo
    if k == 1 or count_compositions(n, k) <= max_rows:
        yield _composition_table(n, k, memo)
        return
    for v in range(n + 1):
        for sub in iter_composition_chunks(n - v, k - 1, max_rows, memo):
            first = np.full((sub.shape[0], 1), v, dtype=np.int32)
            yield np.hstack([first, sub])


@dataclass(eq=False)
class NullDistribution:
    """Distribution of one statistic under a null model.

    ``values`` is strictly ascending (possibly ending with ``+inf``),
    ``masses`` the probability of each value, ``survival[j] = P(T >
    values[j])``.  ``source`` is ``"exact"`` or ``"monte_carlo"``.
    """

    kind: StatisticKind
    values: np.ndarray
    masses: np.ndarray
    survival: np.ndarray
    source: str
    model: NullModel
    reps: int | None = None
    seed: SeedSpec | None = None

    def __post_init__(self) -> None:
        if not (len(self.values) == len(self.masses) == len(self.survival)):
            raise ValueError("values, masses and survival must align")
        if np.any(np.diff(self.survival) > 0):
            raise ValueError("survival function must be non-increasing")
        for arr in (self.values, self.masses, self.survival):
            arr.setflags(write=False)

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.masses.tolist()))


def _values_close(a: float, b: float, rtol: float = VALUE_RTOL) -> bool:
    if a == b:
        return True
    if not (math.isfinite(a) and math.isfinite(b)):
        return False
    return abs(a - b) <= rtol * max(abs(a), abs(b))


def _merge_close(values: np.ndarray, masses: np.ndarray,
                 rtol: float = VALUE_RTOL) -> tuple[np.ndarray, np.ndarray]:
    # values ascending; collapse runs that differ only by floating noise
    if len(values) == 0:
        return values, masses
    prev, cur = values[:-1], values[1:]
    eq = cur == prev
    with np.errstate(invalid="ignore"):
        rel = np.isfinite(cur) & ((cur - prev) <= rtol * np.abs(cur))
    starts = np.flatnonzero(np.concatenate(([True], ~(eq | rel))))
    return values[starts], np.add.reduceat(masses, starts)


def _build_distribution(kind: StatisticKind, value_chunks, mass_chunks,
                        source: str, model: NullModel,
                        reps: int | None, seed: SeedSpec | None) -> NullDistribution:
    values = np.concatenate(value_chunks)
    masses = np.concatenate(mass_chunks)
    order = np.argsort(values, kind="stable")
    values, masses = _merge_close(values[order], masses[order])
    tail = np.cumsum(masses[::-1])[::-1]
    survival = np.concatenate((tail[1:], [0.0]))
    return NullDistribution(
        kind=kind, values=values, masses=masses, survival=survival,
        source=source, model=model, reps=reps, seed=seed,
    )


def _chunk_probabilities(chunk: np.ndarray, model: NullModel) -> np.ndarray:
    O = chunk.astype(np.float64)
    with np.errstate(divide="ignore"):
        logp = np.log(np.where(model.p0 > 0, model.p0, 1.0))
        logp[model.p0 == 0] = -np.inf
    acc = np.full(chunk.shape[0], float(gammaln(model.N + 1)))
    with np.errstate(invalid="ignore"):
        for i in range(model.k):
            acc = acc - gammaln(O[:, i] + 1.0)
            contrib = O[:, i] * logp[i]
            acc = acc + np.where(chunk[:, i] > 0, contrib, 0.0)
    return np.exp(acc)


def _aggregate(values: np.ndarray, weights: np.ndarray):
    uniq, inverse = np.unique(values, return_inverse=True)
    return uniq, np.bincount(inverse, weights=weights, minlength=len(uniq))


def exact_null_distributions(kinds, model: NullModel,
                             budget: int = DEFAULT_COMPOSITION_BUDGET,
                             ) -> dict[StatisticKind, NullDistribution]:
    """Exact null distributions of several statistics at once.

    Enumerates the composition space a single time and evaluates every
    requested statistic per chunk.  Raises :class:`CapacityError` when the
    space is larger than ``budget``.
    """
    kinds = tuple(kinds)
    total = count_compositions(model.N, model.k)
    if total > budget:
        raise CapacityError(
            f"exact enumeration needs {total} compositions "
            f"(N={model.N}, k={model.k}); budget is {budget}"
        )
    value_chunks = {kind: [] for kind in kinds}
    mass_chunks = {kind: [] for kind in kinds}
    seen = 0
    for chunk in iter_composition_chunks(model.N, model.k):
        seen += chunk.shape[0]
        probs = _chunk_probabilities(chunk, model)
        for kind in kinds:
            vals = evaluate_batch(kind, chunk, model)
            uniq, wsum = _aggregate(vals, probs)
            value_chunks[kind].append(uniq)
            mass_chunks[kind].append(wsum)
    assert seen == total, "composition enumeration is incomplete"
    return {
        kind: _build_distribution(kind, value_chunks[kind], mass_chunks[kind],
                                  "exact", model, reps=None, seed=None)
        for kind in kinds
    }


def exact_null_distribution(kind: StatisticKind, model: NullModel,
                            budget: int = DEFAULT_COMPOSITION_BUDGET,
                            ) -> NullDistribution:
    """Exact null distribution of a single statistic."""
    return exact_null_distributions((kind,), model, budget)[kind]


def mc_null_distributions(kinds, model: NullModel, reps: int, seed: SeedSpec,
                          ) -> dict[StatisticKind, NullDistribution]:
    """Empirical null distributions from one shared batch of null draws."""
    kinds = tuple(kinds)
    if reps < 100:
        raise ValueError("need at least 100 replications")
    counts = sample_batch(model.p0, model.N, reps, seed)
    out = {}
    for kind in kinds:
        vals = evaluate_batch(kind, counts, model)
        uniq, n = _aggregate(vals, np.ones(len(vals)))
        out[kind] = _build_distribution(
            kind, [uniq], [n / reps], "monte_carlo", model, reps=reps, seed=seed,
        )
    return out


def mc_null_distribution(kind: StatisticKind, model: NullModel, reps: int,
                         seed: SeedSpec) -> NullDistribution:
    """Empirical null distribution of a single statistic."""
    return mc_null_distributions((kind,), model, reps, seed)[kind]


def survival_at(dist: NullDistribution, c: float) -> float:
    """P(T > c) under the distribution, by step-function lookup."""
    if math.isinf(c):
        return 1.0 if c < 0 else 0.0
    values, survival = dist.values, dist.survival
    idx = int(np.searchsorted(values, c, side="left"))
    for j in (idx, idx - 1):
        if 0 <= j < len(values) and _values_close(float(values[j]), float(c)):
            return float(survival[j])
    if idx == 0:
        return 1.0
    return float(survival[idx - 1])


@dataclass(frozen=True)
class CriticalBracket:
    """The two adjacent attainable cutoffs straddling a target level.

    ``c_liberal`` attains at least the target size, ``c_conservative`` at
    most.  ``exact_hit`` marks the rare case where some cutoff attains the
    target exactly; both sides then coincide.
    """

    c_liberal: float
    alpha_liberal: float
    c_conservative: float
    alpha_conservative: float
    exact_hit: bool


def critical_bracket(dist: NullDistribution, target: float) -> CriticalBracket:
    """Bracket a target rejection level between attainable sizes."""
    if not 0.0 < target < 1.0:
        raise ValueError("target level must be strictly between 0 and 1")
    survival = dist.survival
    exact = np.flatnonzero(
        np.isclose(survival, target, rtol=1e-12, atol=0.0)
    )
    if exact.size:
        j = int(exact[0])
        c = float(dist.values[j])
        a = float(survival[j])
        return CriticalBracket(c, a, c, a, exact_hit=True)
    below = survival < target
    j = int(np.argmax(below))
    if not below[j] or j == 0:
        raise BracketError(
            f"cannot bracket level {target}: the distribution has "
            f"{len(dist.values)} support value(s) and attained sizes "
            "do not straddle the target"
        )
    return CriticalBracket(
        c_liberal=float(dist.values[j - 1]),
        alpha_liberal=float(survival[j - 1]),
        c_conservative=float(dist.values[j]),
        alpha_conservative=float(survival[j]),
        exact_hit=False,
    )


def rejection_mask(values, cutoff: float, rtol: float = VALUE_RTOL) -> np.ndarray:
    """Which statistic values reject at cutoff ``c`` under ``T > c``.

    Values within floating noise of the cutoff count as ties, not
    rejections, mirroring how equal attainable values are merged.
    """
    values = np.asarray(values, dtype=np.float64)
    if math.isinf(cutoff):
        return (np.zeros if cutoff > 0 else np.ones)(len(values), dtype=bool)
    scale = np.maximum(np.abs(values), abs(cutoff))
    with np.errstate(invalid="ignore"):
        tie = np.isfinite(values) & (np.abs(values - cutoff) <= rtol * scale)
    return (values > cutoff) & ~tie


# -- serialization ----------------------------------------------------------

def _encode_value(x: float):
    return "inf" if math.isinf(x) else float(x)

def _decode_value(x) -> float:
    return math.inf if x == "inf" else float(x)


def to_json_dict(dist: NullDistribution) -> dict:
    """Serializable document for caching a null distribution."""
    return {
        "schema": "gofpower-nulldist/1",
        "kind": dist.kind.value,
        "source": dist.source,
        "reps": dist.reps,
        "seed": None if dist.seed is None else {
            "master_seed": dist.seed.master_seed,
            "stream_id": dist.seed.stream_id,
        },
        "generator": generator_id(),
        "model": {
            "k": dist.model.k,
            "N": dist.model.N,
            "p0": [float(p) for p in dist.model.p0],
        },
        "values": [_encode_value(v) for v in dist.values],
        "masses": [float(m) for m in dist.masses],
        "survival": [float(s) for s in dist.survival],
    }


def from_json_dict(doc: dict) -> NullDistribution:
    seed = doc.get("seed")
    return NullDistribution(
        kind=StatisticKind(doc["kind"]),
        values=np.array([_decode_value(v) for v in doc["values"]]),
        masses=np.array(doc["masses"], dtype=np.float64),
        survival=np.array(doc["survival"], dtype=np.float64),
        source=doc["source"],
        model=NullModel(N=doc["model"]["N"], p0=np.array(doc["model"]["p0"])),
        reps=doc.get("reps"),
        seed=None if seed is None else SeedSpec(seed["master_seed"],
                                                seed["stream_id"]),
    )


def cache_key(kind: StatisticKind, model: NullModel, source: str,
              reps: int | None, seed: SeedSpec | None) -> str:
    """Stable digest identifying one null distribution."""
    h = hashlib.sha256()
    p0_hash = hashlib.sha256(np.ascontiguousarray(model.p0).tobytes()).hexdigest()
    parts = [kind.value, str(model.k), str(model.N), p0_hash, source,
             str(reps),
             "-" if seed is None else f"{seed.master_seed}:{seed.stream_id}"]
    h.update("|".join(parts).encode())
    return h.hexdigest()


class NullDistributionCache:
    """Directory of serialized null distributions, keyed by content."""

    def __init__(self, directory) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path_for(self, kind: StatisticKind, model: NullModel, source: str,
                 reps: int | None, seed: SeedSpec | None) -> Path:
        return self.directory / f"{cache_key(kind, model, source, reps, seed)}.json"

    def get(self, kind: StatisticKind, model: NullModel, source: str,
            reps: int | None = None, seed: SeedSpec | None = None,
            ) -> NullDistribution | None:
        path = self.path_for(kind, model, source, reps, seed)
        if not path.exists():
            return None
        return from_json_dict(json.loads(path.read_text()))

    def put(self, dist: NullDistribution) -> Path:
        path = self.path_for(dist.kind, dist.model, dist.source,
                             dist.reps, dist.seed)
        path.write_text(json.dumps(to_json_dict(dist), indent=1))
        return path

"""Power-study orchestration: grid runs, interpolation and rankings.

For every combination of alternative profile and sample size, the runner
builds the null distribution of each statistic once (exactly when the
composition space fits the configured budget, else by Monte Carlo),
brackets the target level between the two adjacent attainable sizes,
estimates the rejection rate at both cutoffs on one alternative sample
batch shared by all statistics, and linearly interpolates in attained
size to the target level.

Grid cells are independent tasks; the ``GOFPOWER_THREADS`` environment
variable caps the worker pool (0 or unset = one worker per CPU).  Results
are bit-identical for any worker count because every task draws from its
own counter-addressed stream.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .alternatives import AlternativeSpec, builtin_alternatives
from .errors import BracketError, CapacityError
from .nulldist import (
    DEFAULT_COMPOSITION_BUDGET,
    CriticalBracket,
    count_compositions,
    critical_bracket,
    exact_null_distributions,
    mc_null_distributions,
    rejection_mask,
)
from .sampling import SeedSpec, generator_id, sample_batch
from .stats import STUDY_KINDS, NullModel, StatisticKind, evaluate_batch

__all__ = [
    "StudyConfig",
    "PowerEstimate",
    "StudyResult",
    "Ranking",
    "power_at_cutoff",
    "interpolated_power",
    "run_study",
    "rank_statistics",
    "group_kinds_by_power",
    "resolve_workers",
]

DEFAULT_SAMPLE_SIZES = (10, 20, 30, 50, 100, 200)


def _default_alternatives() -> tuple[AlternativeSpec, ...]:
    return tuple(a for a in builtin_alternatives() if a.name != "uniform")


@dataclass(eq=False)
class StudyConfig:
    """Everything that determines one study run."""

    kinds: tuple[StatisticKind, ...] = STUDY_KINDS
    alternatives: tuple[AlternativeSpec, ...] = field(
        default_factory=_default_alternatives)
    sample_sizes: tuple[int, ...] = DEFAULT_SAMPLE_SIZES
    k: int = 10
    reps_power: int = 10_000
    reps_null: int = 10_000
    alpha: float = 0.05
    master_seed: int = 0
    exact_threshold: int = DEFAULT_COMPOSITION_BUDGET

    def __post_init__(self) -> None:
        self.kinds = tuple(self.kinds)
        self.alternatives = tuple(self.alternatives)
        self.sample_sizes = tuple(int(n) for n in self.sample_sizes)
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be strictly between 0 and 1")
        if any(n < 1 for n in self.sample_sizes):
            raise ValueError("sample sizes must be positive")
        if len(set(a.name for a in self.alternatives)) != len(self.alternatives):
            raise ValueError("alternative names must be unique")
        if self.k < 2:
            raise ValueError("need at least two cells")


@dataclass(frozen=True)
class PowerEstimate:
    """Interpolated power of one statistic at one grid cell."""

    kind: StatisticKind
    alternative: str
    N: int
    bracket: CriticalBracket
    power_liberal: float
    power_conservative: float
    power_interpolated: float
    reps: int
    std_err: float
    null_source: str


@dataclass(eq=False)
class StudyResult:
    """Complete grid of power estimates plus run provenance."""

    grid: dict[tuple[StatisticKind, str, int], PowerEstimate]
    provenance: dict

    def get(self, kind: StatisticKind, alternative: str, N: int) -> PowerEstimate:
        try:
            return self.grid[(kind, alternative, int(N))]
        except KeyError:
            raise LookupError(
                f"no grid entry for ({kind.value}, {alternative}, N={N})"
            ) from None

    def power(self, kind: StatisticKind, alternative: str, N: int) -> float:
        return self.get(kind, alternative, N).power_interpolated

    def entries(self) -> list[PowerEstimate]:
        return list(self.grid.values())


@dataclass(frozen=True)
class Ranking:
    """Statistics ordered by power at one (alternative, N), ties grouped."""

    alternative: str
    N: int
    groups: tuple[tuple[StatisticKind, ...], ...]
    tie_threshold: float


def interpolated_power(bracket: CriticalBracket, power_liberal: float,
                       power_conservative: float, alpha: float) -> float:
    """Linear interpolation of power in attained size at level ``alpha``."""
    if bracket.exact_hit:
        return power_liberal
    width = bracket.alpha_liberal - bracket.alpha_conservative
    if width <= 0.0:
        raise BracketError(
            "degenerate bracket: zero-width attained-size interval "
            "without an exact hit"
        )
    if not bracket.alpha_conservative <= alpha <= bracket.alpha_liberal:
        raise ValueError(
            f"alpha={alpha} lies outside the bracketed sizes "
            f"[{bracket.alpha_conservative}, {bracket.alpha_liberal}]"
        )
    frac = (alpha - bracket.alpha_conservative) / width
    return power_conservative + frac * (power_liberal - power_conservative)


def power_at_cutoff(kind: StatisticKind, alt: AlternativeSpec, model: NullModel,
                    cutoff: float, reps: int, seed: SeedSpec) -> float:
    """Rejection rate of ``T > cutoff`` under the alternative."""
    counts = sample_batch(alt.p, model.N, reps, seed)
    vals = evaluate_batch(kind, counts, model)
    return float(np.mean(rejection_mask(vals, cutoff)))


# -- stream assignment -------------------------------------------------------
# Null batches depend only on the sample size, so every alternative is
# judged against the same null draws; alternative batches get a disjoint
# stream domain so a uniform "alternative" stays independent of the null.

def _null_stream(size_idx: int) -> int:
    return size_idx


def _alt_stream(alt_idx: int, size_idx: int) -> int:
    return (1 << 32) | (alt_idx << 16) | size_idx


def resolve_workers(n_tasks: int) -> int:
    """Worker count for ``n_tasks``, honoring ``GOFPOWER_THREADS``."""
    raw = os.environ.get("GOFPOWER_THREADS", "0").strip() or "0"
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(
            f"GOFPOWER_THREADS must be a nonnegative integer, got {raw!r}"
        ) from None
    if cap < 0:
        raise ValueError("GOFPOWER_THREADS must be nonnegative")
    if cap == 0:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_tasks))


def _run_tasks(func, args_list):
    workers = resolve_workers(len(args_list))
    if workers <= 1 or len(args_list) <= 1:
        return [func(args) for args in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, args_list))


def _null_task(args):
    (kinds, k, N, size_idx, reps_null, master_seed, alpha, exact_threshold) = args
    model = NullModel.uniform(k, N)
    try:
        if count_compositions(N, k) <= exact_threshold:
            source = "exact"
            dists = exact_null_distributions(kinds, model, exact_threshold)
        else:
            source = "monte_carlo"
            seed = SeedSpec(master_seed, _null_stream(size_idx))
            dists = mc_null_distributions(kinds, model, reps_null, seed)
        brackets = {}
        for kind in kinds:
            try:
                brackets[kind] = critical_bracket(dists[kind], alpha)
            except BracketError as exc:
                raise BracketError(f"[{kind.value}, N={N}] {exc}") from None
    except CapacityError as exc:
        raise CapacityError(f"[N={N}] {exc}") from None
    return size_idx, source, brackets


def _power_task(args):
    (kinds, k, N, alt, alt_idx, size_idx, reps_power, master_seed,
     alpha, brackets) = args
    model = NullModel.uniform(k, N)
    seed = SeedSpec(master_seed, _alt_stream(alt_idx, size_idx))
    counts = sample_batch(alt.p, N, reps_power, seed)
    cells = {}
    for kind in kinds:
        vals = evaluate_batch(kind, counts, model)
        br = brackets[kind]
        p_lib = float(np.mean(rejection_mask(vals, br.c_liberal)))
        p_con = float(np.mean(rejection_mask(vals, br.c_conservative)))
        try:
            p_int = interpolated_power(br, p_lib, p_con, alpha)
        except BracketError as exc:
            raise BracketError(f"[{kind.value}, {alt.name}, N={N}] {exc}") from None
        cells[kind] = (p_lib, p_con, p_int)
    return alt_idx, size_idx, cells


def run_study(cfg: StudyConfig) -> StudyResult:
    """Run the full power grid and return every estimate with provenance."""
    null_args = [
        (cfg.kinds, cfg.k, N, size_idx, cfg.reps_null, cfg.master_seed,
         cfg.alpha, cfg.exact_threshold)
        for size_idx, N in enumerate(cfg.sample_sizes)
    ]
    sources: dict[int, str] = {}
    brackets: dict[int, dict[StatisticKind, CriticalBracket]] = {}
    for size_idx, source, bracket_map in _run_tasks(_null_task, null_args):
        sources[size_idx] = source
        brackets[size_idx] = bracket_map

    power_args = [
        (cfg.kinds, cfg.k, N, alt, alt_idx, size_idx, cfg.reps_power,
         cfg.master_seed, cfg.alpha, brackets[size_idx])
        for alt_idx, alt in enumerate(cfg.alternatives)
        for size_idx, N in enumerate(cfg.sample_sizes)
    ]
    cells: dict[tuple[int, int], dict] = {}
    for alt_idx, size_idx, cell in _run_tasks(_power_task, power_args):
        cells[(alt_idx, size_idx)] = cell

    grid: dict[tuple[StatisticKind, str, int], PowerEstimate] = {}
    for alt_idx, alt in enumerate(cfg.alternatives):
        for size_idx, N in enumerate(cfg.sample_sizes):
            for kind in cfg.kinds:
                p_lib, p_con, p_int = cells[(alt_idx, size_idx)][kind]
                grid[(kind, alt.name, N)] = PowerEstimate(
                    kind=kind,
                    alternative=alt.name,
                    N=N,
                    bracket=brackets[size_idx][kind],
                    power_liberal=p_lib,
                    power_conservative=p_con,
                    power_interpolated=p_int,
                    reps=cfg.reps_power,
                    std_err=math.sqrt(max(p_int * (1.0 - p_int), 0.0)
                                      / cfg.reps_power),
                    null_source=sources[size_idx],
                )
    provenance = {
        "package": f"gofpower {__version__}",
        "master_seed": cfg.master_seed,
        "reps_power": cfg.reps_power,
        "reps_null": cfg.reps_null,
        "alpha": cfg.alpha,
        "k": cfg.k,
        "sample_sizes": list(cfg.sample_sizes),
        "statistics": [kind.value for kind in cfg.kinds],
        "generator": generator_id(),
        "stream_scheme": ("null batch: stream_id = size_index; "
                          "alternative batch: stream_id = 2^32 + "
                          "alt_index*2^16 + size_index"),
        "exact_threshold": cfg.exact_threshold,
        "null_sources": {str(N): sources[i]
                         for i, N in enumerate(cfg.sample_sizes)},
        "alternatives": [
            {
                "name": alt.name,
                "raw": [float(x) for x in alt.raw],
                "raw_sum": alt.raw_sum,
                "probabilities": [float(x) for x in alt.p],
            }
            for alt in cfg.alternatives
        ],
        "normalization": ("profiles are sampled from raw weights divided "
                          "by their sum; raw sums are recorded per profile"),
    }
    return StudyResult(grid=grid, provenance=provenance)


def group_kinds_by_power(powers: dict[StatisticKind, float],
                         tie_threshold: float,
                         ) -> tuple[tuple[StatisticKind, ...], ...]:
    """Order kinds by descending power; adjacent near-ties share a group."""
    if not powers:
        raise ValueError("no powers to rank")
    canon = {kind: i for i, kind in enumerate(StatisticKind)}
    ordered = sorted(powers, key=lambda kd: (-powers[kd], canon[kd]))
    groups: list[list[StatisticKind]] = [[ordered[0]]]
    for prev, cur in zip(ordered, ordered[1:]):
        if powers[prev] - powers[cur] <= tie_threshold:
            groups[-1].append(cur)
        else:
            groups.append([cur])
    return tuple(tuple(g) for g in groups)


def rank_statistics(result: StudyResult, alternative, N: int,
                    tie_threshold: float = 0.01) -> Ranking:
    """Group statistics by descending power, merging near-ties.

    Adjacent statistics whose interpolated powers differ by at most
    ``tie_threshold`` join the same group.
    """
    alt_name = (alternative.name if isinstance(alternative, AlternativeSpec)
                else str(alternative))
    N = int(N)
    kinds = [key[0] for key in result.grid if key[1] == alt_name and key[2] == N]
    if not kinds:
        raise LookupError(f"no grid entries for ({alt_name}, N={N})")
    powers = {kind: result.power(kind, alt_name, N) for kind in kinds}
    return Ranking(
        alternative=alt_name,
        N=N,
        groups=group_kinds_by_power(powers, tie_threshold),
        tie_threshold=tie_threshold,
    )

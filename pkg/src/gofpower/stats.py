"""Goodness-of-fit statistics for multinomial counts.

Thirteen statistics are supported: the four classical chi-square-type
statistics (Pearson, Neyman, Wilks, Kullback), four variants that replace
the per-cell normalizer with the mean expected (or observed) count, four
discrete empirical-distribution-function statistics built from cumulative
deviations (Kolmogorov-Smirnov, Cramer-von Mises, Watson,
Anderson-Darling), and the nominal Kolmogorov-Smirnov statistic.

All statistics follow the convention "larger is more extreme" and take
values in [0, +inf].  Log- and ratio-based statistics diverge on empty
cells; the conventions are:

* terms of the form ``O * ln(O / x)`` with ``O == 0`` contribute 0;
* any term with an observed count of 0 in a denominator or inside
  ``ln(x / O)`` makes the whole statistic ``+inf``.

Sums are accumulated left to right in cell order so that repeated
evaluations are bit-identical.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "StatisticKind",
    "NullModel",
    "ObservedCounts",
    "STUDY_KINDS",
    "partial_deviation_sums",
    "weighted_deviation_mean",
    "evaluate",
    "evaluate_all",
    "evaluate_batch",
]

#: Relative tolerance under which two statistic values are considered the
#: same attainable value (floating noise from symmetric outcomes).
VALUE_RTOL = 1e-9

_PROB_ATOL = 1e-9


class StatisticKind(enum.Enum):
    """The supported goodness-of-fit statistics."""

    PEARSON = "pearson"
    NEYMAN = "neyman"
    WILKS = "wilks"
    KULLBACK = "kullback"
    NEW_PEARSON = "new_pearson"
    NEW_NEYMAN = "new_neyman"
    NEW_WILKS = "new_wilks"
    NEW_KULLBACK = "new_kullback"
    DISCRETE_KS = "discrete_ks"
    DISCRETE_CVM = "discrete_cvm"
    DISCRETE_WATSON = "discrete_watson"
    DISCRETE_AD = "discrete_ad"
    NOMINAL_KS = "nominal_ks"

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @classmethod
    def from_name(cls, name: str) -> "StatisticKind":
        """Look up a kind by its canonical snake_case name."""
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown statistic name: {name!r}") from None


_DISPLAY_NAMES = {
    StatisticKind.PEARSON: "Chi-Square",
    StatisticKind.NEYMAN: "Neyman",
    StatisticKind.WILKS: "Wilks",
    StatisticKind.KULLBACK: "Kullback",
    StatisticKind.NEW_PEARSON: "New Pearson",
    StatisticKind.NEW_NEYMAN: "New Neyman",
    StatisticKind.NEW_WILKS: "New Wilks",
    StatisticKind.NEW_KULLBACK: "New Kullback",
    StatisticKind.DISCRETE_KS: "Discrete KS",
    StatisticKind.DISCRETE_CVM: "Discrete CVM",
    StatisticKind.DISCRETE_WATSON: "Discrete Watson",
    StatisticKind.DISCRETE_AD: "Discrete AD",
    StatisticKind.NOMINAL_KS: "Nominal KS",
}

#: The ten statistics compared in the power study (the classical Neyman,
#: Wilks and Kullback forms are evaluable but not part of the study set).
STUDY_KINDS = (
    StatisticKind.DISCRETE_KS,
    StatisticKind.DISCRETE_CVM,
    StatisticKind.DISCRETE_WATSON,
    StatisticKind.DISCRETE_AD,
    StatisticKind.NOMINAL_KS,
    StatisticKind.PEARSON,
    StatisticKind.NEW_PEARSON,
    StatisticKind.NEW_NEYMAN,
    StatisticKind.NEW_WILKS,
    StatisticKind.NEW_KULLBACK,
)

# Kinds whose value is +inf whenever any observed count is zero.
_INF_ON_EMPTY_CELL = frozenset(
    {StatisticKind.NEYMAN, StatisticKind.KULLBACK, StatisticKind.NEW_KULLBACK}
)

# Kinds that divide by (or take logs of ratios against) per-cell expected
# counts and therefore require E_i > 0.
_NEEDS_POSITIVE_E = frozenset({StatisticKind.PEARSON, StatisticKind.WILKS})


@dataclass(eq=False)
class NullModel:
    """A fully specified multinomial null hypothesis.

    Holds the cell probabilities together with everything derived from
    them that the statistics need: expected counts ``E``, their mean
    ``e_bar``, and the cumulative cell probabilities ``H`` used as
    Anderson-Darling weights.
    """

    N: int
    p0: np.ndarray
    k: int = field(init=False)
    E: np.ndarray = field(init=False)
    e_bar: float = field(init=False)
    H: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.p0 = np.asarray(self.p0, dtype=np.float64)
        if self.p0.ndim != 1 or self.p0.size < 2:
            raise ValueError("p0 must be a 1-d probability vector with k >= 2")
        if np.any(self.p0 < 0):
            raise ValueError("cell probabilities must be nonnegative")
        total = float(np.sum(self.p0))
        if abs(total - 1.0) > _PROB_ATOL:
            raise ValueError(f"cell probabilities sum to {total!r}, not 1")
        if self.N < 1:
            raise ValueError("sample size N must be a positive integer")
        self.N = int(self.N)
        self.k = int(self.p0.size)
        self.E = self.N * self.p0
        acc = 0.0
        for e in self.E:
            acc += float(e)
        self.e_bar = acc / self.k
        self.H = np.cumsum(self.p0)
        for arr in (self.p0, self.E, self.H):
            arr.setflags(write=False)

    @classmethod
    def uniform(cls, k: int, N: int) -> "NullModel":
        """Equiprobable null over ``k`` cells with sample size ``N``."""
        if k < 2:
            raise ValueError("need at least two cells")
        return cls(N=N, p0=np.full(k, 1.0 / k))


@dataclass(eq=False)
class ObservedCounts:
    """Observed cell frequencies of one multinomial sample."""

    counts: np.ndarray
    o_bar: float = field(init=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.counts)
        if arr.ndim != 1:
            raise ValueError("counts must be a 1-d vector")
        if not np.issubdtype(arr.dtype, np.integer):
            rounded = np.rint(arr)
            if not np.array_equal(rounded, arr):
                raise ValueError("counts must be integers")
            arr = rounded.astype(np.int64)
        else:
            arr = arr.astype(np.int64)
        if np.any(arr < 0):
            raise ValueError("counts must be nonnegative")
        self.counts = arr
        self.counts.setflags(write=False)
        self.o_bar = int(arr.sum()) / arr.size

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _as_count_matrix(obs, k: int) -> np.ndarray:
    if isinstance(obs, ObservedCounts):
        arr = obs.counts[None, :]
    else:
        arr = np.asarray(obs)
        if arr.ndim == 1:
            arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != k:
        raise ValueError(
            f"observed counts have {arr.shape[-1]} cells, model has {k}"
        )
    return arr


def partial_deviation_sums(obs, model: NullModel) -> np.ndarray:
    """Cumulative observed-minus-expected sums ``Z_i`` through each cell.

    The last entry is 0 (up to rounding) whenever the counts total the
    model's sample size.
    """
    counts = _as_count_matrix(obs, model.k)[0]
    if int(counts.sum()) != model.N:
        raise ValueError(
            f"counts sum to {int(counts.sum())}, model expects N={model.N}"
        )
    return np.cumsum(counts.astype(np.float64) - model.E)


def weighted_deviation_mean(z: np.ndarray, model: NullModel) -> float:
    """Null-probability-weighted mean of the cumulative deviations."""
    acc = 0.0
    for j in range(model.k):
        acc += float(z[j]) * float(model.p0[j])
    return acc


def _column_zero_mask(O: np.ndarray) -> np.ndarray:
    return (O == 0).any(axis=1)


def _sum_left_to_right(terms: list[np.ndarray]) -> np.ndarray:
    acc = np.zeros_like(terms[0])
    for t in terms:
        acc = acc + t
    return acc


def _chi_square_family(O: np.ndarray, model: NullModel, denom) -> np.ndarray:
    # denom: per-cell scalar array (k,) or per-row column vector (m, 1)
    dev = O - model.E
    terms = []
    for i in range(model.k):
        d = denom[i] if np.ndim(denom) == 1 else denom[:, 0]
        terms.append(dev[:, i] ** 2 / d)
    return _sum_left_to_right(terms)


def _log_family_obs_weighted(O: np.ndarray, ref) -> np.ndarray:
    # 2 * sum_i O_i ln(O_i / ref_i), zero counts contributing 0
    k = O.shape[1]
    terms = []
    for i in range(k):
        col = O[:, i]
        r = ref[i] if np.ndim(ref) == 1 else ref
        pos = col > 0
        safe = np.where(pos, col, 1.0)
        terms.append(np.where(pos, col * np.log(safe / r), 0.0))
    return 2.0 * _sum_left_to_right(terms)


def _log_family_exp_weighted(O: np.ndarray, weight, ref) -> np.ndarray:
    # 2 * sum_i w_i ln(ref_i / O_i); callers guarantee O > 0 everywhere.
    # Cells with zero weight contribute 0 (their ref is 0 as well).
    k = O.shape[1]
    terms = []
    for i in range(k):
        w = weight[i] if np.ndim(weight) == 1 else weight
        if w == 0.0:
            continue
        r = ref[i] if np.ndim(ref) == 1 else ref
        terms.append(w * np.log(r / O[:, i]))
    if not terms:
        return np.zeros(O.shape[0])
    return 2.0 * _sum_left_to_right(terms)


def _cumulative_deviations(O: np.ndarray, model: NullModel) -> np.ndarray:
    return np.cumsum(O - model.E, axis=1)


def evaluate_batch(kind: StatisticKind, counts, model: NullModel) -> np.ndarray:
    """Evaluate one statistic on a batch of count vectors.

    ``counts`` is an integer array of shape ``(m, k)`` (or a single vector
    of length ``k``); every row must sum to ``model.N``.  Returns a float64
    array of shape ``(m,)`` that may contain ``+inf`` but never NaN.
    """
    mat = _as_count_matrix(counts, model.k)
    sums = mat.sum(axis=1)
    if not np.all(sums == model.N):
        bad = int(np.argmin(sums == model.N))
        raise ValueError(
            f"row {bad} sums to {int(sums[bad])}, model expects N={model.N}"
        )
    if kind in _NEEDS_POSITIVE_E and np.any(model.E == 0):
        raise ValueError(f"{kind.value} requires positive expected counts")

    O = mat.astype(np.float64)
    m = O.shape[0]

    if kind in _INF_ON_EMPTY_CELL:
        out = np.full(m, np.inf)
        finite_rows = ~_column_zero_mask(mat)
        if np.any(finite_rows):
            sub = O[finite_rows]
            if kind is StatisticKind.NEYMAN:
                vals = _chi_square_family(sub, model, denom=sub)
            elif kind is StatisticKind.KULLBACK:
                vals = _log_family_exp_weighted(sub, model.E, model.E)
            else:  # NEW_KULLBACK
                vals = _log_family_exp_weighted(sub, model.e_bar, model.e_bar)
            out[finite_rows] = vals
        return out

    if kind is StatisticKind.PEARSON:
        return _chi_square_family(O, model, denom=model.E)
    if kind is StatisticKind.NEW_PEARSON:
        denom = np.full(model.k, model.e_bar)
        return _chi_square_family(O, model, denom=denom)
    if kind is StatisticKind.NEW_NEYMAN:
        o_bar = (mat.sum(axis=1) / model.k)[:, None]
        return _chi_square_family(O, model, denom=o_bar)
    if kind is StatisticKind.WILKS:
        return _log_family_obs_weighted(O, model.E)
    if kind is StatisticKind.NEW_WILKS:
        return _log_family_obs_weighted(O, model.e_bar)
    if kind is StatisticKind.NOMINAL_KS:
        dev = O - model.E
        terms = [np.abs(dev[:, i]) for i in range(model.k)]
        return 0.5 * _sum_left_to_right(terms)

    Z = _cumulative_deviations(O, model)
    if kind is StatisticKind.DISCRETE_KS:
        return np.max(np.abs(Z), axis=1)
    if kind is StatisticKind.DISCRETE_CVM:
        terms = [Z[:, i] ** 2 * model.p0[i] for i in range(model.k)]
        return _sum_left_to_right(terms) / model.N
    if kind is StatisticKind.DISCRETE_WATSON:
        zbar = np.zeros(m)
        for j in range(model.k):
            zbar = zbar + Z[:, j] * model.p0[j]
        terms = [(Z[:, i] - zbar) ** 2 * model.p0[i] for i in range(model.k)]
        return _sum_left_to_right(terms) / model.N
    if kind is StatisticKind.DISCRETE_AD:
        # The final cell is excluded: Z_k = 0 and H_k = 1 make it 0/0,
        # and the term is defined as 0.
        terms = []
        for i in range(model.k - 1):
            p = float(model.p0[i])
            if p == 0.0:
                continue
            w = float(model.H[i]) * (1.0 - float(model.H[i]))
            if w <= 0.0:
                terms.append(np.where(Z[:, i] == 0.0, 0.0, np.inf))
            else:
                terms.append(Z[:, i] ** 2 * (p / w))
        if not terms:
            return np.zeros(m)
        return _sum_left_to_right(terms) / model.N

    raise ValueError(f"unhandled statistic kind: {kind!r}")


def evaluate(kind: StatisticKind, obs, model: NullModel) -> float:
    """Evaluate one statistic on a single observed count vector.

    Returns a nonnegative float; ``math.inf`` marks divergent values of
    the log-based statistics on empty cells.
    """
    return float(evaluate_batch(kind, obs, model)[0])


def evaluate_all(obs, model: NullModel, kinds=None) -> dict[StatisticKind, float]:
    """Evaluate several statistics on one observation.

    ``kinds`` defaults to all thirteen; an empty iterable yields an empty
    map.  Equivalent to calling :func:`evaluate` per kind.
    """
    if kinds is None:
        kinds = tuple(StatisticKind)
    return {kind: evaluate(kind, obs, model) for kind in kinds}

import json
import math

import numpy as np
import pytest
from scipy.stats import chi2

from gofpower.errors import BracketError, CapacityError
from gofpower.nulldist import (
    NullDistribution,
    NullDistributionCache,
    count_compositions,
    critical_bracket,
    exact_null_distribution,
    exact_null_distributions,
    from_json_dict,
    iter_composition_chunks,
    mc_null_distribution,
    mc_null_distributions,
    rejection_mask,
    survival_at,
    to_json_dict,
)
from gofpower.sampling import SeedSpec
from gofpower.stats import STUDY_KINDS, NullModel, StatisticKind

K = StatisticKind


def test_count_compositions():
    assert count_compositions(2, 2) == 3
    assert count_compositions(10, 10) == 92_378
    assert count_compositions(20, 10) == 10_015_005
    assert count_compositions(30, 10) == 211_915_132


@pytest.mark.parametrize("n,k", [(2, 2), (5, 3), (7, 4), (10, 10)])
def test_composition_enumeration_complete(n, k):
    chunks = list(iter_composition_chunks(n, k, max_rows=50))
    rows = np.vstack(chunks)
    assert rows.shape == (count_compositions(n, k), k)
    assert np.all(rows.sum(axis=1) == n)
    assert len({tuple(r) for r in rows.tolist()}) == len(rows)


def test_composition_chunking_invariant_to_chunk_size():
    small = np.vstack(list(iter_composition_chunks(6, 4, max_rows=5)))
    large = np.vstack(list(iter_composition_chunks(6, 4, max_rows=10_000)))
    np.testing.assert_array_equal(small, large)


def test_exact_two_cell_distribution():
    # Outcomes of 2 trials over 2 fair cells: (1,1) w.p. 1/2 has value 0,
    # (2,0) and (0,2) w.p. 1/4 each have value 2.
    dist = exact_null_distribution(K.PEARSON, NullModel.uniform(2, 2))
    np.testing.assert_allclose(dist.values, [0.0, 2.0], atol=0)
    np.testing.assert_allclose(dist.masses, [0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(dist.survival, [0.5, 0.0], atol=1e-15)
    assert dist.source == "exact"


@pytest.mark.parametrize("kind", STUDY_KINDS, ids=[k.value for k in STUDY_KINDS])
def test_exact_mass_is_complete(kind):
    dist = exact_null_distribution(kind, NullModel.uniform(5, 8))
    assert dist.total_mass == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.diff(dist.values[np.isfinite(dist.values)]) > 0)
    assert np.all(np.diff(dist.survival) <= 0)
    assert dist.survival[-1] == 0.0
    assert dist.survival[0] < 1.0


def test_capacity_error_names_the_count():
    with pytest.raises(CapacityError, match="211915132"):
        exact_null_distribution(K.PEARSON, NullModel.uniform(10, 30),
                                budget=20_000_000)


def test_survival_at_edges():
    dist = exact_null_distribution(K.PEARSON, NullModel.uniform(2, 2))
    assert survival_at(dist, -0.5) == 1.0
    assert survival_at(dist, 0.0) == 0.5
    assert survival_at(dist, 1.0) == 0.5
    assert survival_at(dist, 2.0) == 0.0
    assert survival_at(dist, math.inf) == 0.0
    # values a hair off a support point resolve to that point
    assert survival_at(dist, 2.0 * (1 + 1e-12)) == 0.0
    assert survival_at(dist, 2.0 * (1 - 1e-12)) == 0.0


def test_bracket_two_cell_example():
    dist = exact_null_distribution(K.PEARSON, NullModel.uniform(2, 2))
    br = critical_bracket(dist, 0.05)
    assert (br.c_liberal, br.alpha_liberal) == (0.0, 0.5)
    assert (br.c_conservative, br.alpha_conservative) == (2.0, 0.0)
    assert not br.exact_hit
    assert br.alpha_conservative <= 0.05 <= br.alpha_liberal


def _toy_dist(values, masses):
    values = np.asarray(values, dtype=np.float64)
    masses = np.asarray(masses, dtype=np.float64)
    tail = np.cumsum(masses[::-1])[::-1]
    survival = np.concatenate([tail[1:], [0.0]])
    return NullDistribution(kind=K.PEARSON, values=values, masses=masses,
                            survival=survival, source="exact",
                            model=NullModel.uniform(2, 2))


def test_bracket_exact_hit():
    dist = _toy_dist([0.0, 1.0, 2.0], [0.5, 0.45, 0.05])
    br = critical_bracket(dist, 0.05)
    assert br.exact_hit
    assert br.c_liberal == br.c_conservative == 1.0
    assert br.alpha_liberal == br.alpha_conservative == 0.05


def test_bracket_degenerate_distribution():
    dist = _toy_dist([3.0], [1.0])
    with pytest.raises(BracketError):
        critical_bracket(dist, 0.05)


def test_bracket_target_validation():
    dist = _toy_dist([0.0, 1.0], [0.5, 0.5])
    with pytest.raises(ValueError):
        critical_bracket(dist, 0.0)
    with pytest.raises(ValueError):
        critical_bracket(dist, 1.0)


def test_mc_determinism_and_reps_floor():
    model = NullModel.uniform(10, 30)
    seed = SeedSpec(3, 1)
    a = mc_null_distribution(K.DISCRETE_CVM, model, 500, seed)
    b = mc_null_distribution(K.DISCRETE_CVM, model, 500, seed)
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.survival, b.survival)
    assert a.source == "monte_carlo" and a.reps == 500
    with pytest.raises(ValueError):
        mc_null_distribution(K.DISCRETE_CVM, model, 99, seed)


def test_mc_shared_batch_across_kinds():
    model = NullModel.uniform(10, 30)
    shared = mc_null_distributions((K.PEARSON, K.NOMINAL_KS), model, 400,
                                   SeedSpec(8))
    single = mc_null_distribution(K.PEARSON, model, 400, SeedSpec(8))
    np.testing.assert_array_equal(shared[K.PEARSON].values, single.values)


def test_mc_tracks_asymptotic_chi_square_tail():
    # sanity oracle only: at N = 100 the Pearson null is near chi2(9)
    dist = mc_null_distribution(K.PEARSON, NullModel.uniform(10, 100),
                                10_000, SeedSpec(41))
    cutoff = chi2.isf(0.05, 9)
    assert survival_at(dist, cutoff) == pytest.approx(0.05, abs=0.01)


def test_infinite_atom_is_bracketable():
    # at N = 10 the mean-expected log statistic is finite only when every
    # cell holds exactly one observation
    dist = exact_null_distribution(K.NEW_KULLBACK, NullModel.uniform(10, 10))
    assert dist.values[-1] == math.inf
    assert dist.masses[-1] == pytest.approx(1.0 - math.factorial(10) / 10.0**10,
                                            rel=1e-12)
    br = critical_bracket(dist, 0.05)
    assert br.c_conservative == math.inf
    assert br.alpha_conservative == 0.0
    assert survival_at(dist, math.inf) == 0.0


def test_rejection_mask_semantics():
    vals = np.array([0.5, 1.0, 1.0 + 1e-13, 2.0, math.inf])
    np.testing.assert_array_equal(rejection_mask(vals, 1.0),
                                  [False, False, False, True, True])
    np.testing.assert_array_equal(rejection_mask(vals, math.inf),
                                  [False] * 5)


def test_exact_matches_mc_closely_at_small_n():
    # loose smoke check; the tight banded comparison runs in acceptance
    model = NullModel.uniform(10, 10)
    exact = exact_null_distribution(K.DISCRETE_KS, model)
    mc = mc_null_distribution(K.DISCRETE_KS, model, 10_000, SeedSpec(6))
    worst = max(abs(survival_at(mc, v) - s)
                for v, s in zip(exact.values, exact.survival))
    assert worst < 0.03


def test_json_round_trip(tmp_path):
    model = NullModel.uniform(10, 10)
    dist = exact_null_distribution(K.NEW_KULLBACK, model)
    doc = to_json_dict(dist)
    assert doc["values"][-1] == "inf"
    text = json.dumps(doc)
    back = from_json_dict(json.loads(text))
    np.testing.assert_array_equal(back.values, dist.values)
    np.testing.assert_array_equal(back.masses, dist.masses)
    np.testing.assert_array_equal(back.survival, dist.survival)
    assert back.kind is dist.kind
    assert back.source == dist.source


def test_cache_round_trip(tmp_path):
    cache = NullDistributionCache(tmp_path / "cache")
    model = NullModel.uniform(4, 6)
    dist = exact_null_distribution(K.PEARSON, model)
    assert cache.get(K.PEARSON, model, "exact") is None
    path = cache.put(dist)
    assert path.exists()
    loaded = cache.get(K.PEARSON, model, "exact")
    np.testing.assert_array_equal(loaded.values, dist.values)
    # different model keys do not collide
    assert cache.get(K.PEARSON, NullModel.uniform(4, 7), "exact") is None

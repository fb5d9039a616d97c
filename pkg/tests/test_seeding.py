import numpy as np
import pytest
from hypothesis import given, strategies as st

from pretopomd.exceptions import ConfigError, IsolatedStart
from pretopomd.seeding import (
    SeedConfig,
    SeedStrategy,
    find_neighbors,
    nearest_neighbors,
    random_walk,
    set_seeds,
)
from pretopomd.space import Prenetwork, PretopologicalSpace

from tests.helpers import chain_space


def line_dm(points):
    p = np.asarray(points, dtype=float)
    return np.abs(p[:, None] - p[None, :])


def test_nearest_neighbors_example():
    assert nearest_neighbors(0, 2, line_dm([0, 1, 5, 6])) == {0, 1}


def test_nearest_neighbors_ties_to_lowest_index():
    assert nearest_neighbors(1, 2, line_dm([0, 1, 2])) == {0, 1}


def test_d_one_is_start_for_both_strategies():
    space = chain_space(3)
    for strategy in SeedStrategy:
        assert find_neighbors(2, 1, strategy, space, line_dm([0, 1, 2])) == {2}


def test_random_walk_isolated_start():
    with pytest.raises(IsolatedStart):
        random_walk(0, 2, np.zeros((3, 3)), np.random.default_rng(0))


def test_random_walk_stays_on_component():
    A = np.zeros((5, 5))
    A[0, 1] = A[1, 0] = A[1, 2] = A[2, 1] = 1
    A[3, 4] = A[4, 3] = 1
    seed = random_walk(0, 4, A, np.random.default_rng(0))
    assert seed == {0, 1, 2}  # trapped: smaller set returned


def test_set_seeds_example():
    seeds = set_seeds(None, SeedConfig(d=2), line_dm([0, 1, 10]))
    assert seeds.seeds == [{0, 1}, {1, 0}, {2, 1}]


def test_set_seeds_singletons():
    seeds = set_seeds(chain_space(4), SeedConfig(d=1))
    assert seeds.seeds == [{i} for i in range(4)]


def test_set_seeds_random_walk_flags_incomplete():
    W = np.zeros((4, 4))
    W[0, 1] = W[1, 0] = 1.0
    space = PretopologicalSpace((Prenetwork("N", W),), (1.0,), "N")
    seeds = set_seeds(space, SeedConfig(d=2, strategy="random_walk"))
    assert seeds.seeds == [{0, 1}, {0, 1}, {2}, {3}]
    assert seeds.incomplete == [2, 3]


def test_seed_config_validation():
    with pytest.raises(ConfigError):
        SeedConfig(d=0)
    with pytest.raises(ConfigError):
        SeedConfig(strategy="spiral")
    assert SeedConfig(strategy="nn").strategy is SeedStrategy.NEAREST_NEIGHBORS
    with pytest.raises(ConfigError):
        set_seeds(None, SeedConfig(d=5), line_dm([0, 1]))


def random_graph_space(seed, n=20):
    rng = np.random.default_rng(seed)
    W = (rng.random((n, n)) < 0.2).astype(float)
    W = np.maximum(W, W.T)
    return PretopologicalSpace((Prenetwork("N", W),), (1.0,), "N")


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_random_walk_reproducible(seed, d):
    space = random_graph_space(seed)
    cfg = SeedConfig(d=d, strategy="random_walk", rng_seed=seed)
    first, second = set_seeds(space, cfg), set_seeds(space, cfg)
    assert first.seeds == second.seeds and first.incomplete == second.incomplete
    for x, s in enumerate(first):
        assert x in s and len(s) <= d
        assert (len(s) < d) == (x in first.incomplete)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_nearest_neighbour_seed_shape(seed, d):
    rng = np.random.default_rng(seed)
    dm = line_dm(rng.normal(size=12))
    seeds = set_seeds(None, SeedConfig(d=d), dm)
    assert len(seeds) == 12
    assert all(x in s and len(s) == d for x, s in enumerate(seeds))


@given(st.integers(0, 2**32 - 1))
def test_nearest_neighbour_permutation_equivariant(seed):
    rng = np.random.default_rng(seed)
    # continuous draws: distances are tie-free with probability one
    dm = line_dm(rng.normal(size=10))
    perm = rng.permutation(10)
    seeds = set_seeds(None, SeedConfig(d=3), dm).seeds
    permuted = set_seeds(None, SeedConfig(d=3), dm[np.ix_(perm, perm)]).seeds
    # element i of the permuted problem is element perm[i] of the original
    for i, s in enumerate(permuted):
        assert {int(perm[j]) for j in s} == seeds[perm[i]]

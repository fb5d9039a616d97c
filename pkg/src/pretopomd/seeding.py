"""Elementary subsets ("seeds") grown into closures by the hierarchy stage."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, IsolatedStart


class SeedStrategy(enum.Enum):
    NEAREST_NEIGHBORS = "nearest_neighbors"
    RANDOM_WALK = "random_walk"

    @classmethod
    def parse(cls, text) -> "SeedStrategy":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("-", "_")
        key = {"nn": "nearest_neighbors", "knn": "nearest_neighbors",
               "walk": "random_walk"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown seed strategy {text!r}", key="seed_strategy") from None


@dataclass(frozen=True)
class SeedConfig:
    d: int = 3
    strategy: SeedStrategy = SeedStrategy.NEAREST_NEIGHBORS
    rng_seed: int = 0
    weighted_walk: bool = False

    def __post_init__(self):
        object.__setattr__(self, "strategy", SeedStrategy.parse(self.strategy))
        if int(self.d) != self.d or self.d < 1:
            raise ConfigError("seed size must be a positive integer", key="seed_size")

    def as_dict(self) -> dict:
        return {"seed_size": self.d, "seed_strategy": self.strategy.value,
                "rng_seed": self.rng_seed, "weighted_walk": self.weighted_walk}


@dataclass
class SeedList:
    seeds: list[frozenset[int]]
    # start elements whose random walk got stuck before reaching d members
    incomplete: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.seeds)

    def __iter__(self):
        return iter(self.seeds)

    def __getitem__(self, i):
        return self.seeds[i]


def nearest_neighbors(start: int, d: int, dm) -> frozenset[int]:
    """``start`` plus its ``d - 1`` nearest elements, ties to the lowest index."""
    row = np.array(dm[start], dtype=float)
    if d > row.size:
        raise ConfigError(f"seed size {d} exceeds the number of elements {row.size}",
                          key="seed_size")
    row[start] = -np.inf
    # everything tied with the d-th smallest value competes by index
    cutoff = np.partition(row, d - 1)[d - 1]
    candidates = np.flatnonzero(row <= cutoff)
    order = candidates[np.argsort(row[candidates], kind="stable")]
    return frozenset(order[:d].tolist())


def random_walk(start: int, d: int, adjacency, rng, weighted: bool = False,
                max_steps: int | None = None) -> frozenset[int]:
    """Distinct nodes visited by a random walk from ``start`` (at most ``d``).

    Hops go to a uniformly chosen positive-weight out-neighbour (or
    proportionally to weight with ``weighted``). Revisits are skipped. If
    the walk runs out of steps first, the smaller set is returned.
    """
    adjacency = np.asarray(adjacency, dtype=float)
    n = adjacency.shape[0]
    if d > n:
        raise ConfigError(f"seed size {d} exceeds the number of elements {n}", key="seed_size")
    if not np.any(_out_weights(adjacency, start) > 0):
        if d == 1:
            return frozenset([start])
        raise IsolatedStart(start)
    if max_steps is None:
        max_steps = 50 * d * d + 100
    visited = [start]
    seen = {start}
    node = start
    for _ in range(max_steps):
        if len(visited) >= d:
            break
        w = _out_weights(adjacency, node)
        neigh = np.flatnonzero(w > 0)
        if neigh.size == 0:
            break
        p = w[neigh] / w[neigh].sum() if weighted else None
        node = int(rng.choice(neigh, p=p))
        if node not in seen:
            seen.add(node)
            visited.append(node)
    return frozenset(visited)


def _out_weights(adjacency, node):
    w = adjacency[node].copy()
    w[node] = 0.0
    return w


def find_neighbors(start: int, d: int, strategy, space=None, dm=None, rng=None,
                   weighted: bool = False) -> frozenset[int]:
    strategy = SeedStrategy.parse(strategy)
    if d == 1:
        return frozenset([start])
    if strategy is SeedStrategy.NEAREST_NEIGHBORS:
        if dm is None:
            raise ConfigError("nearest-neighbour seeds need a distance matrix", key="seed_strategy")
        return nearest_neighbors(start, d, dm)
    if space is None:
        raise ConfigError("random-walk seeds need a pretopological space", key="seed_strategy")
    if rng is None:
        rng = np.random.default_rng()
    return random_walk(start, d, walk_graph(space), rng, weighted)


def walk_graph(space) -> np.ndarray:
    """Union of all prenetworks: weight of x -> y summed over graphs."""
    return np.sum([p.weights for p in space.prenetworks], axis=0)


def set_seeds(space, config: SeedConfig, dm=None) -> SeedList:
    """One seed per element, in element order."""
    n = space.n if space is not None else np.asarray(dm).shape[0]
    if config.d > n:
        raise ConfigError(f"seed size {config.d} exceeds the number of elements {n}",
                          key="seed_size")
    if config.d == 1:
        return SeedList([frozenset([x]) for x in range(n)])

    if config.strategy is SeedStrategy.NEAREST_NEIGHBORS:
        if dm is None:
            raise ConfigError("nearest-neighbour seeds need a distance matrix", key="seed_strategy")
        dm = np.asarray(dm, dtype=float)
        return SeedList([nearest_neighbors(x, config.d, dm) for x in range(n)])

    graph = walk_graph(space)
    # one independent stream per start element, derived from the run seed
    streams = np.random.SeedSequence(config.rng_seed).spawn(n)
    seeds, incomplete = [], []
    for x in range(n):
        rng = np.random.default_rng(streams[x])
        try:
            seed = random_walk(x, config.d, graph, rng, config.weighted_walk)
        except IsolatedStart:
            seed = frozenset([x])
        if len(seed) < config.d:
            incomplete.append(x)
        seeds.append(seed)
    return SeedList(seeds, incomplete)

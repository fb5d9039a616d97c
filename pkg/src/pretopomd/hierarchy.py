"""Closures of seeds, set attraction and the quasi-hierarchy built on them."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse

from .exceptions import EmptySetInFamily, UnknownElement, UnknownSetId
from .seeding import SeedConfig, SeedList, set_seeds
from .space import PretopologicalSpace, as_mask, to_set

OUTLIER = -1


@dataclass
class SetFamily:
    """Distinct sets in non-decreasing size order; position is identity."""

    sets: list[frozenset[int]]
    # family index of a(S) for every member S (itself when S is a fixpoint);
    # -1 when the successor was not computed
    successor: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def __getitem__(self, i):
        return self.sets[i]

    def indicator(self, n: int) -> np.ndarray:
        M = np.zeros((len(self.sets), n), dtype=bool)
        for i, s in enumerate(self.sets):
            M[i, list(s)] = True
        return M


def iterative_pseudoclosure(space: PretopologicalSpace, seeds: Sequence) -> SetFamily:
    """Grow every seed by repeated pseudoclosure, keeping each distinct set once.

    Sets are bucketed by size and buckets are processed in increasing size.
    Since the pseudoclosure never shrinks a set, whatever it produces lands
    in the current bucket (a fixpoint) or a later one, so each set is
    expanded exactly once.
    """
    n = space.n
    buckets: dict[int, list[np.ndarray]] = {}
    keys: dict[bytes, tuple[int, int]] = {}

    def add(mask):
        key = np.packbits(mask).tobytes()
        if key in keys:
            return keys[key]
        size = int(mask.sum())
        bucket = buckets.setdefault(size, [])
        keys[key] = (size, len(bucket))
        bucket.append(mask)
        return keys[key]

    for seed in seeds:
        mask = as_mask(seed, n)
        if mask.any():
            add(mask)

    links: dict[tuple[int, int], tuple[int, int]] = {}
    size = 0
    while True:
        pending = [s for s in buckets if s > size]
        if not pending:
            break
        size = min(pending)
        bucket = buckets[size]
        grown = space.pseudoclosure_masks(np.stack(bucket))
        for pos, g in enumerate(grown):
            links[(size, pos)] = add(g)

    order = {}
    sets = []
    for s in sorted(buckets):
        for pos, mask in enumerate(buckets[s]):
            order[(s, pos)] = len(sets)
            sets.append(to_set(mask))
    successor = [-1] * len(sets)
    for src, dst in links.items():
        successor[order[src]] = order[dst]
    return SetFamily(sets, successor)


def attraction_matrix(family) -> np.ndarray:
    """``Atr[a, b] = (|A|/|B|) * (|A & B|/|B|)``: pull exerted by set ``a`` on ``b``.

    Large sets strongly attract the small sets they overlap; disjoint sets
    do not attract each other at all. The diagonal is left at 0.
    """
    sets = list(family)
    if not sets:
        raise EmptySetInFamily("family is empty")
    if any(len(s) == 0 for s in sets):
        raise EmptySetInFamily("family contains an empty set")
    n = max(max(s) for s in sets) + 1
    rows = np.repeat(np.arange(len(sets)), [len(s) for s in sets])
    cols = np.fromiter(itertools.chain.from_iterable(sets), dtype=np.intp, count=len(rows))
    M = sparse.csr_array((np.ones(len(rows)), (rows, cols)), shape=(len(sets), n))
    inter = (M @ M.T).toarray()
    size = np.array([len(s) for s in sets], dtype=float)
    atr = (size[:, None] / size[None, :]) * (inter / size[None, :])
    np.fill_diagonal(atr, 0.0)
    return atr


@dataclass
class QuasiHierarchy:
    sets: list[frozenset[int]]
    adjacency: np.ndarray
    parent: np.ndarray
    th_qh: float
    # position of each surviving set in the original family
    source_index: list[int] = field(default_factory=list)
    # (removed, kept) family positions, one per resolved mutual pair
    merges: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self):
        return len(self.sets)

    def children(self, i: int) -> list[int]:
        return np.flatnonzero(self.parent == i).tolist()

    @property
    def roots(self) -> list[int]:
        return np.flatnonzero(self.parent == -1).tolist()

    def links(self) -> list[tuple[int, int]]:
        return [tuple(p) for p in np.argwhere(self.adjacency).tolist()]


def quasi_hierarchy(family, atr, th_qh: float = 0.5, tie_break: str = "index",
                    rng=None) -> QuasiHierarchy:
    """Threshold attraction into links and merge mutually attracted sets.

    ``Adj[i, j] = 1`` when ``Atr[i, j] > th_qh``. For every mutual pair (in
    ascending ``(i, j)`` order) the smaller set is dropped; equal sizes drop
    the higher index, or a random one with ``tie_break="random"``. The parent
    of a surviving set is its smallest strictly larger attractor.
    """
    sets = list(family)
    atr = np.asarray(atr, dtype=float)
    m = len(sets)
    if atr.shape != (m, m):
        raise ValueError(f"attraction matrix shape {atr.shape} does not match {m} sets")
    if not th_qh > 0:
        raise ValueError("th_qh must be strictly positive")
    if tie_break == "random" and rng is None:
        rng = np.random.default_rng(0)

    size = np.array([len(s) for s in sets])
    adj = atr > th_qh
    np.fill_diagonal(adj, False)
    alive = np.ones(m, dtype=bool)
    merges = []
    for i, j in np.argwhere(np.triu(adj & adj.T, 1)).tolist():
        if not (alive[i] and alive[j]):
            continue
        if size[i] != size[j]:
            drop = j if size[i] > size[j] else i
        elif tie_break == "random":
            drop = i if rng.random() < 0.5 else j
        else:
            drop = j
        alive[drop] = False
        merges.append((drop, j if drop == i else i))

    keep = np.flatnonzero(alive)
    adj = adj[np.ix_(keep, keep)]
    kept_size = size[keep]
    # candidate parents of column i: rows j linking to i with a larger set
    cand = adj & (kept_size[:, None] > kept_size[None, :])
    masked = np.where(cand, kept_size[:, None], np.iinfo(np.int64).max)
    parent = np.argmin(masked, axis=0)  # first minimum -> lowest index on ties
    parent = np.where(cand.any(axis=0), parent, -1)
    return QuasiHierarchy([sets[k] for k in keep], adj.astype(np.int8), parent.astype(int),
                          float(th_qh), keep.tolist(), merges)


@dataclass
class AnalysisResult:
    seeds: SeedList
    family: SetFamily
    attraction: np.ndarray
    hierarchy: QuasiHierarchy


def quasi_structural_analysis(space: PretopologicalSpace, seed_config: SeedConfig = SeedConfig(),
                              th_qh: float = 0.5, dm=None, tie_break: str = "index"):
    """Seeds, closures, attraction and quasi-hierarchy in one pass."""
    seeds = set_seeds(space, seed_config, dm)
    family = iterative_pseudoclosure(space, seeds)
    atr = attraction_matrix(family)
    rng = np.random.default_rng(seed_config.rng_seed) if tie_break == "random" else None
    qh = quasi_hierarchy(family, atr, th_qh, tie_break, rng)
    return AnalysisResult(seeds, family, atr, qh)


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    clusters: list[frozenset[int]]
    # index in the quasi-hierarchy of each reported cluster
    set_ids: list[int] = field(default_factory=list)

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def n_outliers(self) -> int:
        return int(np.sum(self.labels == OUTLIER))

    def to_csv(self) -> str:
        lines = ["element_id,cluster_id"]
        lines += [f"{i},{int(c)}" for i, c in enumerate(self.labels)]
        return "\n".join(lines) + "\n"


def top_level_sets(qh: QuasiHierarchy, n: int) -> list[int]:
    """Sets without a parent; the whole universe is replaced by its children.

    A childless universe is kept, so a one-set hierarchy still yields a cluster.
    """
    full = [i for i, s in enumerate(qh.sets) if len(s) == n and qh.children(i)]
    tops = [i for i in qh.roots if i not in full]
    for f in full:
        tops += [c for c in qh.children(f) if c not in tops]
    return sorted(tops)


def extract_clusters(qh: QuasiHierarchy, n: int) -> ClusterAssignment:
    """Flat labels from the top-level sets; elements in none are outliers.

    Elements covered by several top-level sets go to the smallest one
    (lowest index on ties). Sets that end up with no element are dropped.
    """
    tops = top_level_sets(qh, n)
    best = np.full(n, -1)
    best_size = np.full(n, np.iinfo(np.int64).max)
    for t in tops:
        idx = np.fromiter(qh.sets[t], dtype=np.intp)
        better = len(qh.sets[t]) < best_size[idx]
        best[idx[better]] = t
        best_size[idx[better]] = len(qh.sets[t])
    used = [t for t in tops if np.any(best == t)]
    relabel = {t: k for k, t in enumerate(used)}
    labels = np.array([relabel.get(b, OUTLIER) for b in best], dtype=int)
    return ClusterAssignment(labels, [qh.sets[t] for t in used], used)


# -- export ----------------------------------------------------------------

def dendrogram_nodes(qh: QuasiHierarchy) -> list[dict]:
    return [{"id": i, "elements": sorted(s), "parent": int(qh.parent[i]),
             "children": qh.children(i)} for i, s in enumerate(qh.sets)]


def export_dendrogram(qh: QuasiHierarchy, fmt: str = "json") -> str:
    fmt = fmt.lower()
    if fmt == "json":
        return json.dumps(dendrogram_nodes(qh), indent=1) + "\n"
    if fmt == "dot":
        lines = ["digraph quasi_hierarchy {"]
        lines += [f'  s{i} [label="{len(s)}"];' for i, s in enumerate(qh.sets)]
        lines += [f"  s{i} -> s{j};" for i, j in qh.links()]
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown dendrogram format {fmt!r}")


class Dendrogram:
    """Read-only view over an exported dendrogram JSON document."""

    def __init__(self, nodes: list[dict]):
        self.nodes = {node["id"]: node for node in nodes}

    @classmethod
    def loads(cls, text: str) -> "Dendrogram":
        doc = json.loads(text)
        return cls(doc["nodes"] if isinstance(doc, dict) else doc)

    def node(self, set_id: int) -> dict:
        try:
            return self.nodes[set_id]
        except KeyError:
            raise UnknownSetId(f"no set with id {set_id}") from None

    def roots(self) -> list[int]:
        return sorted(i for i, node in self.nodes.items() if node["parent"] == -1)

    def path(self, element: int) -> list[int]:
        """Chain from the smallest set holding ``element`` up to its root."""
        holders = [i for i, node in self.nodes.items() if element in node["elements"]]
        if not holders:
            raise UnknownElement(f"element {element} is in no set")
        current = min(holders, key=lambda i: (len(self.nodes[i]["elements"]), i))
        chain = [current]
        while self.nodes[current]["parent"] != -1:
            current = self.nodes[current]["parent"]
            chain.append(current)
        return chain

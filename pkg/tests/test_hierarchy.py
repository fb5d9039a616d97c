import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pretopomd.data import feature_group
from pretopomd.exceptions import EmptySetInFamily, UnknownElement, UnknownSetId
from pretopomd.hierarchy import (
    OUTLIER,
    Dendrogram,
    QuasiHierarchy,
    attraction_matrix,
    export_dendrogram,
    extract_clusters,
    iterative_pseudoclosure,
    quasi_hierarchy,
    quasi_structural_analysis,
)
from pretopomd.seeding import SeedConfig
from pretopomd.space import Prenetwork, PretopologicalSpace, build_prenetwork

from tests.helpers import chain_space, numeric_table, random_space


def fs(*sets):
    return [frozenset(s) for s in sets]


# -- iterative pseudoclosure ------------------------------------------------

def test_identity_space_keeps_singletons():
    space = PretopologicalSpace((Prenetwork("N", np.zeros((4, 4))),), (1.0,), "N")
    family = iterative_pseudoclosure(space, fs({0}, {1}, {2}, {3}))
    assert family.sets == fs({0}, {1}, {2}, {3})
    assert family.successor == [0, 1, 2, 3]


def test_chain_family():
    family = iterative_pseudoclosure(chain_space(3), fs({0}, {1}, {2}))
    assert set(family.sets) == set(fs({0}, {1}, {2}, {0, 1}, {1, 2}, {0, 1, 2}))
    assert len(family) == 6


def test_duplicate_seeds_collapse():
    family = iterative_pseudoclosure(chain_space(2), fs({0, 1}, {0, 1}))
    assert family.sets == fs({0, 1})


@given(st.integers(0, 2**32 - 1))
def test_family_sorted_unique_and_closed(seed):
    rng = np.random.default_rng(seed)
    space = random_space(rng, n=int(rng.integers(2, 25)))
    seeds = [frozenset(rng.choice(space.n, size=int(rng.integers(1, 3)), replace=False).tolist())
             for _ in range(space.n)]
    family = iterative_pseudoclosure(space, seeds)
    sizes = [len(s) for s in family]
    assert sizes == sorted(sizes)
    assert len(set(family.sets)) == len(family)
    assert set(seeds) <= set(family.sets)
    for i, s in enumerate(family):
        assert family.sets[family.successor[i]] == space.pseudoclosure(s)


# -- attraction -------------------------------------------------------------

def test_attraction_examples():
    atr = attraction_matrix(fs({1, 2}, {2, 3, 4}))
    assert atr[0, 1] == pytest.approx(2 / 9, abs=1e-15)
    assert atr[1, 0] == 0.75
    atr = attraction_matrix(fs({1, 2}, {1, 2, 3, 4}))
    assert (atr[1, 0], atr[0, 1]) == (2.0, 0.25)
    atr = attraction_matrix(fs({0}, {1}))
    assert not atr.any()


def test_attraction_rejects_empty():
    with pytest.raises(EmptySetInFamily):
        attraction_matrix(fs({0}, set()))
    with pytest.raises(EmptySetInFamily):
        attraction_matrix([])


def random_family(rng, n=15, m=None):
    m = int(rng.integers(1, 20)) if m is None else m
    return [frozenset(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False).tolist())
            for _ in range(m)]


@given(st.integers(0, 2**32 - 1))
def test_attraction_positive_iff_overlap(seed):
    family = random_family(np.random.default_rng(seed))
    atr = attraction_matrix(family)
    for a, A in enumerate(family):
        for b, B in enumerate(family):
            if a != b:
                assert (atr[a, b] > 0) == bool(A & B)


# -- quasi-hierarchy ----------------------------------------------------------

def test_one_way_link():
    family = fs({1, 2}, {2, 3, 4})
    qh = quasi_hierarchy(family, attraction_matrix(family), 0.5)
    assert qh.sets == family
    assert qh.links() == [(1, 0)]
    assert qh.parent.tolist() == [1, -1]


def test_duplicates_merge():
    family = fs({0, 1}, {0, 1})
    qh = quasi_hierarchy(family, attraction_matrix(family))
    assert qh.sets == fs({0, 1}) and qh.source_index == [0]


def test_random_tie_break_is_seeded():
    family = fs({0, 1}, {0, 1})
    atr = attraction_matrix(family)
    kept = {quasi_hierarchy(family, atr, tie_break="random",
                            rng=np.random.default_rng(s)).source_index[0] for s in range(20)}
    assert kept == {0, 1}


def test_parent_is_smallest_larger_attractor():
    family = fs({0}, {0, 1, 2}, {0, 1, 2, 3, 4}, {0, 5, 6})
    qh = quasi_hierarchy(family, attraction_matrix(family))
    # {0} is attracted by all three larger sets; the two size-3 sets tie, lowest index wins
    assert qh.parent[0] == 1
    assert qh.parent[1] == 2
    assert qh.parent[2] == -1


def test_threshold_is_strict():
    family = fs({0, 1}, {0, 1, 2, 3})
    atr = np.array([[0, 0.5], [0.5, 0]])
    qh = quasi_hierarchy(family, atr, 0.5)
    assert not qh.adjacency.any()
    with pytest.raises(ValueError):
        quasi_hierarchy(family, atr, 0.0)


@given(st.integers(0, 2**32 - 1))
def test_no_mutual_links_and_smaller_removed(seed):
    rng = np.random.default_rng(seed)
    family = random_family(rng)
    atr = attraction_matrix(family)
    qh = quasi_hierarchy(family, atr, 0.5)
    adj = qh.adjacency.astype(bool)
    assert not np.any(adj & adj.T)
    mutual = (atr > 0.5) & (atr > 0.5).T
    removed = set()
    for dropped, kept in qh.merges:
        assert mutual[dropped, kept]
        assert len(family[dropped]) <= len(family[kept])
        assert dropped not in removed and kept not in removed
        removed.add(dropped)
    assert sorted(removed | set(qh.source_index)) == list(range(len(family)))
    # every surviving mutual pair must have been broken
    alive = set(qh.source_index)
    assert not any(i in alive and j in alive for i, j in np.argwhere(mutual))
    for i, p in enumerate(qh.parent):
        if p >= 0:
            assert adj[p, i] and len(qh.sets[p]) > len(qh.sets[i])


# -- flat clusters -----------------------------------------------------------

def hand_qh(sets, parent):
    m = len(sets)
    adj = np.zeros((m, m), dtype=np.int8)
    for i, p in enumerate(parent):
        if p >= 0:
            adj[p, i] = 1
    return QuasiHierarchy(fs(*sets), adj, np.array(parent), 0.5, list(range(m)))


def test_extract_roots_and_outliers():
    ca = extract_clusters(hand_qh([{0, 1}, {2, 3}], [-1, -1]), 5)
    assert ca.labels.tolist() == [0, 0, 1, 1, OUTLIER]
    assert ca.n_outliers == 1
    assert ca.to_csv() == "element_id,cluster_id\n0,0\n1,0\n2,1\n3,1\n4,-1\n"


def test_extract_replaces_universe_by_children():
    ca = extract_clusters(hand_qh([{0, 1}, {2}, {0, 1, 2, 3}], [2, 2, -1]), 4)
    assert ca.clusters == fs({0, 1}, {2})
    assert ca.labels.tolist() == [0, 0, 1, OUTLIER]


def test_extract_childless_universe_is_a_cluster():
    ca = extract_clusters(hand_qh([{0}], [-1]), 1)
    assert ca.labels.tolist() == [0]


def test_extract_overlap_goes_to_smallest():
    ca = extract_clusters(hand_qh([{0, 1, 2, 3, 4}, {4, 5, 6}], [-1, -1]), 7)
    assert ca.labels[4] == 1
    assert ca.labels.tolist() == [0, 0, 0, 0, 1, 1, 1]


def test_extract_drops_emptied_cluster():
    ca = extract_clusters(hand_qh([{0, 1}, {0}, {1}], [-1, -1, -1]), 2)
    assert ca.clusters == fs({0}, {1})


# -- export ------------------------------------------------------------------

def test_export_json_and_dot():
    qh = hand_qh([{0}, {0, 1}, {5}], [1, -1, -1])
    nodes = json.loads(export_dendrogram(qh, "json"))
    assert nodes[0] == {"id": 0, "elements": [0], "parent": 1, "children": []}
    assert nodes[1]["children"] == [0]
    dot = export_dendrogram(qh, "dot")
    assert 's2 [label="1"];' in dot and dot.count("->") == 1 and "s1 -> s0;" in dot
    with pytest.raises(ValueError):
        export_dendrogram(qh, "xml")


def test_dendrogram_queries():
    qh = hand_qh([{0}, {0, 1}, {0, 1, 2}, {7}], [1, 2, -1, -1])
    d = Dendrogram.loads(export_dendrogram(qh))
    assert d.roots() == [2, 3]
    assert d.path(0) == [0, 1, 2]
    assert d.path(2) == [2]
    with pytest.raises(UnknownElement):
        d.path(5)
    with pytest.raises(UnknownSetId):
        d.node(999)


# -- full pipeline ------------------------------------------------------------

def blob_space(points):
    table = numeric_table(points)
    net = build_prenetwork(feature_group(table, ["x"]), name="Num")
    return PretopologicalSpace.from_prenetworks([net], "Num"), np.abs(
        np.subtract.outer(points, points))


def test_three_blobs_become_roots():
    rng = np.random.default_rng(0)
    points = np.concatenate([c + rng.uniform(-0.3, 0.3, 15) for c in (0, 10, 20)])
    space, dm = blob_space(points)
    res = quasi_structural_analysis(space, SeedConfig(d=3), 0.5, dm)
    ca = extract_clusters(res.hierarchy, len(points))
    assert sorted(map(sorted, ca.clusters)) == [list(range(0, 15)), list(range(15, 30)),
                                                list(range(30, 45))]
    assert ca.n_outliers == 0


def test_single_element_universe():
    space, dm = blob_space(np.array([1.0]))
    res = quasi_structural_analysis(space, SeedConfig(d=1), 0.5, dm)
    assert res.hierarchy.sets == fs({0}) and res.hierarchy.roots == [0]


def test_pipeline_export_is_deterministic():
    rng = np.random.default_rng(1)
    points = np.concatenate([rng.normal(c, 0.5, 20) for c in (0, 8)])
    outs = []
    for _ in range(2):
        space, dm = blob_space(points)
        outs.append(export_dendrogram(quasi_structural_analysis(space, SeedConfig(d=3), 0.5, dm).hierarchy))
    assert outs[0] == outs[1]

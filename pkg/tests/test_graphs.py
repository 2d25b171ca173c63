import random
from functools import lru_cache
from itertools import combinations

import numpy as np
import pytest
from math import comb

from shiftgraphs.errors import ArityMismatch, CycleDetected, NotIncreasing, TooSmall
from shiftgraphs.graphs import (
    DeBruijnGraph,
    build_truncated,
    debruijn,
    heights,
    lift_edges,
    longest_path,
    satisfies,
    shift_graph,
    topological_order,
)
from shiftgraphs.relations import OrderRelation, RelationSet, enumerate_classes, shift_relation


def brute_satisfies(v, v2, rel):
    """Some increasing map from the relation's points sends the domain to v and sorted images to v2."""
    pts = rel.points()
    targets = sorted(set(v) | set(v2))
    if len(targets) != len(pts):
        return False
    phi = dict(zip(pts, targets))
    return tuple(phi[a] for a in rel.domain) == tuple(v) and tuple(sorted(phi[t] for t in rel.images)) == tuple(v2)


def brute_edges(rels, n, k):
    verts = list(combinations(range(n), k))
    return {(v, w) for v in verts for w in verts if any(brute_satisfies(v, w, r) for r in rels)}


def dfs_longest(g, mask):
    @lru_cache(maxsize=None)
    def best(i):
        if not mask[i]:
            return -1
        v = g.vertex(i)
        out = 0
        for w in g.successors(v):
            j = g.index(w)
            if mask[j]:
                out = max(out, 1 + best(j))
        return out

    return max((best(i) for i in range(g.num_vertices)), default=-1)


def test_satisfies_shift():
    rel = shift_relation(2)
    assert satisfies((0, 1), (1, 5), rel)
    assert not satisfies((0, 1), (2, 5), rel)
    with pytest.raises(ArityMismatch):
        satisfies((0, 1, 2), (1, 2, 3), rel)
    with pytest.raises(NotIncreasing):
        satisfies((1, 0), (1, 2), rel)


@pytest.mark.parametrize("k,n", [(1, 6), (2, 7), (3, 7)])
def test_edges_match_brute_force_for_every_class(k, n):
    for rel in enumerate_classes(k):
        g = build_truncated(RelationSet.of(rel), n)
        assert set(g.edges()) == brute_edges([rel], n, k), str(rel)


def test_family_graph_is_union():
    E = enumerate_classes(2)
    g = build_truncated(E, 7)
    assert set(g.edges()) == brute_edges(list(E), 7, 2)


@pytest.mark.parametrize("k,n", [(1, 8), (2, 9), (3, 10), (4, 9)])
def test_shift_csr_matches_generic(k, n):
    g = shift_graph(k, n)
    h = build_truncated(RelationSet.of(shift_relation(k)), n)
    assert g.num_edges == comb(n, k + 1)
    for a, b in zip(g.csr(), h.csr()):
        assert np.array_equal(a, b)


def test_edges_raise_every_coordinate_and_are_antisymmetric():
    E = enumerate_classes(3)
    g = build_truncated(E, 9)
    edges = set(g.edges())
    for v, w in edges:
        assert all(a < b for a, b in zip(v, w))
    rng = random.Random(7)
    verts = list(combinations(range(9), 3))
    for _ in range(10_000):
        v, w = rng.choice(verts), rng.choice(verts)
        assert not ((v, w) in edges and (w, v) in edges)


def test_contractability_closure():
    rng = random.Random(11)
    for rel in enumerate_classes(2):
        g = build_truncated(RelationSet.of(rel), 12)
        edges = set(g.edges())
        for _ in range(50):
            phi = sorted(rng.sample(range(12), 8))
            small = build_truncated(RelationSet.of(rel), 8)
            for v, w in small.edges():
                assert (tuple(phi[x] for x in v), tuple(phi[x] for x in w)) in edges


def test_vertex_indexing_roundtrip():
    g = shift_graph(3, 9)
    for i in range(g.num_vertices):
        assert g.index(g.vertex(i)) == i
    assert np.array_equal(topological_order(g), np.arange(g.num_vertices))
    with pytest.raises(TooSmall):
        shift_graph(4, 3)


@pytest.mark.parametrize("seed", range(5))
def test_heights_match_dfs(seed):
    rng = np.random.default_rng(seed)
    for g in (shift_graph(2, 14), build_truncated(enumerate_classes(2), 9)):
        mask = rng.random(g.num_vertices) < 0.5
        edges, path = longest_path(g, mask)
        want = dfs_longest(g, tuple(mask))
        assert edges == max(want, 0)
        if path:
            assert len(path) == edges + 1
            for v, w in zip(path, path[1:]):
                assert g.has_edge(v, w)
                assert mask[g.index(v)] and mask[g.index(w)]


def test_full_shift_longest_path():
    # all vertices included: the path 0..k-1 -> 1..k -> ... has n - k edges
    g = shift_graph(3, 10)
    assert longest_path(g)[0] == 7
    assert heights(g, lambda v: False).max_height == 0


def test_lift_of_shift_is_next_shift():
    for k in range(1, 7):
        lifted = lift_edges(shift_relation(k))
        assert len(lifted) == 1
        assert lifted.relations[0] == OrderRelation(tuple(range(k + 1)), tuple(range(1, k + 2)))


@pytest.mark.parametrize("rel", [shift_relation(2), OrderRelation((0, 1), (2, 3)), OrderRelation((0, 2), (1, 3))])
def test_lift_edge_vertex_bijection(rel):
    for n in range(4, 13, 4):
        g = build_truncated(RelationSet.of(rel), n)
        lifted = build_truncated(lift_edges(rel), n)
        merged = {}
        for v, w in g.edges():
            merged[tuple(sorted(set(v) | set(w)))] = (v, w)
        # one edge per merged tuple, and every merged tuple of size k' arises
        assert len(merged) == g.num_edges
        assert set(merged) == set(map(tuple, lifted.vertices.tolist()))
        for m1, m2 in lifted.edges():
            assert merged[m1][1] == merged[m2][0]
        consecutive = sum(1 for v, w in g.edges() for x in g.successors(w))
        assert lifted.num_edges == consecutive


def test_debruijn_graph():
    g = debruijn(2, 3)
    assert g.num_vertices == 8 and g.num_edges == 16
    assert g.label(5) == "101" and g.parse("101") == 5
    assert g.successors(g.parse("101")) == [g.parse("010"), g.parse("011")]
    assert sorted(g.self_loops()) == [0, 7]
    for x in range(8):
        for y in g.successors(x):
            assert x in g.predecessors(y)
    with pytest.raises(CycleDetected):
        topological_order(g)
    assert DeBruijnGraph(16, 2).label(255) == "ff"

from fractions import Fraction
from itertools import combinations, permutations

import pytest
from hypothesis import given, settings, strategies as st

from shiftgraphs.errors import (
    BadArity,
    CycleDetected,
    DegenerateThreshold,
    EmptyFamily,
    ImageCollision,
    LengthMismatch,
    NotIncreasing,
    NotProgressive,
    TooLarge,
)
from shiftgraphs.relations import (
    OrderRelation,
    RelationSet,
    canonical,
    canonical_pattern,
    compute_w,
    core,
    disjoint_relation,
    edge_threshold,
    enumerate_classes,
    equivalent,
    family_threshold_bounds,
    finite_path_bounds,
    infinite_path_probability_bound,
    load_relations,
    normalize,
    shift_relation,
    vertex_threshold,
)


def brute_classes(k, ground):
    """Relabel-invariant keys of all relations of length k on range(ground)."""
    keys = set()
    for dom in combinations(range(ground), k):
        for imgs in permutations(range(ground), k):
            if all(t > a for a, t in zip(dom, imgs)):
                pts = sorted(set(dom) | set(imgs))
                r = {x: i for i, x in enumerate(pts)}
                keys.add(tuple((r[a], r[t]) for a, t in zip(dom, imgs)))
    return keys


def brute_w(mapping):
    best = 0
    for s in mapping:
        n, cur = 0, s
        while cur in mapping:
            n += 1
            cur = mapping[cur]
        best = max(best, n)
    return best + 1


relations = st.integers(1, 4).flatmap(
    lambda k: st.tuples(
        st.lists(st.integers(0, 12), min_size=k, max_size=k, unique=True).map(sorted),
        st.lists(st.integers(1, 6), min_size=k, max_size=k),
    )
).map(lambda t: (t[0], [a + d for a, d in zip(*t)])).filter(lambda t: len(set(t[1])) == len(t[1]))


def test_validation_errors():
    with pytest.raises(NotIncreasing):
        OrderRelation((1, 0), (2, 3))
    with pytest.raises(NotProgressive):
        OrderRelation((0, 2), (1, 2))
    with pytest.raises(ImageCollision):
        OrderRelation((0, 1), (2, 2))
    with pytest.raises(LengthMismatch):
        OrderRelation((0, 1), (2,))


def test_shift_and_disjoint():
    s = shift_relation(3)
    assert s.domain == (1, 2, 3) and s.images == (2, 3, 4)
    assert str(canonical(s)) == "0->1,1->2,2->3"
    d = disjoint_relation(2)
    assert [t - a for a, t in zip(d.domain, d.images)] == [2, 2]
    assert compute_w(d) == 2


@pytest.mark.parametrize("k,count", [(1, 1), (2, 4), (3, 26)])
def test_class_counts_match_brute_force(k, count):
    E = enumerate_classes(k)
    assert len(E) == count
    assert len(brute_classes(k, 2 * k)) == count
    assert len(set(E.patterns())) == count


def test_enumeration_budget():
    with pytest.raises(TooLarge):
        enumerate_classes(7)
    with pytest.raises(BadArity):
        enumerate_classes(0)


@given(relations)
def test_pattern_is_relabeling_invariant(t):
    dom, imgs = t
    rel = OrderRelation(dom, imgs)
    moved = OrderRelation([3 * a + 5 for a in dom], [3 * x + 5 for x in imgs])
    assert equivalent(rel, moved)
    assert canonical(rel) == canonical(moved)
    assert canonical_pattern(canonical(rel)) == canonical_pattern(rel)


@given(relations)
def test_w_matches_iteration(t):
    rel = OrderRelation(*t)
    assert compute_w(rel) == brute_w(rel.as_map())
    c = core(rel)
    assert set(c.domain) <= set(rel.domain)
    assert all(x in rel.domain for x in c.images)
    assert compute_w(c) == brute_w(c.as_map())
    assert compute_w(c) <= compute_w(rel)


def test_w_edge_cases():
    assert compute_w({}) == 1
    with pytest.raises(CycleDetected):
        compute_w({0: 1, 1: 0})


@pytest.mark.parametrize("K", range(1, 11))
def test_shift_thresholds(K):
    assert vertex_threshold(shift_relation(K)).exact == Fraction(K - 1, K)
    assert edge_threshold(shift_relation(K)).exact == Fraction(K, K + 1)


def test_threshold_report_json():
    rep = vertex_threshold(shift_relation(3))
    assert rep.to_dict() == {"kind": "vertex", "num": 2, "den": 3, "w": 3}


def test_finite_path_bounds():
    b = finite_path_bounds(2, 6)
    assert (b.lo, b.hi) == (Fraction(1, 3), Fraction(1, 2))
    assert b.to_dict()["lo"] == {"num": 1, "den": 3}
    for k in range(2, 10):
        for p in range(1, 10):
            b = finite_path_bounds(p, k)
            assert b.lo <= b.hi
    assert finite_path_bounds(1, 5).hi == 0
    with pytest.raises(BadArity):
        finite_path_bounds(2, 1)
    with pytest.raises(BadArity):
        finite_path_bounds(0, 4)


def test_corollary_bound():
    assert infinite_path_probability_bound(Fraction(3, 4), Fraction(1, 2)) == Fraction(1, 2)
    assert infinite_path_probability_bound(Fraction(1, 4), Fraction(1, 2)) == 0
    with pytest.raises(DegenerateThreshold):
        infinite_path_probability_bound(1, 1)


def test_relation_set_roundtrip():
    rs = RelationSet.of(shift_relation(2), disjoint_relation(2))
    assert load_relations(__import__("json").dumps(rs.to_dict())) == rs
    single = load_relations('{"domain": [0, 1], "images": [1, 2]}')
    assert equivalent(single.relations[0], shift_relation(2))
    with pytest.raises(EmptyFamily):
        RelationSet.of()


def test_normalize_keeps_classes():
    E = enumerate_classes(3)
    N = normalize(E)
    assert N.normalized
    assert len({r.domain for r in N}) == 1
    assert [canonical_pattern(r) for r in N] == E.patterns()


def test_family_bounds():
    single = family_threshold_bounds(RelationSet.of(shift_relation(3)))
    assert single.lo == single.hi == Fraction(2, 3)
    fam = family_threshold_bounds(RelationSet.of(shift_relation(2), disjoint_relation(2)))
    # the disjoint relation has an empty core, so the family's upper end is 0
    assert fam.lo == fam.hi == 0
    pair = family_threshold_bounds(RelationSet.of(shift_relation(3), OrderRelation((0, 1, 2), (2, 3, 4))))
    assert 0 <= pair.lo <= pair.hi <= Fraction(1, 2)
    with pytest.raises(EmptyFamily):
        family_threshold_bounds(RelationSet(2, ()))


@settings(max_examples=30)
@given(st.integers(1, 3))
def test_family_bounds_of_all_classes(k):
    rep = family_threshold_bounds(enumerate_classes(k), budget=5_000)
    assert rep.lo <= rep.hi
    assert rep.hi == min(vertex_threshold(r).lo for r in enumerate_classes(k))


def test_core_examples():
    c = core(shift_relation(3))
    assert c.domain == (1, 2) and c.images == (2, 3)
    assert core(shift_relation(1)).is_empty()
    assert core(OrderRelation((1, 2), (3, 4))).is_empty()
    assert compute_w({1: 5, 2: 6}) == 2
    assert compute_w(core(shift_relation(4))) == 4
    assert edge_threshold(OrderRelation((1, 2), (3, 4))).exact == Fraction(1, 2)
    assert vertex_threshold(OrderRelation((1, 2), (3, 4))).exact == 0

from fractions import Fraction
from itertools import permutations
from math import comb, factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chi2_contingency

from shiftgraphs import rng
from shiftgraphs.errors import ArityTooLarge, IncompatibleColoring, TieDetected, ValidationError
from shiftgraphs.graphs import shift_graph
from shiftgraphs.pattern_oracle import (
    ColoringSpec,
    PatternEvent,
    ah_sample,
    all_words,
    argmax_mod_coloring,
    best_pattern_coloring,
    exact_event_probability,
    f_eps_coloring,
    f_eps_limit_compare,
    finite_path_construction_measure,
    index_word,
    level1_field,
    orbit_of,
    pattern_word,
    word_index,
    z_measure_exact,
    z_measure_mc,
)
from shiftgraphs.percolation import sample_extremal
from shiftgraphs.relations import (
    OrderRelation,
    canonical_pattern,
    compute_w,
    enumerate_classes,
    finite_path_bounds,
    shift_relation,
)


def brute_z(rel, color):
    """Count permutations of the relation's points where color(domain values) > color(image values)."""
    pts = rel.points()
    hits = 0
    for perm in permutations(range(len(pts))):
        x = dict(zip(pts, perm))
        if color([x[a] for a in rel.domain]) > color([x[t] for t in rel.images]):
            hits += 1
    return Fraction(hits, factorial(len(pts)))


def test_words():
    assert pattern_word((0.9, 0.1, 0.5)) == "201"
    assert word_index("201") == 4
    for L in range(1, 5):
        words = all_words(L)
        assert [word_index(w) for w in words] == list(range(factorial(L)))
        assert [index_word(i, L) for i in range(factorial(L))] == words


def test_exact_event_probability():
    ev = PatternEvent(3, lambda r: r[0] > r[1] > r[2])
    assert exact_event_probability(ev).fraction == Fraction(1, 6)
    with pytest.raises(ArityTooLarge):
        exact_event_probability(PatternEvent(11, lambda r: True))


def test_argmax_and_limit_compare():
    assert argmax_mod_coloring([0.1, 0.7, 0.3], 2) == 1
    assert argmax_mod_coloring([0.1, 0.3, 0.7], 2) == 0
    with pytest.raises(TieDetected):
        argmax_mod_coloring([0.5, 0.5], 2)
    assert f_eps_limit_compare([0.2, 0.9], [0.9, 0.1])
    assert not f_eps_limit_compare([0.9, 0.2], [0.1, 0.9])


@pytest.mark.parametrize("w", range(2, 8))
def test_f_eps_attains_one_minus_one_over_w(w):
    rel = shift_relation(w - 1)
    z = z_measure_exact(rel, f_eps_coloring(rel))
    assert z.fraction == 1 - Fraction(1, w)
    assert z.den == factorial(w)


def test_f_eps_small_cases_by_hand_oracle():
    rel = shift_relation(2)
    orbit = orbit_of(rel)
    got = brute_z(rel, lambda vals: max((vals[i], j) for j, i in enumerate(orbit)))
    assert got == Fraction(2, 3) == z_measure_exact(rel, f_eps_coloring(rel)).fraction


@pytest.mark.parametrize("k", [1, 2, 3])
def test_argmax_tables_match_brute_force(k):
    for rel in enumerate_classes(k):
        for p in (1, 2, 3):
            col = ColoringSpec.argmax_mod(k, p)
            want = brute_z(rel, lambda vals: argmax_mod_coloring(vals, p))
            assert z_measure_exact(rel, col).fraction == want


tables = st.integers(1, 3).flatmap(
    lambda k: st.tuples(st.just(k), st.sampled_from(list(enumerate_classes(k))),
                        st.lists(st.integers(0, 2), min_size=factorial(k), max_size=factorial(k))))


@settings(max_examples=150, deadline=None)
@given(tables)
def test_upper_bound_law(args):
    k, rel, table = args
    col = ColoringSpec.from_table(k, table, p=3)
    z = z_measure_exact(rel, col).fraction
    assert z <= 1 - Fraction(1, compute_w(rel))
    want = brute_z(rel, lambda vals: table[word_index(pattern_word(vals))])
    assert z == want


def test_z_depends_on_image_order():
    # same edge shape, different assignment of images to domain points
    a = OrderRelation((0, 1, 2), (2, 3, 4))
    b = OrderRelation((0, 1, 2), (3, 2, 4))
    col = ColoringSpec.from_table(3, [0, 0, 0, 0, 0, 1])
    assert z_measure_exact(a, col).fraction == Fraction(19, 120)
    assert z_measure_exact(b, col).fraction == Fraction(17, 120)


def test_coloring_spec_roundtrip_and_errors():
    col = ColoringSpec.from_table(2, [1, 0])
    assert ColoringSpec.from_dict(col.to_dict()) == col
    assert col.to_dict()["table"] == {"01": 1, "10": 0}
    am = ColoringSpec.argmax_mod(3, 2)
    assert ColoringSpec.from_dict(am.to_dict()) == am
    assert am.as_table().tolist() == [0, 1, 0, 1, 0, 0]
    with pytest.raises(ValidationError):
        ColoringSpec.from_table(2, [0, 1, 1])
    with pytest.raises(IncompatibleColoring):
        z_measure_exact(shift_relation(2), ColoringSpec.argmax_mod(3, 2))


@pytest.mark.parametrize("p,k", [(2, 3), (2, 4), (2, 5), (2, 6), (3, 5), (2, 7), (3, 7), (2, 9)])
def test_construction_measure_lies_in_bounds(p, k):
    z = finite_path_construction_measure(p, k).fraction
    b = finite_path_bounds(p, k)
    assert b.lo <= z <= b.hi
    if (k - 1) % p == 0:
        assert z == b.lo == b.hi


def test_construction_measure_brute_force():
    # colors of (u_1..u_{k-1}) and (u_2..u_k) by argmax position mod p
    for p, k in [(2, 3), (2, 4), (3, 4)]:
        hits = sum(1 for u in permutations(range(k))
                   if argmax_mod_coloring(u[:-1], p) > argmax_mod_coloring(u[1:], p))
        assert finite_path_construction_measure(p, k).fraction == Fraction(hits, factorial(k))


def test_best_pattern_coloring():
    r = best_pattern_coloring(3, 2)
    assert r.probability.fraction == Fraction(1, 3) and r.exhaustive and r.evaluated == 4
    r = best_pattern_coloring(4, 2)
    assert Fraction(1, 4) <= r.probability.fraction <= Fraction(1, 2)
    r = best_pattern_coloring(3, 3)
    assert r.probability.fraction == Fraction(1, 3)
    heur = best_pattern_coloring(5, 2, budget=2_000, seed=1)
    assert not heur.exhaustive
    assert heur.probability.fraction >= finite_path_construction_measure(2, 5).fraction
    again = best_pattern_coloring(5, 2, budget=2_000, seed=1)
    assert again == heur


def test_mc_coverage():
    rel = shift_relation(2)
    col = ColoringSpec.argmax_mod(2, 2)
    exact = z_measure_exact(rel, col).fraction
    covered = sum(z_measure_mc(rel, col, 2000, seed=s).contains(exact) for s in range(100))
    assert covered >= 97
    with pytest.raises(ValidationError):
        z_measure_mc(rel, col, 10)


def test_mc_f_eps_estimate():
    rel = shift_relation(3)
    est = z_measure_mc(rel, f_eps_coloring(rel), 50_000, seed=4)
    assert est.contains(Fraction(3, 4))


def test_ah_sample_shares_subset_uniforms():
    x = ah_sample(lambda u: u[(0,)], 2, 6, seed=1)
    # vertices (0, j) share the uniform attached to {0}
    assert np.all(x[:5] == x[0])
    y = ah_sample(lambda u: u[(0, 1)], 2, 6, seed=1)
    assert len(set(y.tolist())) == comb(6, 2)
    z = ah_sample(lambda u: u[(1,)], 2, 6, seed=1)
    # the uniform of {j} is the same whether j sits in position 0 or 1
    assert z[0] == x[5]


def test_ah_sample_distribution_chi_square():
    # category: which of u_{v0}, u_{v1}, u_{v0 v1} is largest, for vertex (0, 1)
    def f(u):
        return np.argmax(np.stack([u[(0,)], u[(1,)], u[(0, 1)]]), axis=0)

    reps = 100_000
    cats = ah_sample(f, 2, 2, seed=9, replicas=reps)[:, 0]
    direct = np.argmax(rng.stream(9, 1234).random((reps, 3)), axis=1)
    table = np.array([np.bincount(cats, minlength=3), np.bincount(direct, minlength=3)])
    assert chi2_contingency(table)[1] > 0.01


def test_extremal_matches_ah_sample():
    g = shift_graph(3, 12)
    col = ColoringSpec.argmax_mod(2, 2)
    first = ah_sample(level1_field(col, [0, 1]), 3, 12, seed=5, replicas=4)
    second = ah_sample(level1_field(col, [1, 2]), 3, 12, seed=5, replicas=4)
    masks = sample_extremal(g, 2, 5, replicas=4)
    assert np.array_equal(masks, first > second)


def test_rank_encoding_of_canonical_pattern():
    pat = canonical_pattern(OrderRelation((0, 2), (3, 5)))
    assert pat.size == 4
    assert pat.domain_pos == (0, 1) and pat.image_pos == (2, 3)
    assert pat.roles == ("domain", "domain", "image", "image")

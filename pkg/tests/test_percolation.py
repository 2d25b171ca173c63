from fractions import Fraction

import numpy as np
import pytest

from shiftgraphs import rng
from shiftgraphs.errors import NoCrossing, NotShiftGraph, ValidationError
from shiftgraphs.graphs import build_truncated, height_batch, shift_graph
from shiftgraphs.percolation import (
    SweepReport,
    SweepRow,
    count_paths_at_least,
    empirical_threshold,
    path_stats,
    sample_extremal,
    sample_iid,
    sweep,
)
from shiftgraphs.relations import RelationSet, enumerate_classes, shift_relation


def brute_paths(g, mask, p):
    """Enumerate every path explicitly and count those with at least p edges."""
    total = 0

    def walk(v, length):
        nonlocal total
        if length >= p:
            total += 1
        for w in g.successors(v):
            if mask[g.index(w)]:
                walk(w, length + 1)

    for i in range(g.num_vertices):
        if mask[i]:
            walk(g.vertex(i), 0)
    return total


@pytest.mark.parametrize("p", [0, 1, 2, 3])
def test_count_paths_matches_enumeration(p):
    gen = np.random.default_rng(p)
    for g in (shift_graph(2, 9), build_truncated(enumerate_classes(2), 7)):
        mask = gen.random(g.num_vertices) < 0.6
        assert count_paths_at_least(g, mask, p) == brute_paths(g, mask, p)


def test_sample_iid_rate_and_nesting():
    g = shift_graph(2, 60)
    lo = sample_iid(g, Fraction(1, 3), seed=3)
    hi = sample_iid(g, Fraction(1, 2), seed=3)
    assert np.all(hi.included | ~lo.included)
    assert abs(lo.inclusion_rate - 1 / 3) < 0.03
    assert sample_iid(g, 0, 3).included.sum() == 0
    assert sample_iid(g, 1, 3).included.all()
    with pytest.raises(ValidationError):
        sample_iid(g, Fraction(3, 2), 3)


def test_below_is_exact():
    u = np.array([0, (1 << 63) - 1, 1 << 63, (1 << 64) - 1], dtype=np.uint64)
    assert rng.below(u, Fraction(1, 2)).tolist() == [True, True, False, False]
    assert rng.below(u, 1).all() and not rng.below(u, 0).any()


def test_streams_are_independent_of_order():
    a = rng.uniform_u64(rng.stream(7, 1, 2), 5)
    rng.uniform_u64(rng.stream(7, 1, 1), 5)
    b = rng.uniform_u64(rng.stream(7, 1, 2), 5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, rng.uniform_u64(rng.stream(8, 1, 2), 5))
    with pytest.raises(ValueError):
        rng.stream(-1)


def test_extremal_has_no_long_paths():
    for k, p in [(3, 2), (4, 3), (5, 2), (4, 2)]:
        g = shift_graph(k, 14)
        masks = sample_extremal(g, p, seed=1, replicas=300)
        h = height_batch(g, masks)
        assert h.max() <= p


def test_extremal_rate_near_lower_bound():
    g = shift_graph(3, 30)
    masks = sample_extremal(g, 2, seed=2, replicas=3000)
    rates = masks.mean(axis=1)
    se = rates.std(ddof=1) / np.sqrt(len(rates))
    assert abs(rates.mean() - 1 / 3) <= 3 * se


def test_extremal_rejects_non_shift():
    g = build_truncated(RelationSet.of(enumerate_classes(2).relations[1]), 8)
    with pytest.raises(NotShiftGraph):
        sample_extremal(g, 2, seed=1)


def test_path_stats():
    g = shift_graph(2, 8)
    s = path_stats(g, np.ones(g.num_vertices, dtype=bool), 3)
    assert s.longest == 6 and s.max_height == 7
    assert len(s.witness) == 7
    assert s.count_ge_p == count_paths_at_least(g, np.ones(g.num_vertices, dtype=bool), 3)
    empty = path_stats(g, np.zeros(g.num_vertices, dtype=bool), 1)
    assert empty.longest == 0 and empty.count_ge_p == 0 and empty.witness == []


def test_sweep_is_nested_and_thread_independent():
    g = shift_graph(2, 40)
    grid = ["0.1", "1/3", "0.5", "0.9"]
    a = sweep(g, [Fraction(x) for x in grid], p=4, replicas=60, seed=11)
    b = sweep(g, [Fraction(x) for x in grid], p=4, replicas=60, seed=11, workers=4)
    assert a.to_csv() == b.to_csv()
    f = a.frequencies()
    assert all(x <= y for x, y in zip(f, f[1:]))
    assert a.rows[-1].corollary_bound == Fraction(4, 5)
    assert a.rows[0].corollary_bound == 0
    assert a.to_csv().splitlines()[0] == "lambda,replicas,freq_path_ge_p,ci_halfwidth,mean_inclusion,corollary_bound"


def test_sweep_validation():
    g = shift_graph(2, 10)
    with pytest.raises(ValidationError):
        sweep(g, [Fraction(1, 2)], p=1, replicas=0)
    with pytest.raises(ValidationError):
        sweep(g, [Fraction(2)], p=1, replicas=5)


def _report(freqs):
    lams = [Fraction(i, 10) for i in range(len(freqs))]
    rows = tuple(SweepRow(lam, 100, int(f * 100), 0.0, None) for lam, f in zip(lams, freqs))
    return SweepReport("shift", 1, 0, rows)


def test_empirical_threshold():
    assert empirical_threshold(_report([0.0, 0.2, 0.8, 1.0])) == pytest.approx(0.15)
    assert empirical_threshold(_report([0.0, 0.5, 1.0])) == pytest.approx(0.1)
    with pytest.raises(NoCrossing):
        empirical_threshold(_report([0.0, 0.1, 0.2]))
    with pytest.raises(NoCrossing):
        empirical_threshold(_report([0.0, 1.0]))


def test_single_relation_shift_graph():
    g = build_truncated(RelationSet.of(shift_relation(2)), 20)
    r = sweep(g, [Fraction(3, 4)], p=2, replicas=5, seed=1)
    assert r.rows[0].corollary_bound == Fraction(1, 2)


def test_empirical_threshold_exact_grid_hit():
    rows = tuple(SweepRow(Fraction(x), 10, h, 0.0, None) for x, h in [("0.2", 0), ("0.4", 5), ("0.6", 10)])
    assert empirical_threshold(SweepReport("shift", 1, 0, rows)) == pytest.approx(0.4)


def test_extreme_grid_points():
    g = shift_graph(3, 12)
    r = sweep(g, [0, 1], p=2, replicas=10, seed=1)
    assert r.frequencies() == [0.0, 1.0]

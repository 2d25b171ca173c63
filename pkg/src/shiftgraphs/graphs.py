"""Finite truncations of contractable graphs, shift graphs and de Bruijn graphs.

A :class:`TruncatedGraph` has the increasing ``k``-tuples of ``range(n)`` as
vertices, indexed in lexicographic order.  Every edge raises the first
coordinate, so lexicographic order is already topological and every edge
points to a higher index; the height kernels rely on that.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Callable, Iterator, Sequence, Union

import numpy as np

from . import kernels
from ._combinat import combinations_array, lex_rank
from .errors import ArityMismatch, CycleDetected, NotIncreasing, TooLarge, TooSmall, ValidationError
from .relations import OrderRelation, RelationSet, canonical, edge_signature, shift_relation, _pattern_of

Vertex = tuple[int, ...]
Included = Union[None, np.ndarray, Sequence[bool], Callable[[Vertex], bool]]

MAX_DEBRUIJN_VERTICES = 1 << 22
_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"
MAX_MATERIALIZED_EDGES = 50_000_000


def _check_increasing(v: Sequence[int], name: str) -> None:
    if any(not a < b for a, b in zip(v, v[1:])):
        raise NotIncreasing(f"{name} = {tuple(v)} is not strictly increasing")


def satisfies(v: Sequence[int], v2: Sequence[int], rel: OrderRelation) -> bool:
    """Whether ``(v, v2)`` is an edge of ``G_rel``.

    True iff some increasing relabeling carries ``(domain, sorted images)`` of
    ``rel`` onto ``(v, v2)``.
    """
    if len(v) != rel.k or len(v2) != rel.k:
        raise ArityMismatch(f"tuples must have length {rel.k}")
    _check_increasing(v, "v")
    _check_increasing(v2, "v2")
    return _pattern_of(v, v2) == edge_signature(rel)


def _successors_for(sig, v: Sequence[int], n: int) -> Iterator[Vertex]:
    """Fill the image-only positions of an edge signature above the fixed domain values."""
    m = sig.size
    fixed = {q: v[i] for i, q in enumerate(sig.domain_pos)}
    vals = [0] * m
    # next fixed value after each position bounds the free values
    nxt = [n] * (m + 1)
    for q in range(m - 1, -1, -1):
        nxt[q] = fixed.get(q, nxt[q + 1])

    def rec(q: int, prev: int):
        if q == m:
            yield tuple(vals[j] for j in sig.image_pos)
            return
        if q in fixed:
            if fixed[q] <= prev:
                return
            vals[q] = fixed[q]
            yield from rec(q + 1, fixed[q])
            return
        for x in range(prev + 1, nxt[q]):
            vals[q] = x
            yield from rec(q + 1, x)

    yield from rec(0, -1)


@dataclass(frozen=True)
class GraphSummary:
    k: int
    n: int
    vertices: int
    edges: int
    spec: str

    def to_dict(self) -> dict:
        return {"k": self.k, "n": self.n, "vertices": self.vertices, "edges": self.edges, "spec": self.spec}


class TruncatedGraph:
    """``G_C`` restricted to increasing ``k``-tuples of ``range(n)``.

    ``spec`` is a :class:`RelationSet` or the tag ``"shift"``.  Edges are
    produced on demand by pattern matching; :meth:`csr` materializes them.
    """

    def __init__(self, spec: Union[RelationSet, str], n: int, k: int | None = None):
        if isinstance(spec, str):
            if spec != "shift" or k is None:
                raise ValidationError("string specs must be 'shift' with an explicit k")
            self.is_shift = True
            self.relations = RelationSet(k, (shift_relation(k),))
        else:
            self.is_shift = False
            self.relations = spec
            k = spec.k
        if n < k:
            raise TooSmall(f"truncation n={n} is smaller than k={k}")
        self.k = k
        self.n = n
        self.spec = spec
        self._signatures = sorted({edge_signature(r) for r in self.relations},
                                  key=lambda s: (s.size, s.domain_pos, s.image_pos))
        self._vertices: np.ndarray | None = None
        self._csr: tuple[np.ndarray, np.ndarray] | None = None

    def __repr__(self) -> str:
        return f"TruncatedGraph(k={self.k}, n={self.n}, spec={self.spec_label})"

    @property
    def spec_label(self) -> str:
        if self.is_shift:
            return "shift"
        return ";".join(str(canonical(r)) for r in self.relations)

    @property
    def num_vertices(self) -> int:
        return comb(self.n, self.k)

    @property
    def vertices(self) -> np.ndarray:
        if self._vertices is None:
            self._vertices = combinations_array(self.n, self.k)
        return self._vertices

    def vertex(self, i: int) -> Vertex:
        return tuple(int(x) for x in self.vertices[i])

    def index(self, v: Sequence[int]) -> int:
        return int(lex_rank([v], self.n)[0])

    def has_edge(self, v: Sequence[int], v2: Sequence[int]) -> bool:
        return any(satisfies(v, v2, r) for r in self.relations)

    def successors(self, v: Sequence[int]) -> list[Vertex]:
        if self.is_shift:
            head = tuple(v[1:])
            return [head + (j,) for j in range(v[-1] + 1, self.n)]
        out = set()
        for sig in self._signatures:
            out.update(_successors_for(sig, v, self.n))
        return sorted(out)

    def edges(self) -> Iterator[tuple[Vertex, Vertex]]:
        for i in range(self.num_vertices):
            v = self.vertex(i)
            for w in self.successors(v):
                yield v, w

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` adjacency over lexicographic vertex indices."""
        if self._csr is None:
            self._csr = self._shift_csr() if self.is_shift else self._generic_csr()
        return self._csr

    def _shift_csr(self):
        V = self.vertices
        k, n = self.k, self.n
        if comb(n, k + 1) > MAX_MATERIALIZED_EDGES:
            raise TooLarge("too many edges to materialize")
        last = V[:, -1]
        deg = n - 1 - last
        indptr = np.zeros(len(V) + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        has = deg > 0
        first = np.zeros(len(V), dtype=np.int64)
        if has.any():
            firsts = np.concatenate([V[has, 1:], (last[has] + 1)[:, None]], axis=1)
            first[has] = lex_rank(firsts, n)
        # successors of v are the consecutive ranks first[v], ..., first[v] + deg[v] - 1
        offs = np.arange(indptr[-1], dtype=np.int64) - np.repeat(indptr[:-1], deg)
        indices = np.repeat(first, deg) + offs
        return indptr, indices

    def _generic_csr(self):
        indptr = [0]
        indices: list[int] = []
        for i in range(self.num_vertices):
            succ = self.successors(self.vertex(i))
            if succ:
                indices.extend(lex_rank(succ, self.n).tolist())
            indptr.append(len(indices))
            if len(indices) > MAX_MATERIALIZED_EDGES:
                raise TooLarge("too many edges to materialize")
        return np.asarray(indptr, dtype=np.int64), np.asarray(indices, dtype=np.int64)

    @property
    def num_edges(self) -> int:
        if self.is_shift:
            return comb(self.n, self.k + 1)
        return int(self.csr()[0][-1])

    def level_starts(self) -> np.ndarray:
        """Start index of each block of vertices sharing a first coordinate."""
        first = self.vertices[:, 0]
        return np.flatnonzero(np.r_[True, first[1:] != first[:-1]]).astype(np.int64)

    def summary(self) -> GraphSummary:
        return GraphSummary(self.k, self.n, self.num_vertices, self.num_edges, self.spec_label)

    def edge_rows(self) -> Iterator[str]:
        """CSV rows ``v;v2`` with comma-separated tuples."""
        for v, w in self.edges():
            yield ",".join(map(str, v)) + ";" + ",".join(map(str, w))


def build_truncated(spec: RelationSet, n: int) -> TruncatedGraph:
    return TruncatedGraph(spec, n)


def shift_graph(k: int, n: int) -> TruncatedGraph:
    if k < 1:
        raise ValidationError("k must be positive")
    return TruncatedGraph("shift", n, k)


class DeBruijnGraph:
    """``B(d, k)``: strings of length ``k`` over ``d`` letters, encoded as base-``d`` integers."""

    def __init__(self, d: int, k: int, max_vertices: int = MAX_DEBRUIJN_VERTICES):
        if d < 2 or d > len(_DIGITS) or k < 1:
            raise ValidationError(f"need d >= 2 and k >= 1, got d={d}, k={k}")
        if d ** k > max_vertices:
            raise TooLarge(f"B({d},{k}) has {d ** k} vertices, above the budget {max_vertices}")
        self.d = d
        self.k = k
        self.num_vertices = d ** k

    def __repr__(self) -> str:
        return f"DeBruijnGraph(d={self.d}, k={self.k})"

    def label(self, x: int) -> str:
        digits = []
        for _ in range(self.k):
            x, r = divmod(x, self.d)
            digits.append(_DIGITS[r])
        return "".join(reversed(digits))

    def parse(self, s: str) -> int:
        if len(s) != self.k:
            raise ValidationError(f"string {s!r} does not have length {self.k}")
        return int(s, self.d)

    def successors(self, x: int) -> list[int]:
        base = (x % (self.d ** (self.k - 1))) * self.d
        return [base + c for c in range(self.d)]

    def predecessors(self, x: int) -> list[int]:
        tail = x // self.d
        step = self.d ** (self.k - 1)
        return [c * step + tail for c in range(self.d)]

    @property
    def num_edges(self) -> int:
        return self.num_vertices * self.d

    def self_loops(self) -> list[int]:
        return [x for x in range(self.num_vertices) if x in self.successors(x)]

    def edges(self) -> Iterator[tuple[int, int]]:
        for x in range(self.num_vertices):
            for y in self.successors(x):
                yield x, y


def debruijn(d: int, k: int, max_vertices: int = MAX_DEBRUIJN_VERTICES) -> DeBruijnGraph:
    if k < 2:
        raise ValidationError(f"de Bruijn graphs here need k >= 2, got {k}")
    return DeBruijnGraph(d, k, max_vertices)


def lift_edges(rel: OrderRelation) -> RelationSet:
    """Relation set on merged edge tuples that makes consecutive edges adjacent.

    An edge of ``G_rel`` is identified with the sorted union of its two
    endpoints (``k'`` points).  Two such tuples form an edge of the lifted graph
    iff the head of the first edge is the tail of the second.
    """
    sig = edge_signature(rel)
    kp = sig.size
    k = rel.k
    found = {}
    for t in range(kp, 2 * kp - k + 1):
        universe = set(range(t))
        for m1 in combinations(range(t), kp):
            head = [m1[q] for q in sig.image_pos]
            for m2 in combinations(range(t), kp):
                if [m2[q] for q in sig.domain_pos] != head:
                    continue
                if set(m1) | set(m2) != universe:
                    continue
                lifted = canonical(OrderRelation(m1, m2))
                found[lifted] = None
    rels = sorted(found, key=lambda r: (len(r.points()), r.domain, r.images))
    return RelationSet(kp, tuple(rels))


# -- DAG utilities -----------------------------------------------------------------

def _mask(g: TruncatedGraph, included: Included) -> np.ndarray:
    V = g.num_vertices
    if included is None:
        return np.ones(V, dtype=bool)
    if callable(included):
        return np.fromiter((bool(included(g.vertex(i))) for i in range(V)), dtype=bool, count=V)
    mask = np.asarray(included, dtype=bool)
    if mask.shape != (V,):
        raise ValidationError(f"inclusion mask must have shape ({V},)")
    return mask


def topological_order(g) -> np.ndarray:
    """Vertex indices in an order where every edge goes forward.

    Truncated contractable graphs come out in lexicographic order after the
    forward-edge check; anything else runs Kahn's algorithm and raises
    :class:`CycleDetected` if vertices remain.
    """
    if isinstance(g, TruncatedGraph):
        indptr, indices = g.csr()
        src = np.repeat(np.arange(g.num_vertices), np.diff(indptr))
        if np.all(indices > src):
            return np.arange(g.num_vertices)
        succ = [indices[indptr[i]:indptr[i + 1]].tolist() for i in range(g.num_vertices)]
    else:
        succ = [list(g.successors(x)) for x in range(g.num_vertices)]
    import heapq

    indeg = [0] * len(succ)
    for row in succ:
        for y in row:
            indeg[y] += 1
    heap = [x for x, dgr in enumerate(indeg) if dgr == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        x = heapq.heappop(heap)
        order.append(x)
        for y in succ[x]:
            indeg[y] -= 1
            if indeg[y] == 0:
                heapq.heappush(heap, y)
    if len(order) != len(succ):
        raise CycleDetected(f"{len(succ) - len(order)} vertices lie on or behind a cycle")
    return np.asarray(order, dtype=np.int64)


@dataclass(frozen=True)
class HeightField:
    """Per-vertex heights: 0 when excluded, 1 + max successor height otherwise."""

    graph: TruncatedGraph
    values: np.ndarray

    @property
    def max_height(self) -> int:
        return int(self.values.max()) if self.values.size else 0

    def __getitem__(self, v: Sequence[int]) -> int:
        return int(self.values[self.graph.index(v)])


def height_batch(g: TruncatedGraph, masks: np.ndarray) -> np.ndarray:
    """Heights for a batch of inclusion masks, shape ``(R, V)``."""
    indptr, indices = g.csr()
    masks = np.atleast_2d(np.asarray(masks, dtype=bool))
    return kernels.dag_heights(indptr, indices, masks, g.level_starts())


def heights(g: TruncatedGraph, included: Included = None) -> HeightField:
    mask = _mask(g, included)
    return HeightField(g, height_batch(g, mask[None, :])[0])


def witness_path(g: TruncatedGraph, h: np.ndarray) -> list[Vertex]:
    if h.size == 0 or h.max() == 0:
        return []
    indptr, indices = g.csr()
    cur = int(np.argmax(h))
    path = [cur]
    while h[cur] > 1:
        succ = indices[indptr[cur]:indptr[cur + 1]]
        cur = int(succ[np.argmax(h[succ] == h[cur] - 1)])
        path.append(cur)
    return [g.vertex(i) for i in path]


def longest_path(g: TruncatedGraph, included: Included = None) -> tuple[int, list[Vertex]]:
    """Longest directed path through included vertices, counted in edges."""
    h = heights(g, included).values
    top = int(h.max()) if h.size else 0
    if top == 0:
        return 0, []
    return top - 1, witness_path(g, h)

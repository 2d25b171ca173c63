"""Independence numbers of de Bruijn graphs.

``alpha(d, k)`` equals the largest number of length-``k`` strings whose
``(k-1)``-prefix lies in a set ``A`` and whose ``(k-1)``-suffix does not,
i.e. a maximum directed cut of ``B(d, k-1)``.  Both that subset formulation
and a direct maximum-independent-set search are provided so they can check
each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels, rng
from .errors import BudgetExceeded, ValidationError
from .graphs import DeBruijnGraph, debruijn
from .relations import finite_path_bounds

MAX_SUBSET_BITS = 26
MAX_MIS_VERTICES = 40_000
DEFAULT_NODE_BUDGET = 5_000_000


class DicutInstance:
    """Ground set: the ``d**(k-1)`` strings of length ``k - 1``, as base-``d`` integers."""

    def __init__(self, d: int, k: int):
        if d < 2 or k < 2:
            raise ValidationError(f"need d >= 2 and k >= 2, got d={d}, k={k}")
        self.d = d
        self.k = k
        self.ground = DeBruijnGraph(d, k - 1)
        self.size = self.ground.num_vertices

    def neighbor_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Out- and in-neighbors in ``B(d, k-1)`` without self-loops, ``-1`` padded."""
        N, d = self.size, self.d
        out = np.full((N, d), -1, dtype=np.int32)
        inn = np.full((N, d), -1, dtype=np.int32)
        for a in range(N):
            for j, z in enumerate(self.ground.successors(a)):
                if z != a:
                    out[a, j] = z
            for j, y in enumerate(self.ground.predecessors(a)):
                if y != a:
                    inn[a, j] = y
        return out, inn

    def strings(self, A: Iterable[int]) -> list[int]:
        """Length-``k`` strings with prefix in ``A`` and suffix outside ``A``."""
        A = set(A)
        top = self.d ** (self.k - 1)
        return [x for x in range(self.d ** self.k) if x // self.d in A and x % top not in A]

    def objective(self, A: Iterable[int]) -> int:
        return len(self.strings(A))

    def boundary(self, A: Iterable[int]) -> int:
        """Edges of ``B(d, k-1)`` leaving ``A`` (an independent way to get the objective)."""
        A = set(A)
        return sum(1 for y, z in self.ground.edges() if y in A and z not in A)


@dataclass(frozen=True)
class AlphaResult:
    d: int
    k: int
    value: int
    witness: tuple[int, ...]
    method: str
    exact: bool
    subset: tuple[int, ...] | None = None

    def labels(self) -> list[str]:
        g = DeBruijnGraph(self.d, self.k)
        return [g.label(x) for x in self.witness]

    def subset_labels(self) -> list[str] | None:
        if self.subset is None:
            return None
        g = DeBruijnGraph(self.d, self.k - 1)
        return [g.label(a) for a in self.subset]

    def to_dict(self) -> dict:
        out = {"d": self.d, "k": self.k, "alpha": self.value, "method": self.method, "exact": self.exact}
        out["witness"] = self.subset_labels() if self.subset is not None else self.labels()
        if self.subset is not None:
            out["independent_set"] = self.labels()
        return out


def is_independent(g: DeBruijnGraph, vertices: Sequence[int]) -> bool:
    S = set(vertices)
    for x in S:
        for y in g.successors(x):
            if y in S:
                return False
    return True


def _subset_result(inst: DicutInstance, mask: int, method: str, exact: bool) -> AlphaResult:
    A = tuple(a for a in range(inst.size) if mask >> a & 1)
    strings = tuple(inst.strings(A))
    return AlphaResult(inst.d, inst.k, len(strings), strings, method, exact, A)


def alpha_subset_exact(d: int, k: int, max_bits: int = MAX_SUBSET_BITS) -> AlphaResult:
    """Exact maximum over all subsets ``A``, by Gray-code enumeration."""
    inst = DicutInstance(d, k)
    if inst.size > max_bits:
        raise BudgetExceeded(f"2**{inst.size} subsets exceed the budget 2**{max_bits}")
    out, inn = inst.neighbor_arrays()
    best, mask = kernels.dicut_max(out, inn)
    res = _subset_result(inst, mask, "subset", True)
    assert res.value == best
    return res


# -- maximum independent set --------------------------------------------------------

def _conflict_bitsets(g: DeBruijnGraph) -> tuple[list[int], list[int]]:
    loops = set(g.self_loops())
    verts = [x for x in range(g.num_vertices) if x not in loops]
    pos = {x: i for i, x in enumerate(verts)}
    adj = [0] * len(verts)
    for x in verts:
        i = pos[x]
        for y in g.successors(x):
            if y != x and y in pos:
                adj[i] |= 1 << pos[y]
                adj[pos[y]] |= 1 << i
    return verts, adj


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _clique_cover_bound(cand: int, adj: list[int]) -> int:
    """Number of cliques in a greedy clique cover of ``cand``; bounds any independent subset."""
    cliques = 0
    rest = cand
    while rest:
        v = (rest & -rest).bit_length() - 1
        clique_common = adj[v] & rest
        rest &= ~(1 << v)
        while clique_common:
            u = (clique_common & -clique_common).bit_length() - 1
            rest &= ~(1 << u)
            clique_common &= adj[u]
        cliques += 1
    return cliques


def alpha_mis_exact(d: int, k: int, node_budget: int = DEFAULT_NODE_BUDGET) -> AlphaResult:
    """Exact independence number of ``B(d, k)`` by branch and bound.

    Both edge orientations count as conflicts and constant strings (self-loops)
    are never independent.  Branching picks the candidate of largest degree
    (smallest string on ties); the bound is a greedy clique cover.
    """
    g = debruijn(d, k, max_vertices=MAX_MIS_VERTICES)
    verts, adj = _conflict_bitsets(g)
    full = (1 << len(verts)) - 1
    best_set = 0
    best_size = 0
    nodes = 0

    def rec(chosen: int, size: int, cand: int):
        nonlocal best_set, best_size, nodes
        nodes += 1
        if nodes > node_budget:
            raise BudgetExceeded(f"branch and bound exceeded {node_budget} nodes")
        # vertices with no candidate neighbor can always be taken
        free = 0
        for v in _bits(cand):
            if not adj[v] & cand:
                free |= 1 << v
        if free:
            chosen |= free
            size += bin(free).count("1")
            cand &= ~free
        if not cand:
            if size > best_size:
                best_size, best_set = size, chosen
            return
        if size + _clique_cover_bound(cand, adj) <= best_size:
            return
        v = max(_bits(cand), key=lambda i: (bin(adj[i] & cand).count("1"), -i))
        rec(chosen | (1 << v), size + 1, cand & ~adj[v] & ~(1 << v))
        rec(chosen, size, cand & ~(1 << v))

    rec(0, 0, full)
    witness = tuple(sorted(verts[i] for i in _bits(best_set)))
    return AlphaResult(d, k, best_size, witness, "mis", True)


# -- heuristics ----------------------------------------------------------------------

def _greedy_subset(inst: DicutInstance, out: np.ndarray, inn: np.ndarray) -> list[bool]:
    member = [False] * inst.size
    while True:
        best_gain, best_a = 0, -1
        for a in range(inst.size):
            gain = _flip_gain(a, member, out, inn)
            if gain > best_gain:
                best_gain, best_a = gain, a
        if best_a < 0:
            return member
        member[best_a] = not member[best_a]


def _flip_gain(a: int, member: list[bool], out: np.ndarray, inn: np.ndarray) -> int:
    o = sum(1 for z in out[a] if z >= 0 and not member[z])
    i = sum(1 for y in inn[a] if y >= 0 and member[y])
    return i - o if member[a] else o - i


def alpha_local_search(d: int, k: int, seed: int = rng.DEFAULT_SEED, iterations: int = 10_000,
                       t_start: float = 2.0, t_end: float = 0.05) -> AlphaResult:
    """Simulated annealing over single-element flips of ``A``.

    Starts from a greedy improvement of the empty set; the temperature decays
    geometrically from ``t_start`` to ``t_end``.  The result is a lower bound.
    """
    inst = DicutInstance(d, k)
    out, inn = inst.neighbor_arrays()
    out_l, inn_l = out.tolist(), inn.tolist()
    member = _greedy_subset(inst, out_l, inn_l)
    value = inst.objective(a for a in range(inst.size) if member[a])
    best_value, best_member = value, list(member)
    gen = rng.stream(seed, 0xA11A)
    picks = gen.integers(0, inst.size, size=iterations)
    coins = gen.random(iterations)
    for t in range(iterations):
        temp = t_start * (t_end / t_start) ** (t / max(iterations - 1, 1))
        a = int(picks[t])
        gain = _flip_gain(a, member, out_l, inn_l)
        if gain >= 0 or coins[t] < math.exp(gain / temp):
            member[a] = not member[a]
            value += gain
            if value > best_value:
                best_value, best_member = value, list(member)
    mask = sum(1 << a for a in range(inst.size) if best_member[a])
    res = _subset_result(inst, mask, "local-search", False)
    assert res.value == best_value
    return res


def alpha(d: int, k: int, method: str = "auto", seed: int = rng.DEFAULT_SEED,
          iterations: int = 100_000) -> AlphaResult:
    if method == "subset" or (method == "auto" and d ** (k - 1) <= MAX_SUBSET_BITS):
        return alpha_subset_exact(d, k)
    if method == "mis":
        return alpha_mis_exact(d, k)
    if method in ("local", "auto"):
        return alpha_local_search(d, k, seed, iterations)
    raise ValidationError(f"unknown method {method!r}")


@dataclass(frozen=True)
class RatioRow:
    d: int
    k: int
    alpha: int
    exact: bool
    lam_lo: Fraction
    lam_hi: Fraction

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.alpha, self.d ** self.k)

    @property
    def gap(self) -> Fraction:
        """Signed distance ``lambda - ratio`` when the limit is known, else distance to the interval."""
        if self.lam_lo == self.lam_hi:
            return self.lam_lo - self.ratio
        if self.ratio < self.lam_lo:
            return self.lam_lo - self.ratio
        if self.ratio > self.lam_hi:
            return self.ratio - self.lam_hi
        return Fraction(0)


def alpha_ratio_report(d_range: Iterable[int], k: int, seed: int = rng.DEFAULT_SEED,
                       iterations: int = 100_000) -> list[RatioRow]:
    """``alpha(d, k) / d**k`` against the two-color path threshold of ``G_k``."""
    bounds = finite_path_bounds(2, k)
    rows = []
    for d in d_range:
        res = alpha(d, k, "auto", seed, iterations)
        rows.append(RatioRow(d, k, res.value, res.exact, bounds.lo, bounds.hi))
    return rows


def ratio_csv(rows: Sequence[RatioRow]) -> str:
    lines = ["d,k,alpha,exact,ratio,lambda_lo,lambda_hi,gap"]
    f = lambda x: f"{x.numerator}/{x.denominator}"  # noqa: E731
    for r in rows:
        lines.append(f"{r.d},{r.k},{r.alpha},{str(r.exact).lower()},{f(r.ratio)},{f(r.lam_lo)},{f(r.lam_hi)},{f(r.gap)}")
    return "\n".join(lines) + "\n"

"""Exact probabilities of order-pattern events over i.i.d. uniforms.

Ties between i.i.d. uniforms have probability zero, so any event that depends
only on relative order has probability ``#satisfying permutations / m!``.
This module evaluates such events exactly, implements the extremal colorings
(argmax position mod ``p`` and the epsilon-to-zero limit of the max/argmax
construction), searches pattern colorings exhaustively, and samples
contractable fields from subset-indexed uniforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from math import factorial, sqrt
from typing import Callable, Mapping, Sequence

import numpy as np

from . import kernels, rng
from ._combinat import combinations_array, lex_rank
from .errors import (
    ArityTooLarge,
    BadArity,
    IncompatibleColoring,
    TieDetected,
    ValidationError,
)
from .relations import OrderRelation, RelationSet, canonical_pattern, shift_relation

MAX_EXACT_ARITY = 10
Z99 = 2.5758293035489004  # two-sided 99% normal quantile


@dataclass(frozen=True)
class ExactProbability:
    num: int
    den: int

    def __post_init__(self):
        if self.den <= 0 or not 0 <= self.num <= self.den:
            raise ValidationError(f"not a probability: {self.num}/{self.den}")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __float__(self) -> float:
        return self.num / self.den

    def to_dict(self) -> dict:
        return {"num": self.num, "den": self.den}


@dataclass(frozen=True)
class PatternEvent:
    """Predicate on the relative order of ``arity`` uniforms.

    The predicate receives ``ranks`` with ``ranks[i]`` the rank of ``u_i``.
    """

    arity: int
    predicate: Callable[[tuple[int, ...]], bool]


def exact_event_probability(event: PatternEvent, max_arity: int = MAX_EXACT_ARITY) -> ExactProbability:
    if event.arity > max_arity:
        raise ArityTooLarge(f"arity {event.arity} exceeds {max_arity}")
    hits = sum(1 for ranks in permutations(range(event.arity)) if event.predicate(ranks))
    return ExactProbability(hits, factorial(event.arity))


# -- permutation words -------------------------------------------------------

def pattern_word(values: Sequence) -> str:
    """Rank word of a window: ``(0.9, 0.1, 0.5) -> "201"``."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0] * len(values)
    for r, i in enumerate(order):
        ranks[i] = r
    return "".join(map(str, ranks))


def word_index(word: str) -> int:
    """Lexicographic index of a permutation word among all words of its length."""
    digits = [int(c) for c in word]
    L = len(digits)
    idx = 0
    for i in range(L):
        c = sum(1 for j in range(i + 1, L) if digits[j] < digits[i])
        idx += c * factorial(L - 1 - i)
    return idx


def index_word(idx: int, L: int) -> str:
    return "".join(map(str, next(p for i, p in enumerate(permutations(range(L))) if i == idx)))


def all_words(L: int) -> list[str]:
    return ["".join(map(str, p)) for p in permutations(range(L))]


# -- colorings ---------------------------------------------------------------

@dataclass(frozen=True)
class ColoringSpec:
    """A function of the relative order of ``arity`` uniforms.

    ``kind`` is ``"argmax_mod"`` (color = argmax position mod ``p``),
    ``"table"`` (explicit colors indexed by pattern index) or ``"f_eps"``
    (compare ``(max, argmax position)`` over the argument indices in
    ``orbit``; real-valued, so no color count).
    """

    kind: str
    arity: int
    p: int | None = None
    table: tuple[int, ...] | None = None
    orbit: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("argmax_mod", "table", "f_eps"):
            raise ValidationError(f"unknown coloring kind {self.kind!r}")
        if self.arity < 0:
            raise ValidationError("arity must be nonnegative")
        if self.kind == "argmax_mod" and (self.p is None or self.p < 1):
            raise ValidationError("argmax_mod coloring needs p >= 1")
        if self.kind == "table":
            table = tuple(int(c) for c in self.table or ())
            object.__setattr__(self, "table", table)
            if len(table) != factorial(self.arity):
                raise ValidationError(f"table must cover all {factorial(self.arity)} patterns")
            p = self.p if self.p is not None else max(table) + 1
            object.__setattr__(self, "p", p)
            if any(not 0 <= c < p for c in table):
                raise ValidationError(f"colors must lie in 0..{p - 1}")
        if self.kind == "f_eps":
            if not self.orbit:
                raise ValidationError("f_eps coloring needs a nonempty orbit")
            if any(not 0 <= i < self.arity for i in self.orbit):
                raise ValidationError("orbit indices out of range")

    @classmethod
    def argmax_mod(cls, arity: int, p: int) -> "ColoringSpec":
        return cls("argmax_mod", arity, p=p)

    @classmethod
    def from_table(cls, arity: int, table: Sequence[int], p: int | None = None) -> "ColoringSpec":
        return cls("table", arity, p=p, table=tuple(table))

    def as_table(self) -> np.ndarray:
        """Colors indexed by pattern index."""
        if self.kind == "table":
            return np.asarray(self.table, dtype=np.int64)
        if self.kind == "argmax_mod":
            L = self.arity
            if L == 0:
                return np.zeros(1, dtype=np.int64)
            return np.array([w.index(str(L - 1)) % self.p for w in all_words(L)], dtype=np.int64)
        raise IncompatibleColoring("f_eps coloring is real-valued, not a color table")

    def to_dict(self) -> dict:
        if self.kind == "argmax_mod":
            return {"kind": "argmax_mod", "arity": self.arity, "p": self.p}
        if self.kind == "f_eps":
            return {"kind": "f_eps", "arity": self.arity, "orbit": list(self.orbit)}
        words = all_words(self.arity)
        return {"kind": "table", "arity": self.arity, "p": self.p,
                "table": {w: c for w, c in zip(words, self.table)}}

    @classmethod
    def from_dict(cls, obj: Mapping) -> "ColoringSpec":
        kind = obj["kind"]
        arity = int(obj["arity"])
        if kind == "argmax_mod":
            return cls.argmax_mod(arity, int(obj["p"]))
        if kind == "f_eps":
            return cls("f_eps", arity, orbit=tuple(obj["orbit"]))
        if kind == "table":
            tab = obj["table"]
            words = all_words(arity)
            missing = [w for w in words if w not in tab]
            if missing:
                raise ValidationError(f"table is missing patterns {missing[:3]}")
            return cls.from_table(arity, [int(tab[w]) for w in words], obj.get("p"))
        raise ValidationError(f"unknown coloring kind {kind!r}")


def argmax_mod_coloring(window: Sequence, p: int) -> int:
    if len(window) == 0:
        raise ValidationError("window must be nonempty")
    if len(set(window)) != len(window):
        raise TieDetected(f"window {tuple(window)} has repeated values")
    best = max(range(len(window)), key=lambda i: window[i])
    return best % p


def f_eps_limit_compare(first: Sequence, second: Sequence) -> bool:
    """Limit as epsilon -> 0 of ``f_eps(first) > f_eps(second)``.

    ``f_eps`` is the window maximum plus ``epsilon`` times its position, so in
    the limit the pair ``(max, argmax position)`` is compared lexicographically.
    """
    if len(first) != len(second) or not first:
        raise ValidationError("windows must be nonempty and of equal length")
    j1 = max(range(len(first)), key=lambda i: first[i])
    j2 = max(range(len(second)), key=lambda i: second[i])
    return (first[j1], j1) > (second[j2], j2)


def orbit_of(rel: OrderRelation) -> tuple[int, ...]:
    """Domain indices of a longest run ``s, tau(s), ...`` staying in the domain.

    Ties are broken by the smallest starting point.
    """
    idx = {a: i for i, a in enumerate(rel.domain)}
    best: list[int] = []
    for start in range(rel.k):
        chain = [start]
        cur = rel.images[start]
        while cur in idx:
            chain.append(idx[cur])
            cur = rel.images[idx[cur]]
        if len(chain) > len(best):
            best = chain
    return tuple(best)


def f_eps_coloring(rel: OrderRelation) -> ColoringSpec:
    return ColoringSpec("f_eps", rel.k, orbit=orbit_of(rel))


# -- exact z-measure -----------------------------------------------------------

def _f_eps_hits(ranks: np.ndarray, win_a: Sequence[int], win_b: Sequence[int]) -> np.ndarray:
    a = ranks[:, list(win_a)]
    b = ranks[:, list(win_b)]
    ma, mb = a.max(axis=1), b.max(axis=1)
    ja, jb = a.argmax(axis=1), b.argmax(axis=1)
    return (ma > mb) | ((ma == mb) & (ja > jb))


def _windows(rel: OrderRelation, coloring: ColoringSpec):
    if coloring.arity != rel.k:
        raise IncompatibleColoring(f"coloring arity {coloring.arity} does not match relation length {rel.k}")
    pat = canonical_pattern(rel)
    if coloring.kind == "f_eps":
        orbit = coloring.orbit
        for i, j in zip(orbit, orbit[1:]):
            if pat.image_pos[i] != pat.domain_pos[j]:
                raise IncompatibleColoring(f"orbit {orbit} is not a run of the relation")
        return pat.size, [pat.domain_pos[i] for i in orbit], [pat.image_pos[i] for i in orbit]
    return pat.size, list(pat.domain_pos), list(pat.image_pos)


def z_measure_exact(rel: OrderRelation, coloring: ColoringSpec,
                    max_coords: int = MAX_EXACT_ARITY) -> ExactProbability:
    """Exact measure of ``{x : f(x|S) > f(tau^* x)}`` for a pattern-based ``f``.

    ``f(tau^* x)`` reads ``x`` at ``tau(a_0), ..., tau(a_{k-1})`` in that
    order, so the result depends on the full relation, not only its edge shape.
    """
    m, win_a, win_b = _windows(rel, coloring)
    if m > max_coords:
        raise ArityTooLarge(f"{m} coordinates exceed the exact budget of {max_coords}")
    total = factorial(m)
    if coloring.kind == "f_eps":
        ranks = kernels.all_permutations(m)
        return ExactProbability(int(_f_eps_hits(ranks, win_a, win_b).sum()), total)
    table = coloring.as_table()
    if len(win_a) == 0:
        return ExactProbability(0, total)
    idx = kernels.window_patterns(m, np.array([win_a, win_b]))
    hits = int((table[idx[:, 0]] > table[idx[:, 1]]).sum())
    return ExactProbability(hits, total)


def finite_path_construction_measure(p: int, k: int, max_k: int = 9) -> ExactProbability:
    """Probability that argmax-mod-``p`` colors drop from ``(u_1..u_{k-1})`` to ``(u_2..u_k)``."""
    if k < 2:
        raise BadArity(f"construction needs k >= 2, got {k}")
    if k > max_k:
        raise ArityTooLarge(f"k = {k} exceeds the enumeration budget {max_k}")
    if p < 1:
        raise BadArity("p must be positive")
    return z_measure_exact(shift_relation(k - 1), ColoringSpec.argmax_mod(k - 1, p))


# -- coloring search -----------------------------------------------------------

@dataclass(frozen=True)
class ColoringSearchResult:
    coloring: ColoringSpec
    probability: ExactProbability
    exhaustive: bool
    evaluated: int

    def __iter__(self):
        yield self.coloring
        yield self.probability


def _joint_counts(m: int, win_a: Sequence[int], wins_b: Sequence[Sequence[int]]):
    wins = np.array([list(win_a)] + [list(w) for w in wins_b], dtype=np.int64)
    idx = kernels.window_patterns(m, wins)
    keys, counts = np.unique(idx, axis=0, return_counts=True)
    return keys.astype(np.int64), counts.astype(np.int64)


def _scores(tables: np.ndarray, keys: np.ndarray, counts: np.ndarray) -> np.ndarray:
    vals = tables[:, keys]  # (T, u, 1 + r)
    ok = np.all(vals[:, :, :1] > vals[:, :, 1:], axis=2)
    return ok.astype(np.int64) @ counts


def _exhaustive(q: int, p: int, keys, counts, chunk: int = 1 << 14):
    total = p ** q
    best_score, best_t = -1, 0
    weights = p ** np.arange(q, dtype=np.int64)
    for start in range(0, total, chunk):
        t = np.arange(start, min(total, start + chunk), dtype=np.int64)
        tables = (t[:, None] // weights[None, :]) % p
        s = _scores(tables, keys, counts)
        j = int(np.argmax(s))
        if s[j] > best_score:
            best_score, best_t = int(s[j]), int(t[j])
    table = [(best_t // p ** i) % p for i in range(q)]
    return table, best_score, total


def _local_search(q: int, p: int, keys, counts, start_tables, seed: int, budget: int):
    gen = rng.stream(seed, 0xC010)
    best_table, best_score = None, -1
    evaluated = 0
    restarts = list(start_tables)
    while evaluated < budget:
        cur = np.array(restarts.pop(0) if restarts else gen.integers(0, p, size=q), dtype=np.int64)
        cur_score = int(_scores(cur[None, :], keys, counts)[0])
        evaluated += 1
        improved = True
        while improved and evaluated < budget:
            improved = False
            # all single-entry recolorings of the current table
            cand = np.repeat(cur[None, :], q * p, axis=0)
            cand[np.arange(q * p), np.repeat(np.arange(q), p)] = np.tile(np.arange(p), q)
            s = _scores(cand, keys, counts)
            evaluated += len(cand)
            j = int(np.argmax(s))
            if s[j] > cur_score:
                cur, cur_score = cand[j].copy(), int(s[j])
                improved = True
        if cur_score > best_score:
            best_table, best_score = cur.tolist(), cur_score
    return best_table, best_score, evaluated


def search_colorings(m: int, win_a: Sequence[int], wins_b: Sequence[Sequence[int]], p: int,
                     budget: int = 1 << 20, seed: int = rng.DEFAULT_SEED,
                     start_tables: Sequence[Sequence[int]] = ()) -> ColoringSearchResult:
    """Best table ``g`` for ``P(g(window a) > g(window b) for every b)`` over ``m`` uniforms."""
    L = len(win_a)
    q = factorial(L)
    total = factorial(m)
    if L == 0:
        return ColoringSearchResult(ColoringSpec.from_table(0, [0], p=max(p, 1)),
                                    ExactProbability(0, total), True, 1)
    keys, counts = _joint_counts(m, win_a, wins_b)
    if p ** q <= budget:
        table, score, evaluated = _exhaustive(q, p, keys, counts)
        exhaustive = True
    else:
        table, score, evaluated = _local_search(q, p, keys, counts, start_tables, seed, budget)
        exhaustive = False
    return ColoringSearchResult(ColoringSpec.from_table(L, table, p=p),
                                ExactProbability(score, total), exhaustive, evaluated)


def best_pattern_coloring(k: int, p: int, budget: int = 1 << 20,
                          seed: int = rng.DEFAULT_SEED) -> ColoringSearchResult:
    """Best explicit table on the ``k - 1`` window for paths with ``p`` colors in ``G_k``.

    Exhaustive when ``p ** ((k-1)!)`` tables fit the budget, otherwise a
    seeded hill climb started from the argmax-mod-``p`` table
    (``exhaustive=False``).
    """
    if k < 2:
        raise BadArity(f"k must be at least 2, got {k}")
    if k > MAX_EXACT_ARITY:
        raise ArityTooLarge(f"k = {k} exceeds {MAX_EXACT_ARITY}")
    start = [ColoringSpec.argmax_mod(k - 1, p).as_table().tolist()]
    return search_colorings(k, range(k - 1), [range(1, k)], p, budget, seed, start)


def family_coloring_search(C: RelationSet, budget: int = 200_000,
                           seed: int = rng.DEFAULT_SEED) -> ColoringSearchResult:
    """Best coloring that strictly decreases along every edge type of a normalized family.

    The vertex color reads the coordinates at indices ``T``, where ``T``
    collects the indices whose successor coordinates are already coordinates
    of the vertex for every relation in the family.  Such a coloring makes
    inclusion a function of the vertex alone, which certifies the result as
    a lower bound.
    """
    if not C.normalized:
        raise ValidationError("family search needs a normalized relation set")
    S = C.relations[0].domain
    k = C.k
    pos = {a: i for i, a in enumerate(S)}
    heads = [r.sorted_images() for r in C]
    T = [l for l in range(k) if all(h[l] in pos for h in heads)]
    wins_b = [[pos[h[l]] for l in T] for h in heads]
    q = factorial(len(T))
    p = max(q, 2)
    start = [ColoringSpec.argmax_mod(len(T), p).as_table().tolist()] if T else []
    return search_colorings(k, T, wins_b, p, budget, seed, start)


# -- sampling --------------------------------------------------------------------

class SubsetUniforms(Mapping):
    """Uniforms addressed by positional subsets of the vertex tuple.

    ``u[(0, 2)]`` is an ``(R, V)`` array holding, for each replica and each
    vertex ``v``, the uniform attached to the set ``{v_0, v_2}``.
    """

    def __init__(self, levels: dict[int, np.ndarray], vertices: np.ndarray, n: int):
        self._levels = levels
        self._vertices = vertices
        self._n = n
        k = vertices.shape[1]
        self._keys = [s for r in range(1, k + 1) for s in combinations(range(k), r)]
        self._cache: dict[tuple[int, ...], np.ndarray] = {}

    def __getitem__(self, s):
        s = tuple(s)
        if s not in self._keys:
            raise KeyError(s)
        if s not in self._cache:
            idx = lex_rank(self._vertices[:, list(s)], self._n)
            self._cache[s] = rng.to_unit(self._levels[len(s)][:, idx])
        return self._cache[s]

    def __iter__(self):
        return iter(self._keys)

    def __len__(self):
        return len(self._keys)


def ah_sample(f: Callable[[SubsetUniforms], np.ndarray], k: int, n: int, seed: int,
              replicas: int | None = None) -> np.ndarray:
    """Sample ``x_v = f(uniforms on the nonempty subsets of v)`` for all ``v`` in ``range(n)^[k]``.

    One uniform is drawn per nonempty subset of ``range(n)`` of size at most
    ``k``; vertices sharing a subset share its uniform.  Returns ``(V,)`` or
    ``(replicas, V)``; vertices are in lexicographic order.
    """
    if k < 1 or n < k:
        raise ValidationError(f"need 1 <= k <= n, got k={k}, n={n}")
    R = 1 if replicas is None else int(replicas)
    vertices = combinations_array(n, k)
    levels = {r: rng.level_uniforms(seed, n, r, R) for r in range(1, k + 1)}
    u = SubsetUniforms(levels, vertices, n)
    out = np.broadcast_to(np.asarray(f(u)), (R, len(vertices))).copy()
    return out[0] if replicas is None else out


def level1_field(coloring: ColoringSpec, positions: Sequence[int]):
    """``f`` for :func:`ah_sample`: a pattern coloring of the level-1 uniforms at ``positions``."""
    if coloring.kind == "f_eps":
        raise IncompatibleColoring("level-1 fields need a color table")
    if len(positions) != coloring.arity:
        raise IncompatibleColoring("positions must match the coloring arity")
    table = coloring.as_table()

    def f(u: SubsetUniforms) -> np.ndarray:
        vals = np.stack([u[(i,)] for i in positions], axis=-1)
        shape = vals.shape[:-1]
        idx = kernels.lehmer_index(vals.reshape(-1, len(positions)))
        return table[idx].reshape(shape)

    return f


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    halfwidth: float
    samples: int
    seed: int

    @property
    def lo(self) -> float:
        return self.estimate - self.halfwidth

    @property
    def hi(self) -> float:
        return self.estimate + self.halfwidth

    def contains(self, value) -> bool:
        return self.lo <= float(value) <= self.hi


def z_measure_mc(rel: OrderRelation, coloring: ColoringSpec, samples: int,
                 seed: int = rng.DEFAULT_SEED) -> MCEstimate:
    """Monte Carlo estimate of :func:`z_measure_exact` with a 99% normal-approximation CI."""
    if samples < 1000:
        raise ValidationError("Monte Carlo needs at least 1000 samples")
    m, win_a, win_b = _windows(rel, coloring)
    u = rng.uniform_u64(rng.stream(seed, 0x2E7A), (samples, m))
    ranks = np.argsort(np.argsort(u, axis=1), axis=1)
    if coloring.kind == "f_eps":
        hits = _f_eps_hits(ranks, win_a, win_b)
    elif len(win_a) == 0:
        hits = np.zeros(samples, dtype=bool)
    else:
        table = coloring.as_table()
        hits = table[kernels.lehmer_index(ranks[:, win_a])] > table[kernels.lehmer_index(ranks[:, win_b])]
    est = float(hits.mean())
    half = Z99 * sqrt(est * (1 - est) / samples)
    return MCEstimate(est, half, samples, seed)

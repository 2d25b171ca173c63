"""Order relations, their equivalence classes, and the closed-form thresholds.

An order relation of length ``k`` is a map ``a_i -> images[i]`` on a strictly
increasing domain ``a_0 < ... < a_{k-1}`` with ``images[i] > a_i``.  Its
equivalence class is captured by a :class:`Pattern`: the positions of domain
and image points inside the merged, sorted point set.  Everything here is
exact (``fractions.Fraction``); no tolerance is used anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (
    BadArity,
    CycleDetected,
    DegenerateThreshold,
    EmptyFamily,
    ImageCollision,
    LengthMismatch,
    NotIncreasing,
    NotProgressive,
    TooLarge,
    ValidationError,
)

MAX_ENUMERATION_K = 6


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class Pattern:
    """Relabeling-invariant shape of an order relation.

    ``domain_pos[i]`` and ``image_pos[i]`` are the positions of ``a_i`` and
    ``tau(a_i)`` inside the sorted union of domain and images (``size`` points).
    """

    size: int
    domain_pos: tuple[int, ...]
    image_pos: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.domain_pos)

    @property
    def roles(self) -> tuple[str, ...]:
        """Per merged point: ``"domain"``, ``"image"`` or ``"both"``."""
        dom = set(self.domain_pos)
        img = set(self.image_pos)
        out = []
        for q in range(self.size):
            if q in dom and q in img:
                out.append("both")
            elif q in dom:
                out.append("domain")
            else:
                out.append("image")
        return tuple(out)

    def word(self) -> str:
        return "D" + ",".join(map(str, self.domain_pos)) + "|I" + ",".join(map(str, self.image_pos))


@dataclass(frozen=True)
class OrderRelation:
    domain: tuple[int, ...]
    images: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(int(a) for a in self.domain))
        object.__setattr__(self, "images", tuple(int(t) for t in self.images))
        _check_relation(self.domain, self.images)

    @property
    def k(self) -> int:
        return len(self.domain)

    def as_map(self) -> dict[int, int]:
        return dict(zip(self.domain, self.images))

    def sorted_images(self) -> tuple[int, ...]:
        return tuple(sorted(self.images))

    def points(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.domain) | set(self.images)))

    def to_dict(self) -> dict:
        return {"domain": list(self.domain), "images": list(self.images)}

    @classmethod
    def from_dict(cls, obj: Mapping) -> "OrderRelation":
        return validate_relation(obj["domain"], obj["images"])

    def __str__(self) -> str:
        return ",".join(f"{a}->{t}" for a, t in zip(self.domain, self.images))


def _check_relation(domain: Sequence[int], images: Sequence[int]) -> None:
    if len(domain) != len(images):
        raise LengthMismatch(f"domain has {len(domain)} points but {len(images)} images given")
    if len(domain) == 0:
        raise ValidationError("an order relation needs at least one point")
    if any(a < 0 for a in domain):
        raise ValidationError("domain points must be natural numbers")
    for a, b in zip(domain, domain[1:]):
        if not a < b:
            raise NotIncreasing(f"domain {tuple(domain)} is not strictly increasing")
    for i, (a, t) in enumerate(zip(domain, images)):
        if not t > a:
            raise NotProgressive(f"image of a_{i}={a} is {t}, must exceed it")
    if len(set(images)) != len(images):
        raise ImageCollision(f"images {tuple(images)} are not pairwise distinct")


def validate_relation(domain: Sequence[int], images: Sequence[int]) -> OrderRelation:
    """Build an :class:`OrderRelation`, raising on any violated invariant."""
    return OrderRelation(tuple(domain), tuple(images))


def shift_relation(k: int, start: int = 1) -> OrderRelation:
    """The shift ``i -> i + 1`` restricted to ``{start, ..., start + k - 1}``."""
    if k < 1:
        raise BadArity("shift relation needs k >= 1")
    dom = tuple(range(start, start + k))
    return OrderRelation(dom, tuple(a + 1 for a in dom))


def disjoint_relation(k: int) -> OrderRelation:
    """Relation on ``{1..k}`` whose images all lie above the domain."""
    if k < 1:
        raise BadArity("disjoint relation needs k >= 1")
    dom = tuple(range(1, k + 1))
    return OrderRelation(dom, tuple(a + k for a in dom))


def _pattern_of(domain: Sequence[int], images: Sequence[int]) -> Pattern:
    pts = sorted(set(domain) | set(images))
    pos = {x: q for q, x in enumerate(pts)}
    return Pattern(len(pts), tuple(pos[a] for a in domain), tuple(pos[t] for t in images))


def canonical_pattern(rel: OrderRelation) -> Pattern:
    return _pattern_of(rel.domain, rel.images)


def edge_signature(rel: OrderRelation) -> Pattern:
    """Pattern of ``(domain, sorted images)``: the shape of one edge of ``G_rel``.

    Relations that differ only in which domain point maps to which image share
    an edge signature and therefore define the same graph.
    """
    return _pattern_of(rel.domain, sorted(rel.images))


def canonical(rel: OrderRelation) -> OrderRelation:
    """Class representative living on positions ``0..size-1``."""
    pat = canonical_pattern(rel)
    return OrderRelation(pat.domain_pos, pat.image_pos)


def equivalent(r1: OrderRelation, r2: OrderRelation) -> bool:
    if r1.k != r2.k:
        raise LengthMismatch(f"relations have lengths {r1.k} and {r2.k}")
    return canonical_pattern(r1) == canonical_pattern(r2)


@dataclass(frozen=True)
class RelationSet:
    k: int
    relations: tuple[OrderRelation, ...]
    normalized: bool = False

    def __post_init__(self):
        rels = tuple(self.relations)
        object.__setattr__(self, "relations", rels)
        if any(r.k != self.k for r in rels):
            raise LengthMismatch(f"all relations must have length {self.k}")
        pats = [canonical_pattern(r) for r in rels]
        if len(set(pats)) != len(pats):
            raise ValidationError("relation set contains two equivalent relations")
        if self.normalized and len({r.domain for r in rels}) > 1:
            raise ValidationError("normalized relation set must share one domain")

    def __len__(self) -> int:
        return len(self.relations)

    def __iter__(self):
        return iter(self.relations)

    def patterns(self) -> list[Pattern]:
        return [canonical_pattern(r) for r in self.relations]

    def to_dict(self) -> dict:
        return {"k": self.k, "relations": [r.to_dict() for r in self.relations]}

    @classmethod
    def from_dict(cls, obj: Mapping) -> "RelationSet":
        rels = tuple(OrderRelation.from_dict(r) for r in obj["relations"])
        k = int(obj.get("k", rels[0].k if rels else 0))
        return cls(k, rels)

    @classmethod
    def of(cls, *rels: OrderRelation) -> "RelationSet":
        if not rels:
            raise EmptyFamily("relation set needs at least one relation")
        return cls(rels[0].k, tuple(rels))


def load_relations(text: str) -> RelationSet:
    """Parse either a single relation object or a relation-set object."""
    obj = json.loads(text)
    if "relations" in obj:
        return RelationSet.from_dict(obj)
    return RelationSet.of(OrderRelation.from_dict(obj))


def normalize(rs: RelationSet) -> RelationSet:
    """Re-embed every member on the common domain ``{0, k+1, 2(k+1), ...}``.

    Each gap between consecutive domain points has room for ``k`` image-only
    points, which is the most any relation of length ``k`` can need.
    """
    k = rs.k
    step = k + 1
    out = []
    for rel in rs.relations:
        pat = canonical_pattern(rel)
        dom = set(pat.domain_pos)
        value = {}
        last = None
        offset = 0
        for q in range(pat.size):
            if q in dom:
                last = sorted(dom).index(q) * step
                value[q] = last
                offset = 0
            else:
                offset += 1
                value[q] = (last if last is not None else -step) + offset
        out.append(OrderRelation(tuple(value[q] for q in pat.domain_pos),
                                 tuple(value[q] for q in pat.image_pos)))
    return RelationSet(k, tuple(out), normalized=True)


def _assign_images(m: int, dom: tuple[int, ...]) -> Iterable[tuple[int, ...]]:
    k = len(dom)
    free = [q for q in range(m) if q not in set(dom)]
    used: set[int] = set()
    imgs = [0] * k

    def rec(i: int):
        if i == k:
            if all(q in used for q in free):
                yield tuple(imgs)
            return
        # remaining slots must still be able to cover the uncovered free points
        missing = sum(1 for q in free if q not in used)
        if missing > k - i:
            return
        for q in range(dom[i] + 1, m):
            if q in used:
                continue
            used.add(q)
            imgs[i] = q
            yield from rec(i + 1)
            used.discard(q)

    yield from rec(0)


def enumerate_classes(k: int, max_k: int = MAX_ENUMERATION_K) -> RelationSet:
    """One canonical representative for every class in ``E_k``.

    Representatives live on positions ``0..m-1`` and come out sorted by
    ``(m, domain positions, image positions)``.
    """
    from itertools import combinations

    if k < 1:
        raise BadArity("k must be positive")
    if k > max_k:
        raise TooLarge(f"enumerating E_{k} exceeds the budget (k <= {max_k})")
    reps = []
    for m in range(k + 1, 2 * k + 1):
        for dom in combinations(range(m), k):
            for imgs in _assign_images(m, dom):
                reps.append(OrderRelation(dom, imgs))
    return RelationSet(k, tuple(reps))


@dataclass(frozen=True)
class CoreMap:
    """Restriction of a relation to the points whose image stays in the domain."""

    domain: tuple[int, ...]
    images: tuple[int, ...]
    ambient: tuple[int, ...] = field(default=())

    def as_map(self) -> dict[int, int]:
        return dict(zip(self.domain, self.images))

    def is_empty(self) -> bool:
        return not self.domain

    def as_relation(self) -> OrderRelation:
        return OrderRelation(self.domain, self.images)


def core(rel: OrderRelation) -> CoreMap:
    S = set(rel.domain)
    pairs = [(a, t) for a, t in zip(rel.domain, rel.images) if t in S]
    return CoreMap(tuple(a for a, _ in pairs), tuple(t for _, t in pairs), rel.domain)


def compute_w(mapping) -> int:
    """One plus the longest run ``s, tau(s), ..., tau^(n-1)(s)`` inside the domain.

    ``mapping`` is a dict, an :class:`OrderRelation` (its own domain) or a
    :class:`CoreMap` (the core domain).  The empty map has ``w = 1``.
    """
    if isinstance(mapping, (OrderRelation, CoreMap)):
        mapping = mapping.as_map()
    mapping = dict(mapping)
    if not mapping:
        return 1
    run: dict[int, int] = {}

    def length(s: int) -> int:
        chain = []
        seen = set()
        cur = s
        while cur in mapping and cur not in run:
            if cur in seen:
                raise CycleDetected(f"map has a cycle through {cur}")
            seen.add(cur)
            chain.append(cur)
            cur = mapping[cur]
        tail = run.get(cur, 0)
        for x in reversed(chain):
            tail += 1
            run[x] = tail
        return run[s]

    return 1 + max(length(s) for s in mapping)


@dataclass(frozen=True)
class ThresholdReport:
    kind: str
    lo: Fraction
    hi: Fraction
    width: int | None = None
    provenance: str = ""
    certified_lower: bool = True

    def __post_init__(self):
        if self.kind not in ("vertex", "edge", "family", "finite-path"):
            raise ValidationError(f"unknown threshold kind {self.kind!r}")
        if not (0 <= self.lo <= self.hi < 1):
            raise ValidationError(f"invalid threshold interval [{self.lo}, {self.hi}]")

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def exact(self) -> Fraction:
        if not self.is_point:
            raise ValidationError("threshold is only known as an interval")
        return self.lo

    def to_dict(self) -> dict:
        if self.kind in ("vertex", "edge"):
            out = {"kind": self.kind, "num": self.lo.numerator, "den": self.lo.denominator}
            if self.width is not None:
                out["w"] = self.width
            return out
        return {
            "kind": self.kind,
            "lo": {"num": self.lo.numerator, "den": self.lo.denominator},
            "hi": {"num": self.hi.numerator, "den": self.hi.denominator},
        }


def _point(kind: str, w: int, provenance: str) -> ThresholdReport:
    value = 1 - Fraction(1, w)
    return ThresholdReport(kind, value, value, w, provenance)


def vertex_threshold(rel: OrderRelation) -> ThresholdReport:
    return _point("vertex", compute_w(core(rel)), "1 - 1/w(core)")


def edge_threshold(rel: OrderRelation) -> ThresholdReport:
    return _point("edge", compute_w(rel), "1 - 1/w(relation)")


def finite_path_bounds(p: int, k: int) -> ThresholdReport:
    """Bounds on the threshold for paths with ``p`` edges in the shift graph ``G_k``."""
    if k < 2:
        raise BadArity(f"finite-path bounds need k >= 2, got {k}")
    if p < 1:
        raise BadArity(f"number of colors must be positive, got {p}")
    tail = 1 - Fraction(1, k)
    lo = (1 - Fraction(_ceil_div(k - 1, p), k - 1)) * tail
    hi = (1 - Fraction((k - 1) // p, k - 1)) * tail
    return ThresholdReport("finite-path", lo, hi, None, "ceil/floor color-count bounds")


def infinite_path_probability_bound(lam, lambda_g) -> Fraction:
    """Lower bound ``(lam - lambda_G) / (1 - lambda_G)`` on the infinite-path probability."""
    lam = Fraction(lam)
    lambda_g = Fraction(lambda_g)
    if lambda_g == 1:
        raise DegenerateThreshold("threshold equal to 1 leaves no room above it")
    if not (0 <= lambda_g < 1 and 0 <= lam <= 1):
        raise ValidationError("probabilities must lie in [0, 1]")
    return max(Fraction(0), (lam - lambda_g) / (1 - lambda_g))


def family_threshold_bounds(C: RelationSet, budget: int = 200_000, seed: int = 0) -> ThresholdReport:
    """Interval for the vertex threshold of ``G_C``.

    The upper end is the smallest single-relation threshold (adding edges can
    only make paths easier).  The lower end comes from an explicit pattern
    coloring that strictly decreases along every edge of ``G_C``; it is
    certified for the pattern-coloring family only.
    """
    from .pattern_oracle import family_coloring_search

    if len(C) == 0:
        raise EmptyFamily("family threshold needs a nonempty relation set")
    reports = [vertex_threshold(r) for r in C]
    if len(C) == 1:
        return ThresholdReport("family", reports[0].lo, reports[0].hi, reports[0].width,
                               "single relation: 1 - 1/w(core)")
    upper = min(r.lo for r in reports)
    Cn = C if C.normalized else normalize(C)
    search = family_coloring_search(Cn, budget=budget, seed=seed)
    lower = min(search.probability.fraction, upper)
    how = "exhaustive" if search.exhaustive else "local search"
    return ThresholdReport("family", lower, upper, None,
                           f"min single threshold / joint pattern coloring ({how})",
                           certified_lower=True)

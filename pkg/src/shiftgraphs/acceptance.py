"""The reproduction table: every headline number, checked at its stated tolerance.

Each check returns a :class:`CheckResult`; ``run_all`` drives them under an
enumeration budget (checks whose cost exceeds it are reported as skipped).
Used by ``shiftgraphs reproduce`` and by the acceptance tests.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import rng
from .debruijn import alpha_mis_exact, alpha_ratio_report, alpha_subset_exact
from .graphs import height_batch, lift_edges, shift_graph
from .pattern_oracle import (
    best_pattern_coloring,
    f_eps_coloring,
    finite_path_construction_measure,
    z_measure_exact,
)
from .percolation import _iid_uniforms, sample_extremal
from .relations import (
    OrderRelation,
    canonical_pattern,
    compute_w,
    edge_threshold,
    enumerate_classes,
    finite_path_bounds,
    shift_relation,
    vertex_threshold,
)
from . import kernels


@dataclass(frozen=True)
class CheckResult:
    id: int
    name: str
    status: str  # "pass", "fail" or "skip"
    detail: str
    seconds: float
    limit: float | None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def line(self) -> str:
        lim = f" (limit {self.limit:g} s)" if self.limit else ""
        return f"[{self.status.upper():4}] {self.id:2d} {self.name}: {self.detail} [{self.seconds:.2f} s{lim}]"

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "status": self.status, "detail": self.detail,
                "seconds": round(self.seconds, 3), "limit": self.limit}


@dataclass(frozen=True)
class Check:
    id: int
    name: str
    cost: int
    limit: float | None
    fn: Callable[[int], tuple[bool, str]]


def _thresholds(seed: int):
    from .cli import thresholds_payload

    bad = []
    for K in range(1, 11):
        out = thresholds_payload(shift_relation(K))
        v = Fraction(out["vertex"]["num"], out["vertex"]["den"])
        e = Fraction(out["edge"]["num"], out["edge"]["den"])
        if v != Fraction(K - 1, K) or e != Fraction(K, K + 1):
            bad.append(K)
    k2 = vertex_threshold(shift_relation(2)).exact
    ok = not bad and k2 == Fraction(1, 2)
    return ok, f"K=1..10 exact, K=2 vertex {k2}" if ok else f"mismatch at K={bad}"


def _finite_bounds(seed: int):
    msgs = []
    b25, b23, b26 = finite_path_bounds(2, 5), finite_path_bounds(2, 3), finite_path_bounds(2, 6)
    ok = (b25.lo, b25.hi) == (Fraction(2, 5), Fraction(2, 5))
    ok &= (b23.lo, b23.hi) == (Fraction(1, 3), Fraction(1, 3))
    ok &= (b26.lo, b26.hi) == (Fraction(1, 3), Fraction(1, 2))
    ok &= b26.lo <= Fraction(5, 12) < b26.hi
    cases = 0
    for k in range(2, 10):
        for p in range(1, 10):
            if (k - 1) % p == 0:
                cases += 1
                b = finite_path_bounds(p, k)
                want = (1 - Fraction(1, p)) * (1 - Fraction(1, k))
                if not (b.lo == b.hi == want):
                    ok = False
                    msgs.append(f"({p},{k})")
    detail = f"(2,5)=[{b25.lo},{b25.hi}] (2,3)=[{b23.lo},{b23.hi}] (2,6)=[{b26.lo},{b26.hi}]; {cases} equality cases"
    return ok, detail + (f"; failures {msgs}" if msgs else "")


def _oracle(seed: int):
    bad = []
    for w in range(2, 8):
        rel = shift_relation(w - 1)
        z = z_measure_exact(rel, f_eps_coloring(rel)).fraction
        if z != 1 - Fraction(1, w):
            bad.append(f"w={w}: {z}")
    scanned = 0
    worst = Fraction(-1)
    for k in range(1, 4):
        q = math.factorial(k)
        for rel in enumerate_classes(k):
            pat = canonical_pattern(rel)
            idx = kernels.window_patterns(pat.size, np.array([pat.domain_pos, pat.image_pos]))
            pair = np.bincount(idx[:, 0] * q + idx[:, 1], minlength=q * q).reshape(q, q)
            total = int(pair.sum())
            bound = 1 - Fraction(1, compute_w(rel))
            for p in (1, 2, 3):
                t = np.arange(p ** q, dtype=np.int64)
                tables = (t[:, None] // (p ** np.arange(q))[None, :]) % p
                gt = tables[:, :, None] > tables[:, None, :]
                hits = (gt * pair[None]).sum(axis=(1, 2))
                scanned += len(tables)
                top = Fraction(int(hits.max()), total)
                worst = max(worst, top - bound)
                if top > bound:
                    bad.append(f"{rel} p={p}: {top} > {bound}")
    ok = not bad
    detail = f"f_eps attains 1-1/w for w=2..7; {scanned} tables, max excess {worst}"
    return ok, detail + (f"; failures {bad[:3]}" if bad else "")


def _construction(seed: int):
    want = {(2, 3): Fraction(1, 3), (2, 5): Fraction(2, 5), (2, 7): Fraction(3, 7), (3, 7): Fraction(4, 7)}
    for k in (3, 5, 7, 9):
        want[(2, k)] = Fraction(k - 1, 2 * k)
    bad = []
    for (p, k), value in sorted(want.items()):
        got = finite_path_construction_measure(p, k).fraction
        if got != value or got != finite_path_bounds(p, k).lo:
            bad.append(f"({p},{k})={got}")
    return not bad, "all equal to the lower bound" if not bad else f"failures {bad}"


def _search(seed: int):
    r32 = best_pattern_coloring(3, 2, seed=seed)
    r42 = best_pattern_coloring(4, 2, seed=seed)
    v32, v42 = r32.probability.fraction, r42.probability.fraction
    ok = v32 == Fraction(1, 3) and r32.exhaustive and r32.evaluated == 4
    ok &= Fraction(1, 4) <= v42 <= Fraction(1, 2) and r42.exhaustive
    return ok, f"(3,2)={v32} over {r32.evaluated} tables; (4,2)={v42} over {r42.evaluated} tables"


def _extremal(seed: int):
    g = shift_graph(3, 30)
    R = 10_000
    masks = sample_extremal(g, 2, seed, replicas=R)
    worst = 0
    for start in range(0, R, 1000):
        h = height_batch(g, masks[start:start + 1000])
        worst = max(worst, int(h.max()))
    rates = masks.mean(axis=1)
    mean = float(rates.mean())
    se = float(rates.std(ddof=1) / np.sqrt(R))
    ok = worst <= 2 and abs(mean - 1 / 3) <= 3 * se
    return ok, f"max path {max(worst - 1, 0)} edges; rate {mean:.5f} vs 1/3 (3 SE = {3 * se:.5f})"


def _monotone(seed: int):
    g = shift_graph(2, 100)
    grid = sorted({Fraction(i, 20) for i in range(21)} | {Fraction(1, 3), Fraction(2, 3)})
    violations = 0
    for r in range(1000):
        u = _iid_uniforms(g, seed, r)
        prev = None
        for lam in grid:
            cur = rng.below(u, lam)
            if prev is not None and np.any(prev & ~cur):
                violations += 1
            prev = cur
    return violations == 0, f"1000 replicas x {len(grid)} grid points, {violations} nesting violations"


def _debruijn(seed: int):
    pairs = [(2, 2), (2, 3), (2, 4), (2, 5), (3, 3)]
    vals = {}
    bad = []
    for d, k in pairs:
        a = alpha_subset_exact(d, k).value
        b = alpha_mis_exact(d, k).value
        vals[(d, k)] = a
        if a != b:
            bad.append(f"({d},{k}): {a} vs {b}")
    ok = not bad and vals[(2, 2)] == 1 and vals[(2, 3)] == 2
    rows = alpha_ratio_report(range(2, 5), 3, seed=seed)
    ratios = [r.ratio for r in rows]
    ok &= all(a < b for a, b in zip(ratios, ratios[1:])) and all(x < Fraction(1, 3) for x in ratios)
    detail = ", ".join(f"alpha({d},{k})={v}" for (d, k), v in vals.items())
    detail += "; k=3 ratios " + " < ".join(str(x) for x in ratios) + " < 1/3"
    return ok, detail + (f"; disagreements {bad}" if bad else "")


def _classes(seed: int):
    E1, E2 = enumerate_classes(1), enumerate_classes(2)
    shift_pat = canonical_pattern(shift_relation(2))
    ok = len(E1) == 1 and len(E2) == 4 and shift_pat in E2.patterns()
    gen = rng.stream(seed, 0xC1A5)
    classes = {k: enumerate_classes(k).patterns() for k in (1, 2, 3)}
    trials = 0
    for _ in range(2000):
        k = int(gen.integers(1, 4))
        dom = np.sort(gen.choice(12, size=k, replace=False))
        imgs = []
        for a in dom:
            imgs.append(int(a) + 1 + int(gen.integers(0, 8)))
        if len(set(imgs)) != k:
            continue
        rel = OrderRelation(tuple(int(a) for a in dom), tuple(imgs))
        matches = sum(1 for p in classes[k] if p == canonical_pattern(rel))
        trials += 1
        if matches != 1:
            ok = False
    return ok, f"|E_1|={len(E1)}, |E_2|={len(E2)}, |E_3|={len(classes[3])}; {trials} random relations matched one class each"


def _lifting(seed: int):
    bad = []
    for k in range(1, 9):
        lifted = lift_edges(shift_relation(k))
        if len(lifted) != 1:
            bad.append(f"k={k}: {len(lifted)} lifted relations")
            continue
        if vertex_threshold(lifted.relations[0]).exact != edge_threshold(shift_relation(k)).exact:
            bad.append(f"k={k}")
    return not bad, "k=1..8 equal" if not bad else f"failures {bad}"


CHECKS = [
    Check(1, "shift thresholds", 10, 1.0, _thresholds),
    Check(2, "finite-path bounds", 100, 1.0, _finite_bounds),
    Check(3, "oracle attainment and upper-bound law", 15_000_000, 10.0, _oracle),
    Check(4, "construction measures", 400_000, 30.0, _construction),
    Check(5, "exhaustive pattern search", 2_000, None, _search),
    Check(6, "extremal structural guarantee", 40_000_000, 60.0, _extremal),
    Check(7, "coupled monotonicity", 5_000_000, None, _monotone),
    Check(8, "de Bruijn independence numbers", 100_000, 120.0, _debruijn),
    Check(9, "equivalence classes", 5_000, None, _classes),
    Check(10, "lifting consistency", 1_000, None, _lifting),
]

BUDGETS = {"tiny": 1_000, "small": 1_000_000, "full": 10 ** 12}


def parse_budget(text) -> int:
    if text is None:
        return BUDGETS["full"]
    if isinstance(text, int):
        return text
    text = str(text).strip().lower()
    if text in BUDGETS:
        return BUDGETS[text]
    return int(float(text))


def run_check(check: Check, budget: int, seed: int) -> CheckResult:
    if check.cost > budget:
        return CheckResult(check.id, check.name, "skip", f"cost {check.cost} exceeds budget {budget}", 0.0, check.limit)
    t0 = time.perf_counter()
    try:
        ok, detail = check.fn(seed)
    except Exception as exc:  # a crash is a failed criterion, not an aborted run
        ok, detail = False, f"error: {exc!r}"
    dt = time.perf_counter() - t0
    if check.limit is not None and dt >= check.limit:
        ok = False
        detail += f"; runtime {dt:.2f} s over limit"
    return CheckResult(check.id, check.name, "pass" if ok else "fail", detail, dt, check.limit)


def run_all(budget: int = BUDGETS["full"], seed: int = rng.DEFAULT_SEED) -> list[CheckResult]:
    return [run_check(c, budget, seed) for c in CHECKS]

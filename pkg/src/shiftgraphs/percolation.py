"""Monte Carlo percolation on truncated graphs.

Two vertex laws are shipped: i.i.d. inclusion (a per-vertex uniform
thresholded at ``lam``, so samples at different ``lam`` are nested for a
fixed seed) and the extremal argmax-mod-``p`` construction on shift graphs,
which can never contain a path with ``p`` edges.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import sqrt
from typing import Sequence

import numpy as np

from . import rng
from .errors import NoCrossing, NotShiftGraph, ValidationError
from .graphs import TruncatedGraph, Vertex, height_batch, witness_path
from .pattern_oracle import Z99
from .relations import infinite_path_probability_bound, vertex_threshold

IID_STREAM = 0x11D
EXTREMAL_STREAM = 0xE87


@dataclass(frozen=True, eq=False)
class SubgraphSample:
    graph: TruncatedGraph
    included: np.ndarray
    sampler: str
    seed: int
    params: dict = field(default_factory=dict)

    @property
    def inclusion_rate(self) -> float:
        return float(self.included.mean()) if self.included.size else 0.0


@dataclass(frozen=True)
class PathStats:
    longest: int
    count_ge_p: int
    max_height: int
    witness: list[Vertex]
    p: int


def _iid_uniforms(g: TruncatedGraph, seed: int, replica: int | None) -> np.ndarray:
    keys = (IID_STREAM,) if replica is None else (IID_STREAM, replica)
    return rng.uniform_u64(rng.stream(seed, *keys), g.num_vertices)


def sample_iid(g: TruncatedGraph, lam, seed: int, replica: int | None = None) -> SubgraphSample:
    lam = Fraction(lam)
    if not 0 <= lam <= 1:
        raise ValidationError(f"inclusion probability {lam} outside [0, 1]")
    u = _iid_uniforms(g, seed, replica)
    return SubgraphSample(g, rng.below(u, lam), "iid", seed, {"lambda": lam, "replica": replica})


def extremal_inclusion(g: TruncatedGraph, p: int, level1: np.ndarray) -> np.ndarray:
    """Inclusion masks ``(R, V)`` from level-1 uniforms ``(R, n)``.

    A vertex is kept iff the argmax-mod-``p`` color of its first ``k - 1``
    levels exceeds the color of its last ``k - 1`` levels.
    """
    V = g.vertices
    x = rng.to_unit(level1)
    first = np.argmax(x[:, V[:, :-1]], axis=2) % p
    second = np.argmax(x[:, V[:, 1:]], axis=2) % p
    return first > second


def sample_extremal(g: TruncatedGraph, p: int, seed: int, replicas: int | None = None):
    """Extremal sample(s) on a shift graph; uniforms match :func:`ah_sample` level 1.

    Returns one :class:`SubgraphSample`, or a ``(replicas, V)`` mask array
    when ``replicas`` is given.
    """
    if not g.is_shift:
        raise NotShiftGraph("the extremal sampler is defined on shift graphs only")
    if g.k < 2:
        raise NotShiftGraph("the extremal sampler needs k >= 2")
    if p < 1:
        raise ValidationError("p must be positive")
    R = 1 if replicas is None else int(replicas)
    level1 = rng.level_uniforms(seed, g.n, 1, R)
    masks = extremal_inclusion(g, p, level1)
    if replicas is not None:
        return masks
    return SubgraphSample(g, masks[0], "extremal", seed, {"p": p})


def count_paths_at_least(g: TruncatedGraph, included: np.ndarray, p: int) -> int:
    """Exact number of directed paths with at least ``p`` edges through included vertices."""
    indptr, indices = g.csr()
    V = g.num_vertices
    inc = np.asarray(included, dtype=bool)
    # exact[v][l]: paths from v with exactly l < p edges; tail[v]: paths from v with >= p edges
    exact = [None] * V
    tail = [0] * V
    total = 0
    for v in range(V - 1, -1, -1):
        if not inc[v]:
            continue
        row = [1] + [0] * max(p - 1, 0)
        t = 0
        for w in indices[indptr[v]:indptr[v + 1]]:
            w = int(w)
            if not inc[w]:
                continue
            ew = exact[w]
            for l in range(1, p):
                row[l] += ew[l - 1]
            t += tail[w] + (ew[p - 1] if p >= 1 else 0)
        if p == 0:
            t += 1
        exact[v] = row
        tail[v] = t
        total += t
    return total


def path_stats(g: TruncatedGraph, sample, p: int) -> PathStats:
    mask = sample.included if isinstance(sample, SubgraphSample) else np.asarray(sample, dtype=bool)
    h = height_batch(g, mask[None, :])[0]
    top = int(h.max()) if h.size else 0
    longest = max(top - 1, 0)
    count = count_paths_at_least(g, mask, p) if top > p else 0
    return PathStats(longest, count, top, witness_path(g, h), p)


@dataclass(frozen=True)
class SweepRow:
    lam: Fraction
    replicas: int
    hits: int
    mean_inclusion: float
    corollary_bound: Fraction | None

    @property
    def freq(self) -> float:
        return self.hits / self.replicas

    @property
    def ci_halfwidth(self) -> float:
        f = self.freq
        return Z99 * sqrt(f * (1 - f) / self.replicas)


@dataclass(frozen=True)
class SweepReport:
    graph: str
    p: int
    seed: int
    rows: tuple[SweepRow, ...]

    def frequencies(self) -> list[float]:
        return [r.freq for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "replicas", "freq_path_ge_p", "ci_halfwidth", "mean_inclusion", "corollary_bound"])
        for r in self.rows:
            bound = "" if r.corollary_bound is None else _frac(r.corollary_bound)
            w.writerow([_frac(r.lam), r.replicas, repr(r.freq), repr(r.ci_halfwidth),
                        repr(r.mean_inclusion), bound])
        return buf.getvalue()


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _replica_longest(g: TruncatedGraph, lams: Sequence[Fraction], seed: int, r: int):
    u = _iid_uniforms(g, seed, r)
    masks = np.stack([rng.below(u, lam) for lam in lams])
    h = height_batch(g, masks)
    longest = np.maximum(h.max(axis=1) - 1, 0) if h.shape[1] else np.zeros(len(lams), dtype=np.int64)
    return longest, masks.sum(axis=1)


def sweep(g: TruncatedGraph, lambdas: Sequence, p: int, replicas: int, seed: int = rng.DEFAULT_SEED,
          workers: int = 1) -> SweepReport:
    """Frequency of a path with at least ``p`` edges under i.i.d. inclusion, per ``lam``.

    Replica ``r`` draws its vertex uniforms from stream ``(seed, r)`` and
    reuses them for every ``lam``, so included sets are nested along the grid.
    Aggregation folds replicas in index order.
    """
    if replicas < 1:
        raise ValidationError("need at least one replica")
    lams = sorted(Fraction(x) for x in lambdas)
    if any(not 0 <= x <= 1 for x in lams):
        raise ValidationError("grid values must lie in [0, 1]")
    lam_g = vertex_threshold(g.relations.relations[0]).lo if len(g.relations) == 1 else None

    def run(r):
        return _replica_longest(g, lams, seed, r)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run, range(replicas)))
    else:
        results = [run(r) for r in range(replicas)]
    hits = np.zeros(len(lams), dtype=np.int64)
    included = np.zeros(len(lams), dtype=np.int64)
    for longest, inc in results:
        hits += longest >= p
        included += inc
    V = max(g.num_vertices, 1)
    rows = []
    for i, lam in enumerate(lams):
        bound = None
        if lam_g is not None and lam >= lam_g:
            bound = infinite_path_probability_bound(lam, lam_g)
        elif lam_g is not None:
            bound = Fraction(0)
        rows.append(SweepRow(lam, replicas, int(hits[i]), float(included[i] / (replicas * V)), bound))
    return SweepReport(g.spec_label, p, seed, tuple(rows))


def empirical_threshold(report: SweepReport, target_frequency: float = 0.5) -> float:
    """Linear interpolation of the first grid crossing of ``target_frequency``."""
    rows = report.rows
    if len(rows) < 3:
        raise NoCrossing("need at least three grid points")
    xs = [float(r.lam) for r in rows]
    ys = report.frequencies()
    for i, y in enumerate(ys):
        if y == target_frequency:
            return xs[i]
        if i and (ys[i - 1] - target_frequency) * (y - target_frequency) < 0:
            x0, x1, y0 = xs[i - 1], xs[i], ys[i - 1]
            return x0 + (target_frequency - y0) * (x1 - x0) / (y - y0)
    raise NoCrossing(f"frequency curve never crosses {target_frequency}")

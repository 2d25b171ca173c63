"""Pure Python / numpy implementations of the hot kernels.

Same signatures and bit-identical results as the compiled ``_kernels`` module.
"""

from __future__ import annotations

from itertools import chain, permutations
from math import factorial

import numpy as np

BACKEND = "python"


def all_permutations(m: int) -> np.ndarray:
    """Every permutation of ``range(m)`` as rows, in lexicographic order."""
    total = factorial(m)
    flat = np.fromiter(chain.from_iterable(permutations(range(m))), dtype=np.int8, count=total * m)
    return flat.reshape(total, m)


def lehmer_index(values: np.ndarray) -> np.ndarray:
    """Lexicographic rank of the relative order of each row of ``values``."""
    values = np.asarray(values)
    n, L = values.shape
    idx = np.zeros(n, dtype=np.int64)
    for i in range(L - 1):
        c = (values[:, i + 1:] < values[:, i:i + 1]).sum(axis=1)
        idx += c * factorial(L - 1 - i)
    return idx


def window_patterns(m: int, wins: np.ndarray) -> np.ndarray:
    """Pattern index of every window, for every permutation of ``m`` coordinates.

    ``wins`` is an ``(r, L)`` array of coordinate positions.  Returns an
    ``(m!, r)`` int32 array; rows follow lexicographic permutation order.
    """
    wins = np.asarray(wins, dtype=np.int64)
    perms = all_permutations(m)
    out = np.empty((perms.shape[0], wins.shape[0]), dtype=np.int32)
    for j, w in enumerate(wins):
        out[:, j] = lehmer_index(perms[:, w])
    return out


def dag_heights(indptr, indices, included, level_starts) -> np.ndarray:
    """Heights on a DAG whose edges all point to higher vertex indices.

    ``included`` is ``(R, V)``; one height field per row.  ``level_starts``
    splits ``0..V`` into blocks with no internal edges, processed last to first.
    """
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    inc = np.asarray(included, dtype=bool)
    R, V = inc.shape
    h = np.zeros((R, V), dtype=np.int32)
    bounds = list(np.asarray(level_starts, dtype=np.int64)) + [V]
    for b in range(len(bounds) - 2, -1, -1):
        lo, hi = int(bounds[b]), int(bounds[b + 1])
        if lo == hi:
            continue
        e0, e1 = int(indptr[lo]), int(indptr[hi])
        best = np.zeros((R, hi - lo), dtype=np.int32)
        if e1 > e0:
            vals = h[:, indices[e0:e1]]
            starts = indptr[lo:hi] - e0
            deg = indptr[lo + 1:hi + 1] - indptr[lo:hi]
            nz = deg > 0
            red = np.maximum.reduceat(vals, starts[nz], axis=1)
            best[:, nz] = red
        h[:, lo:hi] = np.where(inc[:, lo:hi], best + 1, 0)
    return h


def dicut_max(out_nbrs, in_nbrs) -> tuple[int, int]:
    """Maximum directed cut over all subsets, by Gray-code enumeration.

    Neighbor arrays are ``(N, d)`` with ``-1`` padding and no self-loops.
    Returns ``(best value, smallest mask attaining it)``.
    """
    out_nbrs = [[int(z) for z in row if z >= 0] for row in np.asarray(out_nbrs)]
    in_nbrs = [[int(y) for y in row if y >= 0] for row in np.asarray(in_nbrs)]
    N = len(out_nbrs)
    member = [False] * N
    mask = 0
    value = 0
    best, best_mask = 0, 0
    for step in range(1, 1 << N):
        a = (step & -step).bit_length() - 1
        out = sum(1 for z in out_nbrs[a] if not member[z])
        inn = sum(1 for y in in_nbrs[a] if member[y])
        if member[a]:
            value += inn - out
        else:
            value += out - inn
        member[a] = not member[a]
        mask ^= 1 << a
        if value > best or (value == best and mask < best_mask):
            best, best_mask = value, mask
    return best, best_mask

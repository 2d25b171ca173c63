"""Lexicographic ranking of increasing tuples."""

from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np


def combinations_array(n: int, k: int) -> np.ndarray:
    """All increasing ``k``-tuples from ``range(n)`` in lexicographic order."""
    total = comb(n, k)
    if total == 0:
        return np.zeros((0, k), dtype=np.int64)
    flat = np.fromiter((x for c in combinations(range(n), k) for x in c), dtype=np.int64, count=total * k)
    return flat.reshape(total, k)


def _binom_table(n: int, k: int) -> np.ndarray:
    t = np.zeros((n + 1, k + 2), dtype=np.int64)
    for a in range(n + 1):
        for b in range(k + 2):
            t[a, b] = comb(a, b)
    return t


def lex_rank(tuples, n: int) -> np.ndarray:
    """Rank of each increasing tuple among ``combinations(range(n), k)``.

    Uses ``C(n, k) - 1 - sum_i C(n - 1 - c_i, k - i)``.
    """
    arr = np.atleast_2d(np.asarray(tuples, dtype=np.int64))
    k = arr.shape[1]
    table = _binom_table(n, k)
    total = comb(n, k)
    acc = np.zeros(arr.shape[0], dtype=np.int64)
    for i in range(k):
        acc += table[n - 1 - arr[:, i], k - i]
    return total - 1 - acc

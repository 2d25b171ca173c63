"""Counter-based seed splitting.

Every random stream is addressed by ``(master seed, *keys)`` through
``numpy.random.SeedSequence`` spawn keys, so a replica's draws never depend on
which worker ran it or in what order.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

DEFAULT_SEED = 20090617
_TWO64 = 1 << 64


def stream(seed: int, *keys: int) -> np.random.Generator:
    seed = int(seed)
    if not 0 <= seed < _TWO64:
        raise ValueError("master seed must be an unsigned 64-bit integer")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def uniform_u64(gen: np.random.Generator, size) -> np.ndarray:
    """Uniform variates as 64-bit dyadic fractions ``u / 2**64`` (returned as ``u``)."""
    return gen.integers(0, _TWO64, size=size, dtype=np.uint64)


def below(u: np.ndarray, lam) -> np.ndarray:
    """``u / 2**64 < lam`` computed exactly for rational ``lam``."""
    lam = Fraction(lam)
    if lam <= 0:
        return np.zeros(np.shape(u), dtype=bool)
    if lam >= 1:
        return np.ones(np.shape(u), dtype=bool)
    cut = -((-lam.numerator * _TWO64) // lam.denominator)  # ceil(lam * 2**64)
    if cut >= _TWO64:
        return np.ones(np.shape(u), dtype=bool)
    return u < np.uint64(cut)


def to_unit(u: np.ndarray) -> np.ndarray:
    """Top 53 bits of ``u`` as an exactly representable float in ``[0, 1)``."""
    return (np.asarray(u, dtype=np.uint64) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def level_uniforms(seed: int, n: int, r: int, replicas: int) -> np.ndarray:
    """One uniform per ``r``-subset of ``range(n)`` (lexicographic), per replica."""
    from math import comb

    return uniform_u64(stream(seed, 0x5EED, r), (replicas, comb(n, r)))

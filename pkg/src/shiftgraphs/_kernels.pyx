# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_fallback`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cython"


cdef long long _fact(int n):
    cdef long long r = 1
    cdef int i
    for i in range(2, n + 1):
        r *= i
    return r


cdef bint _next_perm(int* a, int n) nogil:
    cdef int i = n - 2, j, t
    while i >= 0 and a[i] >= a[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = n - 1
    while a[j] <= a[i]:
        j -= 1
    t = a[i]; a[i] = a[j]; a[j] = t
    i += 1
    j = n - 1
    while i < j:
        t = a[i]; a[i] = a[j]; a[j] = t
        i += 1
        j -= 1
    return True


def all_permutations(int m):
    cdef long long total = _fact(m)
    cdef cnp.ndarray[cnp.int8_t, ndim=2] out = np.empty((total, m), dtype=np.int8)
    cdef int perm[16]
    cdef int c
    cdef long long row = 0
    for c in range(m):
        perm[c] = c
    while True:
        for c in range(m):
            out[row, c] = perm[c]
        row += 1
        if not _next_perm(perm, m):
            break
    return out


def window_patterns(int m, wins):
    cdef cnp.ndarray[cnp.int64_t, ndim=2] w = np.ascontiguousarray(wins, dtype=np.int64)
    cdef int r = w.shape[0], L = w.shape[1]
    if m > 16 or L > 16:
        raise ValueError("window kernel supports at most 16 coordinates")
    cdef long long total = _fact(m)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] out = np.empty((total, r), dtype=np.int32)
    cdef int[:, ::1] ov = out
    cdef int perm[16]
    cdef int* win = <int*>malloc((r if r > 0 else 1) * 16 * sizeof(int))
    cdef int fl[16]
    cdef int vals[16]
    cdef int c, j, i, q, idx, cnt, vi
    cdef long long row = 0
    for j in range(r):
        for i in range(L):
            win[j * 16 + i] = <int>w[j, i]
    for i in range(L):
        fl[i] = <int>_fact(L - 1 - i)
    for c in range(m):
        perm[c] = c
    with nogil:
        while True:
            for j in range(r):
                for i in range(L):
                    vals[i] = perm[win[j * 16 + i]]
                idx = 0
                for i in range(L - 1):
                    vi = vals[i]
                    cnt = 0
                    for q in range(i + 1, L):
                        if vals[q] < vi:
                            cnt += 1
                    idx += cnt * fl[i]
                ov[row, j] = idx
            row += 1
            if not _next_perm(perm, m):
                break
    free(win)
    return out


def dag_heights(indptr, indices, included, level_starts):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] inc = np.ascontiguousarray(included, dtype=np.uint8)
    cdef Py_ssize_t R = inc.shape[0], V = inc.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] h = np.zeros((R, V), dtype=np.int32)
    cdef Py_ssize_t s, v, e
    cdef int best, hv
    with nogil:
        for s in range(R):
            for v in range(V - 1, -1, -1):
                if not inc[s, v]:
                    continue
                best = 0
                for e in range(ip[v], ip[v + 1]):
                    hv = h[s, ix[e]]
                    if hv > best:
                        best = hv
                h[s, v] = best + 1
    return h


def dicut_max(out_nbrs, in_nbrs):
    cdef cnp.ndarray[cnp.int32_t, ndim=2] on = np.ascontiguousarray(out_nbrs, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] inb = np.ascontiguousarray(in_nbrs, dtype=np.int32)
    cdef int N = on.shape[0], dout = on.shape[1], din = inb.shape[1]
    if N > 62:
        raise ValueError("dicut kernel supports at most 62 ground elements")
    cdef unsigned char* member = <unsigned char*>malloc(N if N > 0 else 1)
    cdef long long step, last = (<long long>1) << N
    cdef long long mask = 0, best_mask = 0
    cdef long long value = 0, best = 0
    cdef int a, j, z, out, inn
    for a in range(N):
        member[a] = 0
    with nogil:
        step = 1
        while step < last:
            a = 0
            while not ((step >> a) & 1):
                a += 1
            out = 0
            inn = 0
            for j in range(dout):
                z = on[a, j]
                if z >= 0 and not member[z]:
                    out += 1
            for j in range(din):
                z = inb[a, j]
                if z >= 0 and member[z]:
                    inn += 1
            if member[a]:
                value += inn - out
            else:
                value += out - inn
            member[a] = 1 - member[a]
            mask ^= (<long long>1) << a
            if value > best or (value == best and mask < best_mask):
                best = value
                best_mask = mask
            step += 1
    free(member)
    return int(best), int(best_mask)

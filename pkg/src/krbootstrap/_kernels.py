"""Compiled inner loops over word-packed adjacency rows.

Rows are ``(n, W)`` uint64 arrays with bit ``v % 64`` of word ``v // 64`` set
iff ``v`` is a neighbour.  Everything here is a straight transcription of the
pure-int algorithms in :mod:`krbootstrap.closure`; numba only removes the
interpreter overhead from the per-pair loop.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_ONE = np.uint64(1)
_ZERO = np.uint64(0)
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_S1 = np.uint64(1)
_S2 = np.uint64(2)
_S4 = np.uint64(4)
_S56 = np.uint64(56)


def rows_to_words(rows, n: int) -> np.ndarray:
    w = max(1, (n + 63) // 64)
    buf = b"".join(r.to_bytes(8 * w, "little") for r in rows)
    return np.frombuffer(buf, dtype="<u8").reshape(n, w).astype(np.uint64)


def words_to_rows(a: np.ndarray) -> list[int]:
    a = np.ascontiguousarray(a, dtype="<u8")
    return [int.from_bytes(a[i].tobytes(), "little") for i in range(a.shape[0])]


@njit(cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> _S1) & _M1)
    x = (x & _M2) + ((x >> _S2) & _M2)
    x = (x + (x >> _S4)) & _M4
    return np.int64((x * _H01) >> _S56)


@njit(cache=True, inline="always")
def _ctz(low):
    # low has exactly one bit set
    return _popcount(low - _ONE)


@njit(cache=True)
def _row_count(a):
    s = 0
    for j in range(a.shape[0]):
        s += _popcount(a[j])
    return s


@njit(cache=True)
def _next_bit(a, start):
    """Smallest set bit of word array ``a`` at index >= start, or -1."""
    w = start >> 6
    if w >= a.shape[0]:
        return -1
    word = a[w] & ~((_ONE << np.uint64(start & 63)) - _ONE)
    while True:
        if word != _ZERO:
            return (w << 6) + _ctz(word & (~word + _ONE))
        w += 1
        if w >= a.shape[0]:
            return -1
        word = a[w]


@njit(cache=True)
def smallest_clique_words(A, cand, k, stack, out):
    """Write the lexicographically smallest k-clique inside ``cand`` to ``out``.

    Depth-first search in increasing vertex order; ``stack`` is ``(k, W)``
    scratch.  Returns False if there is none.
    """
    if k == 0:
        return True
    W = cand.shape[0]
    for j in range(W):
        stack[0, j] = cand[j]
    pos = np.zeros(k, dtype=np.int64)
    level = 0
    while level >= 0:
        a = _next_bit(stack[level], pos[level])
        if a < 0:
            level -= 1
            continue
        pos[level] = a + 1
        out[level] = a
        if level == k - 1:
            return True
        # candidates for the next level: later vertices adjacent to a
        cnt = 0
        aw = a >> 6
        for j in range(W):
            if j < aw:
                stack[level + 1, j] = _ZERO
            elif j == aw:
                hi = ~((_ONE << np.uint64(a & 63)) - _ONE) & ~(_ONE << np.uint64(a & 63))
                stack[level + 1, j] = stack[level, j] & A[a, j] & hi
            else:
                stack[level + 1, j] = stack[level, j] & A[a, j]
            cnt += _popcount(stack[level + 1, j])
        if cnt >= k - level - 1:
            level += 1
            pos[level] = 0
    return False


@njit(cache=True)
def _has_bit(a, b):
    return (a[b >> 6] >> np.uint64(b & 63)) & _ONE


@njit(cache=True)
def _clear_diag(D):
    """Drop self bits and the padding bits beyond n."""
    n, W = D.shape
    for x in range(n):
        D[x, x >> 6] &= ~(_ONE << np.uint64(x & 63))
    tail = n & 63
    if tail:
        mask = (_ONE << np.uint64(tail)) - _ONE
        for x in range(n):
            D[x, W - 1] &= mask


@njit(cache=True)
def _mark_next_dirty(A, D, eu, ev, lo, hi, missing):
    n, W = A.shape
    work = 0
    for i in range(lo, hi):
        u = eu[i]
        v = ev[i]
        for j in range(W):
            work += _popcount(A[u, j] & A[v, j])
        if work > missing:
            break
    if work > missing:
        # marking would cost more than rescanning every non-edge
        for x in range(n):
            for j in range(W):
                D[x, j] = ~_ZERO
    else:
        for x in range(n):
            for j in range(W):
                D[x, j] = _ZERO
        m = np.empty(W, dtype=np.uint64)
        for i in range(lo, hi):
            u = eu[i]
            v = ev[i]
            for j in range(W):
                D[u, j] |= A[v, j]
                D[v, j] |= A[u, j]
                m[j] = A[u, j] & A[v, j]
            x = _next_bit(m, 0)
            while x >= 0:
                for j in range(W):
                    D[x, j] |= m[j]
                x = _next_bit(m, x + 1)
    _clear_diag(D)


@njit(cache=True, nogil=True)
def closure_kernel(A, k, record):
    """Synchronous K_{k+2} dynamics on ``A`` in place.

    Returns ``(eu, ev, rnd, cl)`` for the added edges: endpoints ``eu < ev``,
    round labels, and (if ``record``) the k extra vertices of the smallest
    completing clique, all ordered by (round, u, v).
    """
    n, W = A.shape
    D = np.empty((n, W), dtype=np.uint64)
    edges2 = 0
    for x in range(n):
        edges2 += _row_count(A[x])
    missing = n * (n - 1) // 2 - edges2 // 2
    cap = missing if missing > 0 else 1
    eu = np.empty(cap, dtype=np.int32)
    ev = np.empty(cap, dtype=np.int32)
    rnd = np.empty(cap, dtype=np.int32)
    kk = k if record else 0
    cl = np.empty((cap, max(kk, 1)), dtype=np.int32)
    cand = np.empty(W, dtype=np.uint64)
    stack = np.empty((max(k, 1), W), dtype=np.uint64)
    out = np.empty(max(k, 1), dtype=np.int64)

    for x in range(n):
        for j in range(W):
            D[x, j] = ~_ZERO
    _clear_diag(D)

    total = 0
    t = 0
    while True:
        t += 1
        start = total
        for x in range(n):
            for wj in range(W):
                d = D[x, wj] & ~A[x, wj]
                while d != _ZERO:
                    low = d & (~d + _ONE)
                    d ^= low
                    y = (wj << 6) + _ctz(low)
                    # each unordered pair once: the smaller endpoint owns it
                    # unless only the larger endpoint marked it dirty
                    if y < x and _has_bit(D[y], x):
                        continue
                    c = 0
                    for j in range(W):
                        cand[j] = A[x, j] & A[y, j]
                        c += _popcount(cand[j])
                    if c < k:
                        continue
                    if not smallest_clique_words(A, cand, k, stack, out):
                        continue
                    if x < y:
                        eu[total] = x
                        ev[total] = y
                    else:
                        eu[total] = y
                        ev[total] = x
                    rnd[total] = t
                    for i in range(kk):
                        cl[total, i] = out[i]
                    total += 1
        if total == start:
            break
        # order the round by (u, v)
        key = eu[start:total].astype(np.int64) * n + ev[start:total]
        order = np.argsort(key)
        eu[start:total] = eu[start:total][order]
        ev[start:total] = ev[start:total][order]
        if kk:
            cl[start:total] = cl[start:total][order]
        for i in range(start, total):
            u = eu[i]
            v = ev[i]
            A[u, v >> 6] |= _ONE << np.uint64(v & 63)
            A[v, u >> 6] |= _ONE << np.uint64(u & 63)
        missing -= total - start
        _mark_next_dirty(A, D, eu, ev, start, total, missing)
    return eu[:total].copy(), ev[:total].copy(), rnd[:total].copy(), cl[:total].copy()

"""K_r-bootstrap closure with synchronous round labels.

In round t every missing pair that completes a copy of K_r in the graph
after round t-1 is added at once.  ``closure`` re-examines only pairs whose
neighbourhood changed in the previous round and runs in a compiled kernel;
``closure_naive`` rescans every non-edge and exists as the oracle for it.
"""
from __future__ import annotations

from functools import cached_property
from itertools import combinations

import numpy as np

from . import _kernels
from .graph import Edge, Graph, edge, iter_bits


class ClosureResult:
    """Final graph plus round labels and completing copies.

    Added edges are kept as parallel arrays ordered by (round, u, v); the
    dictionary views are built on first access.
    """

    def __init__(self, initial: Graph, final_graph: Graph, r: int,
                 eu: np.ndarray, ev: np.ndarray, rnd: np.ndarray,
                 rest: np.ndarray | None = None):
        self.initial = initial
        self.final_graph = final_graph
        self.r = r
        self.eu = eu
        self.ev = ev
        self.rnd = rnd
        # the r-2 completing vertices besides the edge, one row per added edge
        self.rest = rest

    @property
    def n(self) -> int:
        return self.initial.n

    @property
    def num_rounds(self) -> int:
        """Index T of the last round that added an edge (0 if none)."""
        return int(self.rnd[-1]) if len(self.rnd) else 0

    @property
    def num_added(self) -> int:
        return len(self.eu)

    @cached_property
    def added_edges(self) -> list[Edge]:
        return list(zip(self.eu.tolist(), self.ev.tolist()))

    @cached_property
    def rounds(self) -> list[list[Edge]]:
        """E_0, E_1, ..., E_T, each sorted."""
        out: list[list[Edge]] = [list(self.initial.edges())]
        out.extend([] for _ in range(self.num_rounds))
        for e, t in zip(self.added_edges, self.rnd.tolist()):
            out[t].append(e)
        return out

    @cached_property
    def round_of(self) -> dict[Edge, int]:
        d = dict.fromkeys(self.initial.edges(), 0)
        d.update(zip(self.added_edges, self.rnd.tolist()))
        return d

    @cached_property
    def completing_copy(self) -> dict[Edge, tuple[int, ...]]:
        if self.rest is None:
            raise ValueError("completing copies were not recorded")
        return {
            e: tuple(sorted(e + tuple(extra)))
            for e, extra in zip(self.added_edges, self.rest.tolist())
        }

    def label(self, u: int, v: int) -> int:
        """Round in which ``uv`` appeared; -1 if it never does."""
        return self.round_of.get(edge(u, v), -1)

    def percolates(self) -> bool:
        return self.final_graph.is_complete()

    def __repr__(self) -> str:
        return f"ClosureResult(n={self.n}, r={self.r}, added={self.num_added}, T={self.num_rounds})"


def _check_r(r: int) -> None:
    if r < 3:
        raise ValueError(f"clique size r must be at least 3, got {r}")


def _smallest_triangle(c: int, rows) -> tuple[int, ...] | None:
    while c:
        low = c & -c
        a = low.bit_length() - 1
        c ^= low
        rest = c & rows[a]
        while rest:
            lowb = rest & -rest
            rest ^= lowb
            b = lowb.bit_length() - 1
            w = rest & rows[b]
            if w:
                return (a, b, (w & -w).bit_length() - 1)
    return None


def _smallest_edge(c: int, rows) -> tuple[int, ...] | None:
    while c:
        low = c & -c
        c ^= low
        a = low.bit_length() - 1
        w = c & rows[a]
        if w:
            return (a, (w & -w).bit_length() - 1)
    return None


def smallest_clique(cand: int, k: int, rows) -> tuple[int, ...] | None:
    """Lexicographically smallest k-clique inside the vertex mask ``cand``.

    Vertices are tried in increasing order and each branch keeps only higher
    candidates, so the first clique found is the smallest sorted tuple.
    """
    if cand.bit_count() < k:
        return None
    if k == 0:
        return ()
    if k == 1:
        return ((cand & -cand).bit_length() - 1,)
    if k == 2:
        return _smallest_edge(cand, rows)
    if k == 3:
        return _smallest_triangle(cand, rows)
    while cand:
        low = cand & -cand
        a = low.bit_length() - 1
        cand ^= low
        rest = cand & rows[a]
        if rest.bit_count() >= k - 1:
            sub = smallest_clique(rest, k - 1, rows)
            if sub is not None:
                return (a,) + sub
        if cand.bit_count() < k:
            return None
    return None


def closure(g: Graph, r: int, record_copies: bool = True) -> ClosureResult:
    """Run the K_r-dynamics on ``g`` to its fixed point.

    When a pair ``uv`` is added, a new copy of K_r minus ``xy`` must use it:
    either ``x`` is an endpoint and ``y`` a neighbour of the other endpoint,
    or ``x`` and ``y`` are both common neighbours of ``u`` and ``v``.  Only
    those pairs are re-examined next round, unless marking them would cost
    more than a full rescan.
    """
    _check_r(r)
    n = g.n
    if n < 2:
        z = np.zeros(0, dtype=np.int32)
        return ClosureResult(g, g, r, z, z, z, np.zeros((0, r - 2), dtype=np.int32))
    a = _kernels.rows_to_words(g.rows, n)
    eu, ev, rnd, rest = _kernels.closure_kernel(a, r - 2, record_copies)
    final = Graph(n, _kernels.words_to_rows(a), g.edge_count + len(eu))
    return ClosureResult(g, final, r, eu, ev, rnd, rest if record_copies else None)


def closure_naive(g: Graph, r: int) -> ClosureResult:
    """Oracle: full rescans of all non-edges, clique test by enumeration."""
    _check_r(r)
    n = g.n
    adj = [set() for _ in range(n)]
    for u, v in g.edges():
        adj[u].add(v)
        adj[v].add(u)
    added: list[tuple[int, int, int, tuple[int, ...]]] = []
    t = 0
    while True:
        t += 1
        new = []
        for x in range(n):
            for y in range(x + 1, n):
                if y in adj[x]:
                    continue
                common = sorted(adj[x] & adj[y])
                for combo in combinations(common, r - 2):
                    if all(b in adj[a] for a, b in combinations(combo, 2)):
                        new.append((x, y))
                        added.append((x, y, t, combo))
                        break
        if not new:
            break
        for x, y in new:
            adj[x].add(y)
            adj[y].add(x)
    final = Graph(n, [sum(1 << v for v in adj[u]) for u in range(n)])
    cols = list(zip(*added)) if added else [(), (), (), ()]
    eu, ev, rnd = (np.array(c, dtype=np.int32) for c in cols[:3])
    rest = np.array(cols[3], dtype=np.int32).reshape(len(added), r - 2)
    return ClosureResult(g, final, r, eu, ev, rnd, rest)


def percolates(g: Graph, r: int) -> bool:
    return closure(g, r, record_copies=False).percolates()


def is_stable(g: Graph, r: int) -> bool:
    """True iff no missing pair completes a copy of K_r."""
    _check_r(r)
    rows = g.rows
    for x in range(g.n):
        d = ~rows[x] & ((1 << g.n) - 1) >> (x + 1) << (x + 1)
        for y in iter_bits(d):
            c = rows[x] & rows[y]
            if c.bit_count() >= r - 2 and smallest_clique(c, r - 2, rows) is not None:
                return False
    return True

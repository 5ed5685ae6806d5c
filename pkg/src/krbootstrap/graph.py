"""Undirected simple graphs on vertices 0..n-1 with bit-row adjacency.

Row ``v`` is a Python int whose bit ``u`` is set iff ``uv`` is an edge, so a
common neighbourhood is one AND.  Graph values are never mutated after
construction; the closure engine works on a private list of rows.
"""
from __future__ import annotations

import math
from typing import Iterable, Iterator

import numpy as np

from .rng import SplitMix64, stream_uniforms

MAX_VERTICES = 1 << 20
# Ceiling on the n*n/8 bytes the bit rows need; checked before allocating.
MAX_ADJACENCY_BYTES = 2 << 30

Edge = tuple[int, int]


class GraphError(ValueError):
    """Malformed graph input (bad endpoint, self-loop, bad file)."""


class ResourceError(RuntimeError):
    """Refusal to allocate: the requested graph would not fit the budget."""


def edge(u: int, v: int) -> Edge:
    """Normalise an unordered pair to ``(min, max)``."""
    return (u, v) if u < v else (v, u)


def check_size(n: int) -> None:
    if n < 0:
        raise GraphError(f"vertex count must be non-negative, got {n}")
    if n > MAX_VERTICES:
        raise ResourceError(f"n={n} exceeds the configured cap of {MAX_VERTICES} vertices")
    need = n * n // 8
    if need > MAX_ADJACENCY_BYTES:
        raise ResourceError(
            f"n={n} needs about {need} bytes of adjacency, above the {MAX_ADJACENCY_BYTES} byte budget"
        )


def iter_bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bits_to_list(mask: int) -> list[int]:
    return list(iter_bits(mask))


def list_to_bits(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


class Graph:
    """Immutable simple graph.  Use the module-level constructors."""

    __slots__ = ("n", "rows", "edge_count")

    def __init__(self, n: int, rows: Iterable[int], edge_count: int | None = None):
        self.n = n
        self.rows = tuple(rows)
        if len(self.rows) != n:
            raise GraphError("row count does not match n")
        if edge_count is None:
            edge_count = sum(r.bit_count() for r in self.rows) // 2
        self.edge_count = edge_count

    @classmethod
    def empty(cls, n: int) -> "Graph":
        check_size(n)
        return cls(n, [0] * n, 0)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        check_size(n)
        full = (1 << n) - 1
        return cls(n, [full ^ (1 << v) for v in range(n)], n * (n - 1) // 2)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def neighbors(self, v: int) -> int:
        return self.rows[v]

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def edges(self) -> Iterator[Edge]:
        """Edges ``(u, v)`` with ``u < v`` in lexicographic order."""
        for u, row in enumerate(self.rows):
            yield from ((u, v) for v in iter_bits(row >> (u + 1) << (u + 1)))

    def edge_set(self) -> set[Edge]:
        return set(self.edges())

    def is_complete(self) -> bool:
        return self.edge_count == self.n * (self.n - 1) // 2

    def with_edges(self, extra: Iterable[tuple[int, int]]) -> "Graph":
        rows = list(self.rows)
        for u, v in extra:
            _check_pair(self.n, u, v)
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return Graph(self.n, rows)

    def induced_on_edges(self, edges: Iterable[tuple[int, int]]) -> "Graph":
        return graph_from_edge_list(self.n, edges)

    def is_subgraph_of(self, other: "Graph") -> bool:
        return self.n == other.n and all(a & ~b == 0 for a, b in zip(self.rows, other.rows))

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges():
            a[u, v] = a[v, u] = True
        return a

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.n, self.rows))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edge_count})"


def _check_pair(n: int, u: int, v: int) -> None:
    if not (0 <= u < n and 0 <= v < n):
        raise GraphError(f"endpoint out of range in pair ({u}, {v}) for n={n}")
    if u == v:
        raise GraphError(f"self-loop ({u}, {v})")


def graph_from_edge_list(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Build a graph, de-duplicating repeated and reversed pairs."""
    check_size(n)
    rows = [0] * n
    for u, v in edges:
        _check_pair(n, u, v)
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    return Graph(n, rows)


def common_neighbors(g: Graph, u: int, v: int) -> int:
    """Bitmask of vertices adjacent to both ``u`` and ``v``."""
    _check_pair(g.n, u, v)
    return g.rows[u] & g.rows[v] & ~((1 << u) | (1 << v))


def _check_p(p: float) -> None:
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise GraphError(f"edge probability must lie in [0, 1], got {p}")


def sample_gnp(n: int, p: float, seed: int) -> Graph:
    """G(n, p) by geometric skipping over the lexicographic pair order.

    One uniform ``U`` from ``SplitMix64(seed)`` per present edge gives the gap
    ``floor(log(1 - U) / log(1 - p))`` to the next present pair.
    """
    _check_p(p)
    check_size(n)
    if p == 0.0 or n < 2:
        return Graph.empty(n)
    if p == 1.0:
        return Graph.complete(n)
    rng = SplitMix64(seed)
    log_q = math.log1p(-p)
    total = n * (n - 1) // 2
    rows = [0] * n
    u, v = 0, 0  # current pair is (u, v); v == u means "before row start"
    count = 0
    while True:
        gap = math.log1p(-rng.random()) / log_q if log_q else math.inf
        if gap >= total:
            break
        skip = int(gap)
        v += skip + 1
        while v >= n and u < n - 1:
            v = v - n + u + 2
            u += 1
        if u >= n - 1:
            break
        rows[u] |= 1 << v
        rows[v] |= 1 << u
        count += 1
    return Graph(n, rows, count)


def pair_weights(n: int, seed: int) -> np.ndarray:
    """One uniform per unordered pair, in lexicographic pair order."""
    return stream_uniforms(seed, n * (n - 1) // 2)


def graph_from_weights(n: int, weights: np.ndarray, p: float) -> Graph:
    """Edges are the pairs whose weight is below ``p`` (coupled sampling)."""
    check_size(n)
    iu, iv = np.triu_indices(n, k=1)
    keep = weights < p
    rows = [0] * n
    for u, v in zip(iu[keep].tolist(), iv[keep].tolist()):
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    return Graph(n, rows, int(keep.sum()))


def sample_gnp_naive(n: int, p: float, seed: int) -> Graph:
    """Per-pair Bernoulli oracle: pair i is present iff the i-th stream value < p.

    Identical in distribution to :func:`sample_gnp` but consumes the stream
    differently, so the two agree statistically rather than bit for bit.  It
    agrees exactly with :func:`graph_from_weights` on :func:`pair_weights`.
    """
    _check_p(p)
    check_size(n)
    rng = SplitMix64(seed)
    rows = [0] * n
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                rows[u] |= 1 << v
                rows[v] |= 1 << u
    return Graph(n, rows)


# -- edge-list text format --------------------------------------------------

def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.edge_count}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    """Parse ``"n m"`` followed by ``m`` lines ``"u v"``; ``#`` starts a comment."""
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise GraphError("empty edge list")
    try:
        header = [int(x) for x in rows[0]]
        pairs = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError as exc:
        raise GraphError(f"malformed edge list: {exc}") from None
    if len(header) != 2:
        raise GraphError("header must be 'n m'")
    n, m = header
    if m != len(pairs):
        raise GraphError(f"header declares {m} edges but {len(pairs)} were listed")
    return graph_from_edge_list(n, pairs)


def read_edge_list(path) -> Graph:
    with open(path) as fh:
        return parse_edge_list(fh.read())


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_edge_list(g))

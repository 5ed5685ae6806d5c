"""K_r-trees, (r-2)*-bootstrap percolation and the overlay lemmas.

A K_r-tree is a union of cliques H_1..H_t in which every H_i (i > 1) meets
the union of its predecessors in exactly one edge and two vertices.  On such
a tree, (r-2)*-BP infects a vertex with at least r-2 infected neighbours
(usual step) and, only when no usual step exists, an endpoint of an internal
edge e lying in two cliques, one with r-4 infected vertices and one with 1,
all outside e (special step).

Tie-breaks: the smallest eligible vertex for usual steps; for special steps
internal edges in the order they became internal, then clique pairs (i, j)
with i < j, and the smaller endpoint is infected.  Eligibility is re-read
after every single infection.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

from .closure import closure
from .graph import Edge, Graph, edge, iter_bits
from .rng import SplitMix64


class KrTreeError(ValueError):
    def __init__(self, index: int, message: str):
        super().__init__(f"clique {index}: {message}")
        self.index = index


@dataclass(frozen=True)
class KrTree:
    r: int
    cliques: tuple[tuple[int, ...], ...]
    # shared[i] is the edge H_i shares with H_1..H_{i-1}; None for H_1
    shared: tuple[Edge | None, ...]

    @property
    def order(self) -> int:
        return len(self.cliques)

    @cached_property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for c in self.cliques for v in c)

    @cached_property
    def edges(self) -> frozenset[Edge]:
        return frozenset(f for c in self.cliques for f in combinations(c, 2))

    @cached_property
    def containing(self) -> dict[Edge, list[int]]:
        """Edge -> indices of the cliques containing it."""
        out: dict[Edge, list[int]] = {}
        for i, c in enumerate(self.cliques):
            for f in combinations(c, 2):
                out.setdefault(f, []).append(i)
        return out

    @cached_property
    def internal_edges(self) -> list[Edge]:
        """Edges in two or more cliques, in the order they became internal."""
        seen: set[Edge] = set()
        out = []
        for f in self.shared[1:]:
            if f not in seen:
                seen.add(f)
                out.append(f)
        return out

    @cached_property
    def rows(self) -> dict[int, int]:
        adj: dict[int, int] = {v: 0 for v in self.vertices}
        for u, v in self.edges:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return adj

    def to_graph(self, n: int | None = None) -> Graph:
        n = max(self.vertices) + 1 if n is None else n
        rows = [0] * n
        for v, m in self.rows.items():
            rows[v] = m
        return Graph(n, rows)

    def relabel(self, offset: int) -> "KrTree":
        cl = tuple(tuple(v + offset for v in c) for c in self.cliques)
        sh = tuple(None if f is None else (f[0] + offset, f[1] + offset) for f in self.shared)
        return KrTree(self.r, cl, sh)


def kr_tree_from_cliques(r: int, cliques: Sequence[Iterable[int]]) -> KrTree:
    """Validate a construction sequence; raises KrTreeError with the index."""
    cl = []
    shared: list[Edge | None] = []
    vmask = 0
    edges: set[Edge] = set()
    for i, c in enumerate(cliques):
        c = tuple(sorted(c))
        if len(c) != r or len(set(c)) != r or min(c) < 0:
            raise KrTreeError(i, f"needs {r} distinct non-negative vertices, got {c}")
        common = [v for v in c if vmask >> v & 1]
        if i == 0:
            shared.append(None)
        else:
            if len(common) != 2:
                raise KrTreeError(i, f"shares {len(common)} vertices with the earlier cliques, needs exactly 2")
            f = edge(*common)
            if f not in edges:
                raise KrTreeError(i, f"shared pair {f} is not an edge of the earlier cliques")
            shared.append(f)
        cl.append(c)
        for v in c:
            vmask |= 1 << v
        edges.update(combinations(c, 2))
    if not cl:
        raise KrTreeError(0, "a K_r-tree needs at least one clique")
    return KrTree(r, tuple(cl), tuple(shared))


def build_kr_tree(r: int, attach_spec: Sequence[tuple[Edge, int | Sequence[int]]] = (),
                  first: Sequence[int] | None = None) -> KrTree:
    """H_1 on ``first`` (default 0..r-1), then one clique per attachment.

    An attachment is (shared edge, fresh) where fresh is the count r-2 of new
    vertices (labelled next in order) or an explicit vertex list.
    """
    if r < 3:
        raise ValueError("r must be at least 3")
    first = list(range(r)) if first is None else list(first)
    cliques = [first]
    nxt = max(first) + 1
    for i, (f, fresh) in enumerate(attach_spec, start=1):
        if isinstance(fresh, int):
            if fresh != r - 2:
                raise KrTreeError(i, f"an attachment brings r-2 = {r - 2} new vertices, got {fresh}")
            new = list(range(nxt, nxt + fresh))
        else:
            new = list(fresh)
        cliques.append(list(f) + new)
        nxt = max(nxt, max(new, default=nxt - 1) + 1)
    return kr_tree_from_cliques(r, cliques)


def sample_random_kr_tree(r: int, order: int, seed: int, offset: int = 0) -> KrTree:
    """Each attachment edge uniform among the edges of the current union."""
    if order < 1:
        raise ValueError("order must be at least 1")
    rng = SplitMix64(seed)
    cliques = [tuple(range(offset, offset + r))]
    edges = sorted(combinations(cliques[0], 2))
    nxt = offset + r
    shared: list[Edge | None] = [None]
    for _ in range(order - 1):
        f = rng.choice(edges)
        c = f + tuple(range(nxt, nxt + r - 2))
        nxt += r - 2
        cliques.append(c)
        shared.append(f)
        edges.extend(g for g in combinations(c, 2) if g != f)
    return KrTree(r, tuple(cliques), tuple(shared))


def ladder(r: int, height: int) -> KrTree:
    """H_{i+1} attached on an edge of H_i disjoint from H_i's own shared edge."""
    cliques = [tuple(range(r))]
    prev_shared = (0, 1)  # the target edge sits in H_1 on (0, 1)
    nxt = r
    for _ in range(height - 1):
        c = cliques[-1]
        rest = [v for v in c if v not in prev_shared]
        f = (rest[-2], rest[-1])
        cliques.append(f + tuple(range(nxt, nxt + r - 2)))
        nxt += r - 2
        prev_shared = f
    return kr_tree_from_cliques(r, cliques)


def parse_kr_tree(text: str) -> KrTree:
    """``r t`` then t lines of clique vertex lists; ``#`` starts a comment."""
    lines = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty tree file")
    try:
        r, t = (int(x) for x in lines[0])
        cliques = [[int(x) for x in ln] for ln in lines[1:]]
    except ValueError as exc:
        raise ValueError(f"malformed tree file: {exc}") from None
    if len(cliques) != t:
        raise ValueError(f"header declares {t} cliques but {len(cliques)} were listed")
    return kr_tree_from_cliques(r, cliques)


def format_kr_tree(t: KrTree) -> str:
    out = [f"{t.r} {t.order}"]
    out.extend(" ".join(map(str, c)) for c in t.cliques)
    return "\n".join(out) + "\n"


# -- structure checks --------------------------------------------------------

def _maximal_cliques(rows: dict[int, int]) -> list[int]:
    out = []

    def expand(r_: int, p: int, x: int) -> None:
        if not p and not x:
            out.append(r_)
            return
        pivot = next(iter_bits(p | x))
        for v in list(iter_bits(p & ~rows[pivot])):
            expand(r_ | (1 << v), p & rows[v], x & rows[v])
            p &= ~(1 << v)
            x |= 1 << v

    expand(0, sum(1 << v for v in rows), 0)
    return out


def check_clique_claim(t: KrTree) -> list[str]:
    """Part (1): every clique lies in some H_i; part (2): >= 3 common
    neighbours forces adjacency.  Returns the violations (empty if none)."""
    bad = []
    masks = [sum(1 << v for v in c) for c in t.cliques]
    for q in _maximal_cliques(t.rows):
        if not any(q & ~m == 0 for m in masks):
            bad.append(f"clique {sorted(iter_bits(q))} lies in no H_i")
    rows = t.rows
    for x, y in combinations(sorted(t.vertices), 2):
        if (rows[x] & rows[y]).bit_count() >= 3 and not rows[x] >> y & 1:
            bad.append(f"{x} and {y} have >= 3 common neighbours but are not adjacent")
    return bad


# -- (r-2)*-BP ---------------------------------------------------------------

@dataclass
class Infection:
    vertex: int
    kind: str  # "usual" | "special"
    k: int  # infected neighbours at infection time
    internal_edge: Edge | None = None
    cliques: tuple[int, int] | None = None


@dataclass
class InfectionTrace:
    seeds: frozenset[int]
    events: list[Infection] = field(default_factory=list)
    infected: frozenset[int] = frozenset()

    @property
    def histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(ev.k for ev in self.events).items()))

    def log_lines(self) -> list[str]:
        out = []
        for i, ev in enumerate(self.events, 1):
            if ev.kind == "usual":
                out.append(f"{i} usual {ev.vertex} k={ev.k}")
            else:
                out.append(f"{i} special {ev.vertex} edge={ev.internal_edge[0]},{ev.internal_edge[1]} "
                           f"cliques={ev.cliques[0]},{ev.cliques[1]} k={ev.k}")
        return out


def _special_candidate(t: KrTree, inf: int):
    r = t.r
    for f in t.internal_edges:
        u, v = f
        if inf >> u & 1 or inf >> v & 1:
            continue
        fm = (1 << u) | (1 << v)
        counts = [
            (sum(1 << x for x in t.cliques[i]) & inf & ~fm).bit_count() for i in t.containing[f]
        ]
        idx = t.containing[f]
        for a, b in combinations(range(len(idx)), 2):
            ca, cb = counts[a], counts[b]
            if (ca >= r - 4 and cb >= 1) or (cb >= r - 4 and ca >= 1):
                return f, (idx[a], idx[b])
    return None


def rstar_bp(t: KrTree, seeds: Iterable[int]) -> InfectionTrace:
    seeds = frozenset(seeds)
    if not seeds <= t.vertices:
        raise ValueError("seeds must be vertices of the tree")
    r = t.r
    rows = t.rows
    inf = sum(1 << v for v in seeds)
    verts = sorted(t.vertices)
    trace = InfectionTrace(seeds)
    while True:
        for v in verts:
            if not inf >> v & 1:
                k = (rows[v] & inf).bit_count()
                if k >= r - 2:
                    trace.events.append(Infection(v, "usual", k))
                    inf |= 1 << v
                    break
        else:
            cand = _special_candidate(t, inf)
            if cand is None:
                break
            f, pair = cand
            u = f[0]
            trace.events.append(Infection(u, "special", (rows[u] & inf).bit_count(), f, pair))
            inf |= 1 << u
    trace.infected = frozenset(iter_bits(inf))
    return trace


def replay_check(t: KrTree, trace: InfectionTrace) -> list[str]:
    """Re-run the rules along the trace: usual steps need r-2 infected
    neighbours; special steps need the two-clique condition and no usual step."""
    r = t.r
    rows = t.rows
    inf = sum(1 << v for v in trace.seeds)
    bad = []
    for i, ev in enumerate(trace.events):
        k = (rows[ev.vertex] & inf).bit_count()
        if k != ev.k:
            bad.append(f"event {i}: recorded k={ev.k}, actual {k}")
        if ev.kind == "usual":
            if k < r - 2:
                bad.append(f"event {i}: usual step with {k} infected neighbours")
        else:
            usual = [v for v in t.vertices if not inf >> v & 1 and (rows[v] & inf).bit_count() >= r - 2]
            if usual:
                bad.append(f"event {i}: special step while {usual[0]} was eligible for a usual step")
            f = ev.internal_edge
            fm = (1 << f[0]) | (1 << f[1])
            ca, cb = (((sum(1 << x for x in t.cliques[j]) & inf & ~fm).bit_count()) for j in ev.cliques)
            if not ((ca == r - 4 and cb == 1) or (cb == r - 4 and ca == 1)):
                bad.append(f"event {i}: special step without the two-clique condition")
        inf |= 1 << ev.vertex
    return bad


def expansion_bound_check(t: KrTree, seeds: Iterable[int]) -> tuple[int, int, bool]:
    seeds = set(seeds)
    size = len(rstar_bp(t, seeds).infected)
    bound = 10 + (4 * t.r + 5) * len(seeds)
    return size, bound, size <= bound


# -- overlays ----------------------------------------------------------------

@dataclass
class ComparisonReport:
    seeds: frozenset[int]
    infected: frozenset[int]
    added: int
    violations: list[str]
    spread: set[Edge]

    @property
    def holds(self) -> bool:
        return not self.violations


def _overlay(t: KrTree, g: Graph):
    if max(t.vertices) >= g.n:
        raise ValueError("the tree does not fit in the graph's vertex universe")
    vg = {v for v in range(g.n) if g.rows[v]}
    seeds = frozenset(vg & t.vertices)
    union = g.with_edges(t.edges)
    return vg, seeds, union


def check_comparison(t: KrTree, g: Graph) -> ComparisonReport:
    """Closure of G u T stays inside T plus the clique on V(G) u <S;T>_*, and
    every completing copy lies inside V(G) u <S;T>_*."""
    vg, seeds, union = _overlay(t, g)
    infected = rstar_bp(t, seeds).infected
    allowed = vg | infected
    res = closure(union, t.r)
    bad = []
    spread: set[Edge] = set()
    for f, copy in res.completing_copy.items():
        if f not in t.edges and not (f[0] in allowed and f[1] in allowed):
            bad.append(f"added edge {f} leaves Q u T")
        if not set(copy) <= allowed:
            bad.append(f"completing copy {copy} of {f} leaves V(G) u I_*")
        for h in combinations(copy, 2):
            if h in t.edges:
                spread.add(h)
    for f in spread:
        if not (f[0] in infected and f[1] in infected):
            bad.append(f"spread edge {f} has an endpoint outside I_*")
    return ComparisonReport(seeds, infected, res.num_added, bad, spread)


def spread_edges(t: KrTree, g: Graph) -> tuple[set[Edge], float | None]:
    """E_*: tree edges lying in a completed copy; with |E_*| / |S|."""
    rep = check_comparison(t, g)
    x = len(rep.seeds)
    return rep.spread, (len(rep.spread) / x if x else None)


def random_overlay(r: int, order: int, shared: int, extra: int, p: float, seed: int) -> tuple[KrTree, Graph]:
    """A random K_r-tree and a G(extra + shared, p) glued on ``shared`` tree vertices."""
    rng = SplitMix64(seed)
    t = sample_random_kr_tree(r, order, rng.next_u64())
    nt = max(t.vertices) + 1
    hosts = rng.sample(sorted(t.vertices), min(shared, len(t.vertices)))
    fresh = list(range(nt, nt + extra))
    verts = hosts + fresh
    n = nt + extra
    rows = [0] * n
    for a, b in combinations(verts, 2):
        if rng.random() < p:
            rows[a] |= 1 << b
            rows[b] |= 1 << a
    return t, Graph(n, rows)

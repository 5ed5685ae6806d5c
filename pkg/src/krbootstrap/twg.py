"""Tree witness graphs (TWGs): construction, recognition, exact counts.

A k-TWG for ``e`` is grown either from the root (a copy of K_r through ``e``
whose other C(r,2)-1 edges each carry a TWG, vertex-disjoint outside the
root) or by grafting leaves: replace an edge ``f`` by a fresh copy of K_r
minus ``f``.  The two descriptions give the same graphs, so enumeration uses
grafting while ``twg_count_recursive`` follows the root recursion; they are
each other's oracle against the closed form

    t(k) = ((r-2)k)! / (r-2)!^k * FC_d(k),   d = C(r,2) - 2.

Recognition runs grafting backwards.  A leaf clique whose children are all
bare edges shows up as r-2 vertices of degree r-1 that share one closed
neighbourhood S with |S| = r; deleting them and restoring the missing edge
of S undoes the graft.  W is a TWG for e iff this pruning ends at {e}.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Iterator

from .closure import closure
from .constants import alpha, fc_degree, fuss_catalan, lam
from .graph import Edge, edge, graph_from_edge_list, iter_bits
from .rng import SplitMix64

DEFAULT_CAP = 10 ** 7


class NotWitnessError(ValueError):
    """The graph does not witness the edge: e is not in its closure."""


class CapExceeded(RuntimeError):
    """Refusal: the requested enumeration is larger than the configured cap."""


# -- counting ---------------------------------------------------------------

def twg_count_formula(r: int, k: int) -> int:
    """t(k): labelled k-TWGs for a fixed edge on a fixed label set."""
    if r < 3 or k < 0:
        raise ValueError(f"need r >= 3 and k >= 0, got r={r}, k={k}")
    m = r - 2
    num = math.factorial(m * k) * fuss_catalan(fc_degree(r), k)
    q, rem = divmod(num, math.factorial(m) ** k)
    assert rem == 0
    return q


@lru_cache(maxsize=None)
def twg_count_recursive(r: int, k: int) -> int:
    """t(k) from the root recursion.

    Choose the r-2 root vertices among the (r-2)k labels outside e, split the
    remaining (r-2)(k-1) labels among the C(r,2)-1 primal branches, and count
    each branch recursively:

        t(k) = C((r-2)k, r-2) sum_{k_1+...+k_N = k-1} multinomial * prod t(k_f)
    """
    if k == 0:
        return 1
    m = r - 2
    big_n = math.comb(r, 2) - 1
    # exponential generating coefficients t(j) / (mj)!
    egf = [Fraction(twg_count_recursive(r, j), math.factorial(m * j)) for j in range(k)]
    power = [Fraction(1)] + [Fraction(0)] * (k - 1)
    for _ in range(big_n):
        power = [sum(power[i] * egf[j - i] for i in range(j + 1)) for j in range(k)]
    total = power[k - 1] * math.factorial(m * (k - 1)) * math.comb(m * k, m)
    assert total.denominator == 1
    return total.numerator


def _balanced_q(r: int, k: int) -> int:
    big_n = math.comb(r, 2) - 1
    if k < 1 or (k - 1) % big_n:
        raise ValueError(
            f"balanced TWGs need k - 1 divisible by C(r,2)-1 = {big_n}; "
            f"k={k} gives q=(k-1)/{big_n}={Fraction(k - 1, big_n)}"
        )
    return (k - 1) // big_n


def balanced_twg_count(r: int, k: int) -> int:
    """b(k) = ((r-2)k)!/(r-2)! * (t(q)/((r-2)q)!)^(C(r,2)-1), q = (k-1)/(C(r,2)-1)."""
    if k == 0:
        return 1
    q = _balanced_q(r, k)
    m = r - 2
    big_n = math.comb(r, 2) - 1
    val = Fraction(math.factorial(m * k), math.factorial(m)) * Fraction(
        twg_count_formula(r, q), math.factorial(m * q)
    ) ** big_n
    assert val.denominator == 1
    return val.numerator


def balanced_twg_count_recursive(r: int, k: int) -> int:
    """b(k) as the single term (q, ..., q) of the root recursion."""
    if k == 0:
        return 1
    q = _balanced_q(r, k)
    m = r - 2
    big_n = math.comb(r, 2) - 1
    multinom = math.factorial(m * (k - 1)) // math.factorial(m * q) ** big_n
    return math.comb(m * k, m) * multinom * twg_count_recursive(r, q) ** big_n


def twg_asymptotic_ratio(r: int, k: int) -> float:
    """t(k) k^(3/2) / (gamma^((r-2)k) ((r-2)k)!), which tends to beta_d.

    Equal to FC_d(k) k^(3/2) / alpha_d^k; evaluated in the log domain.
    """
    d = fc_degree(r)
    a = alpha(d)
    log_fc = math.log(fuss_catalan(d, k))
    log_a = math.log(a.numerator) - math.log(a.denominator)
    return math.exp(log_fc + 1.5 * math.log(k) - k * log_a)


# -- the recursive structure ------------------------------------------------

@dataclass(frozen=True)
class Twg:
    """Leaf (``root is None``: the bare edge ``e``) or a root clique with branches."""

    r: int
    e: Edge
    root: tuple[int, ...] | None = None
    children: tuple[tuple[Edge, "Twg"], ...] = ()

    @cached_property
    def order(self) -> int:
        if self.root is None:
            return 0
        return 1 + sum(c.order for _, c in self.children)

    @cached_property
    def edges(self) -> frozenset[Edge]:
        if self.root is None:
            return frozenset([self.e])
        return frozenset().union(*(c.edges for _, c in self.children))

    @cached_property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for f in self.edges for v in f)

    def branches(self) -> Iterator["Twg"]:
        """Every branch, this TWG included, in pre-order."""
        yield self
        for _, c in self.children:
            yield from c.branches()

    def leaves(self) -> list["Twg"]:
        return [b for b in self.branches() if b.order == 1]

    def root_cliques(self) -> list[tuple[int, ...]]:
        return [b.root for b in self.branches() if b.root is not None]

    def graft(self, f: Edge, new: Iterable[int]) -> "Twg":
        """Replace the bare edge ``f`` by a leaf on ``f`` and ``new``."""
        f = edge(*f)
        new = tuple(new)
        if self.root is None:
            if self.e != f:
                raise ValueError(f"{f} is not an edge of this TWG")
            if len(new) != self.r - 2 or set(new) & set(f):
                raise ValueError("a leaf needs r-2 new vertices")
            root = tuple(sorted(f + new))
            kids = tuple((g, Twg(self.r, g)) for g in combinations(root, 2) if g != f)
            return Twg(self.r, f, root, kids)
        if f not in self.edges:
            raise ValueError(f"{f} is not an edge of this TWG")
        if set(new) & self.vertices:
            raise ValueError("grafted vertices must be new")
        kids = tuple((g, c.graft(f, new) if f in c.edges else c) for g, c in self.children)
        return Twg(self.r, self.e, self.root, kids)

    def check(self) -> None:
        """Validate the root recursion and the vertex/edge counts."""
        k = self.order
        m = self.r - 2
        if len(self.vertices) != m * k + 2 or len(self.edges) != (math.comb(self.r, 2) - 2) * k + 1:
            raise AssertionError("vertex or edge count off")
        if self.root is None:
            return
        root = set(self.root)
        if len(root) != self.r or not set(self.e) <= root:
            raise AssertionError("root is not a copy of K_r through e")
        seen: set[int] = set()
        for f, c in self.children:
            c.check()
            outside = c.vertices - root
            if outside & seen:
                raise AssertionError("branches overlap outside the root")
            seen |= outside


def twg_leaf(r: int, e: Edge) -> Twg:
    return Twg(r, edge(*e))


def ladder_twg(r: int, height: int, e: Edge = (0, 1)) -> Twg:
    """Each leaf grafted on an edge of the previous one, away from its base."""
    t = twg_leaf(r, e)
    f = edge(*e)
    nxt = max(f) + 1
    for _ in range(height):
        new = tuple(range(nxt, nxt + r - 2))
        t = t.graft(f, new)
        nxt += r - 2
        f = new[-2:]
    return t


def random_twg(r: int, k: int, seed: int, e: Edge = (0, 1)) -> Twg:
    """A k-TWG grown by grafting on uniformly chosen edges; new labels count up."""
    rng = SplitMix64(seed)
    t = twg_leaf(r, e)
    nxt = max(e) + 1
    for _ in range(k):
        f = rng.choice(sorted(t.edges))
        t = t.graft(f, range(nxt, nxt + r - 2))
        nxt += r - 2
    return t


# -- enumeration by grafting ------------------------------------------------

def _pair_table(n: int) -> list[list[int]]:
    idx = [[-1] * n for _ in range(n)]
    i = 0
    for u in range(n):
        for v in range(u + 1, n):
            idx[u][v] = idx[v][u] = i
            i += 1
    return idx


def enumerate_twg_masks(r: int, k: int, cap: int = DEFAULT_CAP) -> tuple[set[int], list[Edge]]:
    """All labelled k-TWGs for (0, 1) on labels 0..(r-2)k+1 as pair bitmasks.

    Returns the set of masks and the pair list decoding bit i.
    """
    total = twg_count_formula(r, k)
    if total > cap:
        raise CapExceeded(f"t({k}) = {total} exceeds the enumeration cap {cap}")
    m = r - 2
    n = m * k + 2
    idx = _pair_table(max(n, 2))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    blocks = list(combinations(range(2, n), m))
    inner = {}
    star = {}
    for y in blocks:
        inner[y] = sum(1 << idx[a][b] for a, b in combinations(y, 2))
        star[y] = [sum(1 << idx[x][b] for b in y) if x not in y else 0 for x in range(n)]
    level = {1 << idx[0][1]: 0b11}
    for _ in range(k):
        nxt: dict[int, int] = {}
        for mask, vm in level.items():
            free = [b for b in blocks if not any(vm >> x & 1 for x in b)]
            for bit in iter_bits(mask):
                u, v = pairs[bit]
                base = mask ^ (1 << bit)
                for y in free:
                    new = base | inner[y] | star[y][u] | star[y][v]
                    if new not in nxt:
                        nxt[new] = vm | sum(1 << x for x in y)
        level = nxt
    return set(level), pairs


def enumerate_twgs(r: int, k: int, labels: Iterable[int] | None = None,
                   e: Edge | None = None, cap: int = DEFAULT_CAP) -> list[tuple[Edge, ...]]:
    """Every labelled k-TWG for ``e`` on ``labels`` as a sorted edge tuple."""
    m = r - 2
    labels = sorted(labels) if labels is not None else list(range(m * k + 2))
    if len(labels) != m * k + 2 or len(set(labels)) != len(labels):
        raise ValueError(f"need {m * k + 2} distinct labels, got {len(labels)}")
    e = edge(*(e if e is not None else labels[:2]))
    if not set(e) <= set(labels):
        raise ValueError("the target edge must lie inside the label set")
    masks, pairs = enumerate_twg_masks(r, k, cap)
    others = [x for x in labels if x not in e]
    relabel = [e[0], e[1]] + others
    table = [edge(relabel[u], relabel[v]) for u, v in pairs]
    out = []
    for mask in masks:
        out.append(tuple(sorted(table[b] for b in iter_bits(mask))))
    out.sort()
    return out


# -- recognition ------------------------------------------------------------

def _relabel(edges: Iterable[Edge], e: Edge) -> tuple[list[int], list[int], dict[int, int]]:
    verts = sorted({v for f in edges for v in f} | set(e))
    pos = {v: i for i, v in enumerate(verts)}
    rows = [0] * len(verts)
    for u, v in edges:
        a, b = pos[u], pos[v]
        rows[a] |= 1 << b
        rows[b] |= 1 << a
    return verts, rows, pos


def witnesses(edges: Iterable[Edge], e: Edge, r: int) -> bool:
    """True iff ``e`` lies in the K_r-closure of the graph with these edges."""
    edges = [edge(*f) for f in edges]
    e = edge(*e)
    verts, rows, pos = _relabel(edges, e)
    g = graph_from_edge_list(len(verts), [(pos[u], pos[v]) for u, v in edges])
    c = closure(g, r, record_copies=False)
    return c.final_graph.has_edge(pos[e[0]], pos[e[1]])


def _prune(rows: list[int], ea: int, eb: int, r: int) -> list[tuple[Edge, tuple[int, ...]]] | None:
    """Undo grafts until only ``ab`` is left; the undone grafts, last first."""
    m = r - 2
    rows = list(rows)
    alive = sum(1 << i for i, x in enumerate(rows) if x)
    emask = (1 << ea) | (1 << eb)
    steps = []
    while alive != emask or rows[ea] != 1 << eb:
        for y in iter_bits(alive & ~emask):
            if rows[y].bit_count() != r - 1:
                continue
            s = rows[y] | (1 << y)
            ys = [w for w in iter_bits(s) if rows[w] | (1 << w) == s]
            if len(ys) != m or any(w in (ea, eb) for w in ys):
                continue
            u, v = (w for w in iter_bits(s) if w not in ys)
            if rows[u] >> v & 1:
                continue
            ymask = sum(1 << w for w in ys)
            for w in ys:
                rows[w] = 0
            rows[u] = (rows[u] & ~ymask) | (1 << v)
            rows[v] = (rows[v] & ~ymask) | (1 << u)
            alive &= ~ymask
            steps.append(((u, v), tuple(ys)))
            break
        else:
            return None
    return steps


def decompose_twg(edges: Iterable[Edge], e: Edge, r: int) -> Twg | None:
    """The root/branch structure of a TWG for ``e``, or None if it is not one.

    Raises NotWitnessError if ``e`` is not in the closure.
    """
    edges = {edge(*f) for f in edges}
    e = edge(*e)
    if edges == {e}:
        return twg_leaf(r, e)
    verts, rows, pos = _relabel(edges, e)
    if not witnesses(edges, e, r):
        raise NotWitnessError(f"{e} is not in the K_{r}-closure of the given graph")
    if e in edges:
        return None
    m = r - 2
    k, rem = divmod(len(verts) - 2, m)
    if rem or k < 1 or len(edges) != (math.comb(r, 2) - 2) * k + 1:
        return None
    steps = _prune(rows, pos[e[0]], pos[e[1]], r)
    if steps is None:
        return None
    t = twg_leaf(r, e)
    for (u, v), ys in reversed(steps):
        t = t.graft(edge(verts[u], verts[v]), [verts[y] for y in ys])
    return t


def is_twg(edges: Iterable[Edge], e: Edge, r: int) -> bool:
    return decompose_twg(edges, e, r) is not None


# -- partial TWGs -----------------------------------------------------------

@dataclass
class PartialTwgReport:
    sigma: int
    efficiency: Fraction
    deficiency: int
    extendability: int | None
    cap_exceeded: bool
    full: frozenset[int]
    partial: frozenset[int]
    disjoint: frozenset[int]


def sigma(edges: Iterable[Edge], e: Edge) -> int:
    return len({v for f in edges for v in f} - set(e))


def efficiency(edges: Iterable[Edge], e: Edge, r: int) -> Fraction:
    edges = set(edges)
    return lam(r) * sigma(edges, e) - len(edges)


def _fpd(s: set[Edge], t: Twg) -> tuple[frozenset[int], frozenset[int], frozenset[int]]:
    full, part, none = set(), set(), set()
    for v in t.vertices - set(t.e):
        ev = {f for f in t.edges if v in f}
        inside = ev & s
        if inside == ev:
            full.add(v)
        elif inside:
            part.add(v)
        else:
            none.add(v)
    return frozenset(full), frozenset(part), frozenset(none)


def tree_extendability(s: Iterable[Edge], e: Edge, r: int, cap: int) -> int | None:
    """min sigma(T*) - sigma(S) over TWGs T* for e strictly containing S.

    Iterative deepening over graft sequences from {e}.  Vertices of S keep
    their labels and other new vertices are interchangeable, so each graft
    only decides which S-vertices it introduces.  A branch dies as soon as an
    S-edge is grafted away or both its endpoints are present without it,
    since later grafts only add edges at new vertices.  None if nothing is
    found with sigma(T*) - sigma(S) <= cap.
    """
    s = {edge(*f) for f in s}
    e = edge(*e)
    m = r - 2
    s_verts = {v for f in s for v in f} - set(e)
    sig = len(s_verts)
    fresh0 = max([*s_verts, *e]) + 1
    lo = -(-sig // m)
    hi = (sig + cap) // m

    def dead(edges: frozenset[Edge], present: frozenset[int]) -> bool:
        for f in s:
            if f not in edges and f[0] in present and f[1] in present:
                return True
        return False

    for depth in range(max(lo, 1), hi + 1):
        seen: set[frozenset[Edge]] = set()

        def search(edges: frozenset[Edge], present: frozenset[int], left: int, fresh: int) -> bool:
            missing = s_verts - present
            if len(missing) > left * m:
                return False
            if left == 0:
                return s < edges
            if edges in seen:
                return False
            seen.add(edges)
            avail = sorted(missing)
            for f in sorted(edges):
                if f in s:
                    continue
                base = edges - {f}
                for x in range(min(m, len(avail)), -1, -1):
                    for chosen in combinations(avail, x):
                        new = chosen + tuple(range(fresh, fresh + m - x))
                        clique = f + new
                        added = {edge(a, b) for a, b in combinations(clique, 2)} - {f}
                        nxt = base | added
                        pres = present | set(new)
                        if dead(nxt, pres):
                            continue
                        if search(nxt, pres, left - 1, fresh + m - x):
                            return True
            return False

        if search(frozenset([e]), frozenset(e), depth, fresh0):
            return depth * m - sig
    return None


def partial_twg_params(s: Iterable[Edge], t: Twg, cap: int | None = None,
                       extend: bool = True) -> PartialTwgReport:
    s = {edge(*f) for f in s}
    if not s:
        raise ValueError("S must be non-empty")
    if not s <= t.edges:
        raise ValueError("S is not a subgraph of T")
    if s == t.edges:
        raise ValueError("S must be a proper subgraph of T")
    r = t.r
    sig = sigma(s, t.e)
    full, part, none = _fpd(s, t)
    if cap is None:
        cap = sig + 4 * (r - 2)
    ext = tree_extendability(s, t.e, r, cap) if extend else None
    return PartialTwgReport(sig, lam(r) * sig - len(s), len(part), ext,
                            extend and ext is None, full, part, none)


def branch_removals(t: Twg) -> set[frozenset[Edge]]:
    """Edge sets T minus B for every branch B other than T itself."""
    out = set()
    for b in t.branches():
        if b is not t:
            out.add(t.edges - b.edges)
    return out


@dataclass
class StructuralReport:
    checked: int = 0
    zero_efficiency: int = 0
    max_deficiency_ratio: float = 0.0
    max_extendability_ratio: float = 0.0
    extendability_checked: int = 0
    extendability_cap_exceeded: int = 0
    max_branch_deficiency: int = 0
    failures: list[str] = field(default_factory=list)


def check_structural_lemma(t: Twg, extend_limit: int | None = 200, seed: int = 0) -> StructuralReport:
    """Check efficiency >= 0 with its equality case on every proper S of T.

    Deficiency is measured on every S; extendability (a search) on all S
    with positive efficiency when ``extend_limit`` is None, otherwise on a
    seeded sample of that many.
    """
    r = t.r
    lam_r = lam(r)
    edges = sorted(t.edges)
    m = len(edges)
    if m > 24:
        raise CapExceeded(f"2^{m} subsets is beyond the exhaustive check")
    branch_sets = branch_removals(t)
    emask = [(1 << a) | (1 << b) for a, b in edges]
    evs = sorted(t.vertices - set(t.e))
    outside = ~((1 << t.e[0]) | (1 << t.e[1]))
    incident = {v: sum(1 << i for i, f in enumerate(edges) if v in f) for v in evs}
    rep = StructuralReport()
    positive = []
    for sub in range(1, (1 << m) - 1):
        vm = 0
        for i in iter_bits(sub):
            vm |= emask[i]
        sig = (vm & outside).bit_count()
        eff = lam_r * sig - sub.bit_count()
        part = sum(1 for v in evs if incident[v] & sub and incident[v] & ~sub)
        rep.checked += 1
        s_set = None
        if eff < 0:
            rep.failures.append(f"negative efficiency {eff} on subset {sub:#x}")
            continue
        if eff == 0:
            rep.zero_efficiency += 1
            s_set = frozenset(edges[i] for i in iter_bits(sub))
            if s_set not in branch_sets:
                rep.failures.append(f"efficiency 0 but not a branch removal: {sorted(s_set)}")
            rep.max_branch_deficiency = max(rep.max_branch_deficiency, part)
            if part > 2:
                rep.failures.append(f"branch removal with deficiency {part}")
        else:
            rep.max_deficiency_ratio = max(rep.max_deficiency_ratio, (part - 2) / eff)
            positive.append((sub, eff))
    # the converse direction of the equality case
    for s_set in branch_sets:
        if s_set and lam_r * sigma(s_set, t.e) - len(s_set) != 0:
            rep.failures.append(f"branch removal with nonzero efficiency: {sorted(s_set)}")
    if extend_limit is not None and len(positive) > extend_limit:
        positive = random.Random(seed).sample(positive, extend_limit)
    for sub, eff in positive:
        s_set = [edges[i] for i in iter_bits(sub)]
        sig = sigma(s_set, t.e)
        ext = tree_extendability(s_set, t.e, r, sig + 4 * (r - 2))
        rep.extendability_checked += 1
        if ext is None:
            rep.extendability_cap_exceeded += 1
        else:
            rep.max_extendability_ratio = max(rep.max_extendability_ratio, ext / eff)
    return rep

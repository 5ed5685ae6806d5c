"""Witness graphs, the red edge algorithm and the tree decomposition.

``run_wga`` assigns to every edge of the closure its witness graph: the edge
itself if it was present initially, else the union of the witnesses of the
other edges of its completing copy.  ``extract_rea`` replays the formation
of one witness copy by copy, and :class:`ReaTrace` classifies each step
(tree step, internal red step, costly step) while maintaining, per REA
component, a bad part B and a list of tree parts.  Properties (1)-(3) of the
decomposition are checked after every step; a violation raises
``DecompositionError`` with the step index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable

from .closure import ClosureResult
from .constants import lam
from .graph import Edge, edge, iter_bits

TS, INTR, COSTLY = "TS", "IntR", "Costly"


class DecompositionError(AssertionError):
    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


# -- witness graph algorithm ------------------------------------------------

class WitnessAssignment:
    """W^(e) for every edge of the closure, as bitmasks over initial edges."""

    def __init__(self, result: ClosureResult):
        self.result = result
        self.r = result.r
        self.initial_edges = result.rounds[0]
        self.index = {f: i for i, f in enumerate(self.initial_edges)}
        self.copies = result.completing_copy
        self.edge_mask: dict[Edge, int] = {}
        self.vertex_mask: dict[Edge, int] = {}
        for i, (u, v) in enumerate(self.initial_edges):
            self.edge_mask[(u, v)] = 1 << i
            self.vertex_mask[(u, v)] = (1 << u) | (1 << v)
        # bottom-up in round order: the other edges of a copy are all older
        for f in result.added_edges:
            em = vm = 0
            for g in self.others(f):
                em |= self.edge_mask[g]
                vm |= self.vertex_mask[g]
            self.edge_mask[f] = em
            self.vertex_mask[f] = vm

    def others(self, f: Edge) -> list[Edge]:
        """E(H^(f)) minus f."""
        return [g for g in combinations(self.copies[f], 2) if g != f]

    def witness(self, f: Edge) -> set[Edge]:
        f = edge(*f)
        return {self.initial_edges[i] for i in iter_bits(self.edge_mask[f])}

    def sigma(self, f: Edge) -> int:
        return self.vertex_mask[edge(*f)].bit_count() - 2

    def copy(self, f: Edge) -> tuple[int, ...]:
        return self.copies[edge(*f)]

    def __contains__(self, f) -> bool:
        return edge(*f) in self.edge_mask


def run_wga(result: ClosureResult) -> WitnessAssignment:
    return WitnessAssignment(result)


def excess(w: Iterable[Edge], e: Edge, r: int) -> Fraction:
    """chi(W) = e(W) - (lambda sigma(W) + 1), exact."""
    w = {edge(*f) for f in w}
    sig = len({v for f in w for v in f} | set(e)) - 2
    chi = len(w) - (lam(r) * sig + 1)
    assert (chi * (r - 2)).denominator == 1
    return chi


# -- K_r-trees ---------------------------------------------------------------

def clique_edges(clique: Iterable[int]) -> set[Edge]:
    return {edge(a, b) for a, b in combinations(sorted(clique), 2)}


def is_kr_tree_cliques(cliques: list[tuple[int, ...]]) -> bool:
    """Greedy check that the cliques can be ordered as a K_r-tree."""
    if not cliques:
        return False
    rest = list(cliques[1:])
    vmask = sum(1 << v for v in cliques[0])
    edges = clique_edges(cliques[0])
    while rest:
        for i, c in enumerate(rest):
            shared = [v for v in c if vmask >> v & 1]
            if len(shared) >= 3:
                return False
            if len(shared) == 2:
                if edge(*shared) not in edges:
                    return False
                break
        else:
            return False
        c = rest.pop(i)
        vmask |= sum(1 << v for v in c)
        edges |= clique_edges(c)
    return True


# -- REA ---------------------------------------------------------------------

class TreePart:
    __slots__ = ("pid", "cliques", "edges", "vmask", "red", "born", "status", "ended", "targets")

    def __init__(self, pid: int, cliques: list[tuple[int, ...]], red: set[Edge], born: int):
        self.pid = pid
        self.cliques = cliques
        self.edges: set[Edge] = set()
        for c in cliques:
            self.edges |= clique_edges(c)
        self.vmask = 0
        for c in cliques:
            for v in c:
                self.vmask |= 1 << v
        self.red = red
        self.born = born
        self.status = "active"  # active | grown | compromised
        self.ended: int | None = None
        self.targets: int | None = None

    @property
    def order(self) -> int:
        return len(self.cliques)

    @property
    def num_vertices(self) -> int:
        return self.vmask.bit_count()


class Component:
    __slots__ = ("cid", "steps", "vmask", "edges", "red", "bad", "bad_vmask", "parts")

    def __init__(self, cid: int):
        self.cid = cid
        self.steps: list[int] = []
        self.vmask = 0
        self.edges: set[Edge] = set()
        self.red: set[Edge] = set()
        self.bad: set[Edge] = set()
        self.bad_vmask = 0
        self.parts: list[TreePart] = []

    def add_bad(self, edges: Iterable[Edge]) -> None:
        for u, v in edges:
            self.bad.add((u, v))
            self.bad_vmask |= (1 << u) | (1 << v)


@dataclass
class Step:
    index: int
    clique: tuple[int, ...]
    red: Edge
    black: list[Edge]
    kind: str = TS
    cost: int = 0
    involved: int = 0  # vertex mask V_j for costly steps
    merged: list[int] = field(default_factory=list)
    component: int = -1
    bad_tree_step: bool = False
    compromised: int = 0
    bad_size: int = 0
    num_parts: int = 0


@dataclass
class WitnessMetrics:
    sigma: int
    chi: Fraction
    kappa: int
    tau: int
    omega: int
    beta: int
    costly_steps: int
    target_counts: list[int]
    chi_over_kappa: float | None
    tau_over_kappa: float | None
    part_vertex_surplus: int

    def as_dict(self) -> dict:
        d = self.__dict__.copy()
        d["chi"] = str(self.chi)
        return d


class ReaTrace:
    """The red edge algorithm for one target edge.

    Copies H_1..H_m (the completing copies of the red edges, ordered by round
    then lexicographically) are replayed on construction: components, step
    kinds, costs, targets and the tree decomposition.
    """

    def __init__(self, assignment: WitnessAssignment, e: Edge, check: bool = True):
        e = edge(*e)
        if check and assignment.r < 5:
            # K_r-trees are K_r-stable only from r = 5 on; below that an IntR
            # step can complete a copy inside one tree part
            raise ValueError("decomposition properties hold for r >= 5 only; pass check=False")
        self.assignment = assignment
        self.r = assignment.r
        self.e = e
        self.check = check
        res = assignment.result
        rnd = res.round_of
        if rnd.get(e, -1) < 0:
            raise KeyError(f"{e} is not in the closure")
        self.trivial = rnd[e] == 0
        red: set[Edge] = set()
        if not self.trivial:
            stack = [e]
            red.add(e)
            while stack:
                f = stack.pop()
                for g in assignment.others(f):
                    if rnd[g] > 0 and g not in red:
                        red.add(g)
                        stack.append(g)
        self.red_edges = sorted(red, key=lambda f: (rnd[f], f))
        self.steps: list[Step] = []
        self.parts: list[TreePart] = []
        self.components: dict[int, Component] = {}
        self._next_cid = 0
        self.tau = 0
        self.beta = 0
        self.targets: set[Edge] = set()
        if not self.trivial:
            self._replay()

    @property
    def m(self) -> int:
        return len(self.red_edges)

    @cached_property
    def witness(self) -> set[Edge]:
        return self.assignment.witness(self.e)

    # the replay ------------------------------------------------------------

    def _replay(self) -> None:
        initial = self.assignment.index
        seen: set[Edge] = set()
        owner: dict[Edge, Component] = {}
        r = self.r
        for j, ej in enumerate(self.red_edges):
            clique = self.assignment.copy(ej)
            hedges = clique_edges(clique)
            hmask = sum(1 << v for v in clique)
            black = sorted(f for f in hedges if f not in seen and f != ej)
            for f in black:
                if f not in initial:
                    raise DecompositionError(j, f"new non-red edge {f} is not initial")
            step = Step(j, clique, ej, black)
            merged: list[Component] = []
            shared: dict[int, list[Edge]] = {}
            for f in sorted(hedges):
                c = owner.get(f)
                if c is not None:
                    if c.cid not in shared:
                        merged.append(c)
                        shared[c.cid] = []
                    shared[c.cid].append(f)
            step.merged = [c.cid for c in merged]

            # classification
            h = len(merged)
            outside = ~hmask
            multi = 0
            if h >= 2:
                once = 0
                for c in merged:
                    multi |= once & c.vmask & outside
                    once |= c.vmask & outside
            if h == 0:
                kind = TS
            elif all(len(shared[c.cid]) == 1 and (c.vmask & hmask).bit_count() == 2 for c in merged) and not multi:
                kind = TS
            elif h == 1 and hmask & ~merged[0].vmask == 0 and len(shared[merged[0].cid]) == len(hedges) - 1:
                kind = INTR
            else:
                kind = COSTLY
            step.kind = kind
            if kind == COSTLY:
                step.involved = hmask | multi
                step.cost = step.involved.bit_count()

            # targets: reused red edges stop being targets
            for f in hedges:
                if f != ej:
                    self.targets.discard(f)
            self.targets.add(ej)

            comp = self._merge(j, merged, step, clique, hedges, hmask, shared)
            for f in hedges:
                owner[f] = comp
                seen.add(f)
            for c in merged:
                if c is not comp:
                    for f in c.edges:
                        owner[f] = comp
            step.component = comp.cid
            step.bad_size = len(comp.bad)
            step.num_parts = len(comp.parts)
            self.steps.append(step)
            if self.check:
                self._check_properties(j, comp)
        final = self.components[self.steps[-1].component]
        for p in final.parts:
            p.ended = len(self.steps)
            p.targets = len(p.red & self.targets)

    def _merge(self, j, merged, step, clique, hedges, hmask, shared) -> Component:
        ej = step.red
        if merged:
            comp = max(merged, key=lambda c: len(c.edges))
        else:
            comp = Component(self._next_cid)
            self._next_cid += 1
            self.components[comp.cid] = comp
        old_parts = {c.cid: list(c.parts) for c in merged}
        old_bad = {c.cid: (set(c.bad), c.bad_vmask) for c in merged}
        for c in merged:
            if c is comp:
                continue
            comp.steps.extend(c.steps)
            comp.vmask |= c.vmask
            comp.edges |= c.edges
            comp.red |= c.red
            comp.add_bad(c.bad)
            del self.components[c.cid]
        comp.steps.append(j)
        comp.vmask |= hmask
        comp.edges |= hedges
        comp.red.add(ej)

        if step.kind == TS:
            touched: list[TreePart] = []
            for c in merged:
                f = shared[c.cid][0]
                if not old_bad[c.cid][0]:
                    touched.extend(old_parts[c.cid])
                else:
                    touched.extend(p for p in old_parts[c.cid] if f in p.edges)
            others = [p for c in merged for p in old_parts[c.cid] if p not in touched]
            cliques = [clique] + [q for p in touched for q in p.cliques]
            red = {ej}.union(*(p.red for p in touched))
            nonempty = sum(1 for c in merged if old_bad[c.cid][0])
            if nonempty <= 1:
                part = TreePart(len(self.parts), cliques, red, j)
                self.parts.append(part)
                for p in touched:
                    p.status, p.ended = "grown", j
                comp.parts = others + [part]
            else:
                step.bad_tree_step = True
                self.beta += 1
                aux_edges = set(hedges)
                for p in touched:
                    aux_edges |= p.edges
                comp.add_bad(aux_edges)
                self._compromise(touched, j, step)
                comp.parts = others
        elif step.kind == INTR:
            comp.add_bad([ej])
        else:
            lost, kept = [], []
            for c in merged:
                bmask = old_bad[c.cid][1]
                for p in old_parts[c.cid]:
                    (lost if (p.vmask & ~bmask) & step.involved else kept).append(p)
            bad = set(hedges)
            for p in lost:
                bad |= p.edges
            comp.add_bad(bad)
            self._compromise(lost, j, step)
            comp.parts = kept
        return comp

    def _compromise(self, parts: list[TreePart], j: int, step: Step) -> None:
        for p in parts:
            p.status, p.ended = "compromised", j
            p.targets = len(p.red & self.targets)
        step.compromised = len(parts)
        self.tau += len(parts)

    def _check_properties(self, j: int, comp: Component) -> None:
        for p in comp.parts:
            if not is_kr_tree_cliques(p.cliques):
                raise DecompositionError(j, f"tree part {p.pid} is not a K_r-tree")
        if not comp.bad:
            if len(comp.parts) != 1 or comp.parts[0].edges != comp.edges:
                raise DecompositionError(j, "empty bad part but the component is not one tree part")
            return
        targets = comp.red & self.targets
        for p in comp.parts:
            common = p.edges & comp.bad
            if len(common) != 1:
                raise DecompositionError(j, f"tree part {p.pid} meets B in {len(common)} edges")
            (base,) = common
            if p.vmask & comp.bad_vmask != (1 << base[0]) | (1 << base[1]):
                raise DecompositionError(j, f"tree part {p.pid} meets B outside its base {base}")
            if base in targets:
                raise DecompositionError(j, f"base {base} of tree part {p.pid} is a target edge")
        for p, q in combinations(comp.parts, 2):
            meet = p.vmask & q.vmask
            if meet.bit_count() > 1 or meet & ~comp.bad_vmask:
                raise DecompositionError(j, f"tree parts {p.pid} and {q.pid} overlap badly")

    # views ------------------------------------------------------------------

    def maximal_parts(self) -> list[TreePart]:
        return [p for p in self.parts if p.status != "grown"]

    def metrics(self) -> WitnessMetrics:
        w = self.witness
        r = self.r
        sig = len({v for f in w for v in f} | set(self.e)) - 2
        chi = excess(w, self.e, r)
        kappa = sum(s.cost for s in self.steps)
        costly = sum(1 for s in self.steps if s.kind == COSTLY)
        maximal = self.maximal_parts()
        return WitnessMetrics(
            sigma=sig,
            chi=chi,
            kappa=kappa,
            tau=self.tau,
            omega=len(maximal),
            beta=self.beta,
            costly_steps=costly,
            target_counts=[p.targets or 0 for p in maximal],
            chi_over_kappa=float(chi) / kappa if kappa else None,
            tau_over_kappa=self.tau / kappa if kappa else None,
            part_vertex_surplus=sum(p.num_vertices for p in maximal) - sig,
        )

    def records(self) -> list[dict]:
        """One JSON-ready record per step with running totals."""
        out = []
        kappa = tau = beta = 0
        for s in self.steps:
            kappa += s.cost
            tau += s.compromised
            beta += int(s.bad_tree_step)
            out.append({
                "index": s.index + 1,
                "clique": list(s.clique),
                "red": list(s.red),
                "kind": s.kind,
                "cost": s.cost,
                "metrics": {"kappa": kappa, "tau": tau, "beta": beta,
                            "bad_edges": s.bad_size, "tree_parts": s.num_parts,
                            "bad_tree_step": s.bad_tree_step},
            })
        return out


def extract_rea(assignment: WitnessAssignment, e: Edge, check: bool = True) -> ReaTrace:
    return ReaTrace(assignment, e, check)


def classify_steps(trace: ReaTrace) -> list[tuple[str, int]]:
    return [(s.kind, s.cost) for s in trace.steps]


def tree_decomposition(trace: ReaTrace) -> list[tuple[int, int]]:
    """Per step: (|B|, number of tree parts) of the component just formed.

    The full per-part state is on ``trace.parts`` and ``trace.components``.
    """
    return [(s.bad_size, s.num_parts) for s in trace.steps]


def witness_metrics(trace: ReaTrace) -> WitnessMetrics:
    return trace.metrics()


# -- Aizenman-Lebowitz scan --------------------------------------------------

@dataclass
class AlScan:
    m: list[int]
    factors: list[float | None]
    max_factor: float | None
    bound: int
    holds: bool


def al_scan(result: ClosureResult, assignment: WitnessAssignment) -> AlScan:
    """m(t) = max sigma(W^(e)) over edges present by round t."""
    r = result.r
    bound = math.comb(r, 2)
    if result.num_added == 0:
        return AlScan([], [], None, bound, True)
    best = 0 if result.rounds[0] else -1
    m = [best]
    for rnd in result.rounds[1:]:
        for f in rnd:
            best = max(best, assignment.sigma(f))
        m.append(best)
    factors: list[float | None] = [None, None]
    holds = True
    for t in range(2, len(m)):
        if m[t - 1] >= r - 2:
            factors.append(m[t] / m[t - 1])
            if m[t] > bound * m[t - 1]:
                holds = False
        else:
            factors.append(None)
    real = [f for f in factors if f is not None]
    return AlScan(m, factors[: len(m)], max(real) if real else None, bound, holds)

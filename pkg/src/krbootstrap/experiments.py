"""Monte Carlo harness: percolation sweeps, edge expansion, TWG census, A-L scans.

Every trial draws its randomness from ``mix(master, point, trial)``.  Coupled
sweeps draw one uniform weight per pair from ``mix(master, 0, trial)`` and
reuse it at every grid point, so each trial is monotone in p.  CSV output
starts with one ``#`` comment line carrying the schema version and a hash of
the resolved configuration; nothing time-dependent is written.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from itertools import combinations
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import constants as C
from .closure import closure
from .graph import Edge, Graph, check_size, edge, graph_from_weights, iter_bits, pair_weights, sample_gnp
from .rng import mix
from .twg import twg_count_formula
from .witness import al_scan, run_wga

SCHEMA_VERSION = 1
EXPANSION_CAVEAT = (
    "asymptotic diagnostic only: finite-n closures converge slowly to the limit, "
    "so no agreement with rho is expected at this size"
)


def resolve_threads(threads: int | None = None) -> int:
    env = os.environ.get("THREADS")
    if env:
        try:
            threads = int(env)
        except ValueError:
            raise ValueError(f"THREADS must be an integer, got {env!r}") from None
    threads = 1 if threads is None else threads
    if threads < 1:
        raise ValueError("thread count must be at least 1")
    return threads


def _run(fn: Callable, jobs: Sequence, threads: int) -> list:
    # results come back in job order, so the reduction is deterministic
    if threads == 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


def scaled_to_p(r: int, n: int, s: float) -> float:
    """p with gamma n p^lambda = s."""
    return (s / (C.gamma(r) * n)) ** (1.0 / float(C.lam(r)))


def scaled_coordinate(r: int, n: int, p: float) -> float:
    return C.gamma(r) * n * p ** float(C.lam(r))


@dataclass(frozen=True)
class ExperimentConfig:
    r: int
    n: int
    grid: tuple[float, ...] = ()
    trials: int = 10
    seed: int = 0
    threads: int = 1
    out: str | None = None
    coupled: bool = True

    def __post_init__(self):
        if self.r < 3:
            raise ValueError("r must be at least 3")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        for p in self.grid:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"grid values must lie in [0, 1], got {p}")
        check_size(self.n)

    def trial_seed(self, point: int, trial: int) -> int:
        return mix(self.seed, point, trial)

    def config_hash(self) -> str:
        d = asdict(self)
        d.pop("out")
        d.pop("threads")
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def header(self, kind: str) -> str:
        return f"# krbootstrap {kind} schema={SCHEMA_VERSION} config={self.config_hash()}"


def _write_csv(path: str | Path | None, header: str, columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([f"{x:.10g}" if isinstance(x, float) else x for x in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


# -- percolation sweep -------------------------------------------------------

@dataclass
class SweepRow:
    p: float
    scaled: float
    fraction: float
    mean_rounds: float
    mean_final_edges: float
    mean_ratio: float

    COLUMNS = ("p", "scaled", "fraction", "mean_rounds", "mean_final_edges", "mean_ratio")

    def as_tuple(self) -> tuple:
        return (self.p, self.scaled, self.fraction, self.mean_rounds, self.mean_final_edges, self.mean_ratio)


@dataclass
class SweepResult:
    config: ExperimentConfig
    rows: list[SweepRow]
    # per_trial[i][j]: did trial j percolate at grid point i
    per_trial: list[list[bool]]
    csv_text: str

    def monotone_per_trial(self) -> bool:
        order = sorted(range(len(self.rows)), key=lambda i: self.rows[i].p)
        for j in range(self.config.trials):
            seq = [self.per_trial[i][j] for i in order]
            if any(a and not b for a, b in zip(seq, seq[1:])):
                return False
        return True


def _one_closure(g: Graph, r: int) -> tuple[bool, int, int, int]:
    res = closure(g, r, record_copies=False)
    return res.percolates(), res.num_rounds, res.final_graph.edge_count, g.edge_count


def percolation_sweep(config: ExperimentConfig) -> SweepResult:
    cfg = config
    if not cfg.grid:
        raise ValueError("the sweep needs at least one grid point")
    threads = resolve_threads(cfg.threads)
    n, r = cfg.n, cfg.r
    grid = list(cfg.grid)

    if cfg.coupled:
        def trial(j: int) -> list[tuple[bool, int, int, int]]:
            w = pair_weights(n, cfg.trial_seed(0, j))
            return [_one_closure(graph_from_weights(n, w, p), r) for p in grid]

        by_trial = _run(trial, list(range(cfg.trials)), threads)
        outcomes = [[by_trial[j][i] for j in range(cfg.trials)] for i in range(len(grid))]
    else:
        jobs = [(i, j) for i in range(len(grid)) for j in range(cfg.trials)]
        flat = _run(lambda ij: _one_closure(sample_gnp(n, grid[ij[0]], cfg.trial_seed(*ij)), r), jobs, threads)
        outcomes = [flat[i * cfg.trials:(i + 1) * cfg.trials] for i in range(len(grid))]

    rows = []
    for p, outs in zip(grid, outcomes):
        ratios = [fe / e0 for _, _, fe, e0 in outs if e0]
        rows.append(SweepRow(
            p=p,
            scaled=scaled_coordinate(r, n, p),
            fraction=sum(o[0] for o in outs) / len(outs),
            mean_rounds=statistics.fmean(o[1] for o in outs),
            mean_final_edges=statistics.fmean(o[2] for o in outs),
            mean_ratio=statistics.fmean(ratios) if ratios else math.nan,
        ))
    text = _write_csv(cfg.out, cfg.header("sweep"), SweepRow.COLUMNS, (row.as_tuple() for row in rows))
    per_trial = [[o[0] for o in outs] for outs in outcomes]
    return SweepResult(cfg, rows, per_trial, text)


# -- edge expansion ----------------------------------------------------------

@dataclass
class ExpansionSummary:
    r: int
    n: int
    gamma_bar: float
    p: float
    trials: int
    ratios: list[float]
    mean: float
    stderr: float
    ci95: tuple[float, float]
    rho: float
    caveat: str = EXPANSION_CAVEAT

    def report(self) -> str:
        lo, hi = self.ci95
        return (
            f"r={self.r} n={self.n} gamma_bar={self.gamma_bar:.10g} p={self.p:.6g} trials={self.trials}\n"
            f"measured |E(closure)|/(p C(n,2)) = {self.mean:.6f} (95% CI {lo:.6f} .. {hi:.6f})\n"
            f"rho(r, gamma_bar)               = {self.rho:.6f}\n"
            f"note: {self.caveat}\n"
        )

    def as_dict(self) -> dict:
        d = asdict(self)
        d["ci95"] = list(self.ci95)
        return d


def edge_expansion_experiment(r: int, n: int, gamma_bar: float, trials: int, seed: int,
                              threads: int = 1) -> ExpansionSummary:
    g = C.gamma(r)
    if not gamma_bar > g:
        raise ValueError(f"need gamma_bar > gamma({r}) = {g:.10g}, got {gamma_bar}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    check_size(n)
    p = (gamma_bar * n) ** (-1.0 / float(C.lam(r)))
    denom = p * math.comb(n, 2)

    def trial(j: int) -> float:
        res = closure(sample_gnp(n, p, mix(seed, 0, j)), r, record_copies=False)
        return res.final_graph.edge_count / denom

    ratios = _run(trial, list(range(trials)), resolve_threads(threads))
    mean = statistics.fmean(ratios)
    se = statistics.stdev(ratios) / math.sqrt(trials) if trials > 1 else math.nan
    half = 1.96 * se if trials > 1 else math.nan
    return ExpansionSummary(r, n, gamma_bar, p, trials, ratios, mean, se, (mean - half, mean + half),
                            C.rho_from_gamma_bar(r, gamma_bar))


# -- TWG census --------------------------------------------------------------

@dataclass
class CensusResult:
    counts: list[int]
    truncated: bool
    nodes: int


def _cliques_in(cand: int, k: int, rows: Sequence[int]) -> Iterable[tuple[int, ...]]:
    """All k-cliques inside the vertex mask ``cand``, in lexicographic order."""
    if k == 0:
        yield ()
        return
    for v in iter_bits(cand):
        rest = cand & rows[v] & ~((1 << (v + 1)) - 1)
        if (rest.bit_count()) < k - 1:
            continue
        for tail in _cliques_in(rest, k - 1, rows):
            yield (v,) + tail


class _Budget(Exception):
    pass


def twg_census(g: Graph, r: int, k_max: int = 2, node_budget: int = 10**6) -> CensusResult:
    """X_k for k = 0..k_max (k_max <= 2): k-TWGs contained in g, as distinct
    labelled edge sets over all target pairs.

    X_0 counts edges.  X_1 counts copies of K_r minus a pair f: every
    (r-2)-clique K with common neighbourhood N contributes C(|N|, 2).  A
    2-TWG is such a leaf on f = ab together with a root clique on a, b and
    r-2 further vertices Q, disjoint from the leaf, whose pairs other than f
    are all in g except possibly the target.  Every visited clique costs one
    node; exceeding ``node_budget`` stops the search and flags the counts
    from that order on as partial.
    """
    if r < 4:
        raise ValueError("the census needs r >= 4 (edge sets identify TWGs only from r = 4)")
    if not 0 <= k_max <= 2:
        raise ValueError("the census searches orders 0, 1 and 2 only")
    rows = g.rows
    full = (1 << g.n) - 1
    counts = [g.edge_count]
    nodes = 0
    if k_max == 0:
        return CensusResult(counts, False, nodes)

    def tick() -> None:
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise _Budget

    x1 = 0
    leaves: list[tuple[int, int, tuple[int, ...]]] = []
    try:
        for kset in _cliques_in(full, r - 2, rows):
            tick()
            common = full
            for v in kset:
                common &= rows[v]
            m = common.bit_count()
            x1 += m * (m - 1) // 2
            if k_max >= 2:
                for a, b in combinations(list(iter_bits(common)), 2):
                    leaves.append((a, b, kset))
    except _Budget:
        counts.append(x1)
        return CensusResult(counts, True, nodes)
    counts.append(x1)
    if k_max == 1:
        return CensusResult(counts, False, nodes)

    found: set[frozenset[Edge]] = set()
    try:
        for a, b, kset in leaves:
            leaf = [edge(x, y) for x, y in combinations(kset, 2)]
            leaf += [edge(a, v) for v in kset] + [edge(b, v) for v in kset]
            avoid = ~(sum(1 << v for v in kset) | (1 << a) | (1 << b))
            both = rows[a] & rows[b] & avoid
            one = (rows[a] ^ rows[b]) & avoid
            roots: set[tuple[int, ...]] = set()
            # Q a clique adjacent to both a and b: the target is any pair but f
            for q in _cliques_in(both, r - 2, rows):
                tick()
                roots.add(q)
            # Q missing one pair, inside Q or between Q and {a, b}
            for s_ in _cliques_in(both, r - 3, rows):
                tick()
                smask = sum(1 << v for v in s_)
                adj_all = full
                for v in s_:
                    adj_all &= rows[v]
                for w in iter_bits(both & ~smask):
                    if (adj_all >> w & 1) == 0 and (rows[w] & smask).bit_count() == r - 4:
                        roots.add(tuple(sorted(s_ + (w,))))
                for w in iter_bits(one & adj_all):
                    roots.add(tuple(sorted(s_ + (w,))))
            for q in roots:
                verts = (a, b) + q
                pairs = [edge(x, y) for x, y in combinations(verts, 2) if edge(x, y) != edge(a, b)]
                missing = [f for f in pairs if not rows[f[0]] >> f[1] & 1]
                if len(missing) > 1:
                    continue
                targets = missing if missing else pairs
                for e in targets:
                    found.add(frozenset(leaf + [f for f in pairs if f != e]))
    except _Budget:
        counts.append(len(found))
        return CensusResult(counts, True, nodes)
    counts.append(len(found))
    return CensusResult(counts, False, nodes)


def census_expectation(r: int, n: int, p: float, k: int) -> float:
    """E X_k = C(n,2) C(n-2,(r-2)k) t(k) p^(lambda (r-2) k + 1)."""
    e = C.lam(r) * (r - 2) * k + 1
    assert e.denominator == 1
    return math.comb(n, 2) * math.comb(n - 2, (r - 2) * k) * twg_count_formula(r, k) * p ** int(e)


@dataclass
class CensusSummary:
    r: int
    n: int
    p: float
    k: int
    trials: int
    seed: int
    mean: float
    stderr: float
    expected: float
    z: float
    within: bool
    truncated: int
    reseeded: bool = False

    def report(self) -> str:
        verdict = "within" if self.within else "outside"
        return (
            f"r={self.r} n={self.n} p={self.p:.6g} k={self.k} trials={self.trials} seed={self.seed}\n"
            f"mean X_{self.k} = {self.mean:.6f} +- {self.stderr:.6f} (standard error)\n"
            f"exact E X_{self.k} = {self.expected:.6f}; z = {self.z:.3f} ({verdict} 3 standard errors)\n"
            + (f"truncated trials: {self.truncated}\n" if self.truncated else "")
            + ("rerun with a fresh seed after a first miss\n" if self.reseeded else "")
        )


def census_experiment(r: int, n: int, p: float, trials: int, seed: int, k: int = 1,
                      node_budget: int = 10**6, threads: int = 1, reseed: bool = True) -> CensusSummary:
    """Sample mean of X_k over G(n, p) against its exact expectation.

    A miss beyond 3 standard errors is rerun once with seed ``mix(seed, 1)``.
    """
    if trials < 2:
        raise ValueError("trials must be at least 2 for a standard error")

    def run(s: int) -> CensusSummary:
        def trial(j: int) -> CensusResult:
            return twg_census(sample_gnp(n, p, mix(s, 0, j)), r, k, node_budget)

        res = _run(trial, list(range(trials)), resolve_threads(threads))
        xs = [c.counts[k] for c in res]
        mean = statistics.fmean(xs)
        se = statistics.stdev(xs) / math.sqrt(trials)
        exp = census_expectation(r, n, p, k)
        z = (mean - exp) / se if se > 0 else (0.0 if mean == exp else math.inf)
        return CensusSummary(r, n, p, k, trials, s, mean, se, exp, z, abs(z) <= 3.0,
                             sum(c.truncated for c in res))

    out = run(seed)
    if not out.within and reseed:
        out = run(mix(seed, 1))
        out.reseeded = True
    return out


# -- Aizenman-Lebowitz trajectories ------------------------------------------

@dataclass
class AlTrajectory:
    point: int
    trial: int
    p: float
    m: list[int]
    factors: list[float | None]
    holds: bool
    percolates: bool


def al_experiment(config: ExperimentConfig) -> tuple[list[AlTrajectory], str]:
    """Closure plus witness assignment per trial; m(t) and per-round factors.

    Raises AssertionError if any factor exceeds C(r,2).
    """
    cfg = config
    if not cfg.grid:
        raise ValueError("the experiment needs at least one grid point")
    jobs = [(i, j) for i in range(len(cfg.grid)) for j in range(cfg.trials)]

    def trial(ij: tuple[int, int]) -> AlTrajectory:
        i, j = ij
        p = cfg.grid[i]
        res = closure(sample_gnp(cfg.n, p, cfg.trial_seed(i, j)), cfg.r)
        scan = al_scan(res, run_wga(res))
        return AlTrajectory(i, j, p, scan.m, scan.factors, scan.holds, res.percolates())

    trajs = _run(trial, jobs, resolve_threads(cfg.threads))
    bad = [t for t in trajs if not t.holds]
    rows = []
    for t in trajs:
        for step, (m, f) in enumerate(zip(t.m, t.factors)):
            rows.append((t.point, t.trial, t.p, step, m, "" if f is None else f))
    text = _write_csv(cfg.out, cfg.header("al"), ("point", "trial", "p", "round", "m", "factor"), rows)
    if bad:
        t = bad[0]
        raise AssertionError(
            f"expansion factor above C(r,2) at point {t.point}, trial {t.trial}: m = {t.m}"
        )
    return trajs, text

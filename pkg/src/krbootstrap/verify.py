"""The acceptance suite: one check per numbered criterion.

Each check returns a :class:`CriterionResult`; ``run_all`` drives them and
``python -m krbootstrap verify`` exits 0 iff every one passes.  Seeds are
fixed, so a run is reproducible.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from importlib import resources
from typing import Callable

import numpy as np

from . import constants as C
from .closure import closure, closure_naive, is_stable
from .experiments import (
    ExperimentConfig, census_experiment, edge_expansion_experiment, percolation_sweep, scaled_to_p,
)
from .graph import Graph, sample_gnp
from .krtree import (
    check_clique_claim, check_comparison, expansion_bound_check, random_overlay, rstar_bp,
    replay_check, sample_random_kr_tree,
)
from .render import HeatmapSpec, color_stop_check, read_ppm, render_heatmap, symmetric
from .rng import SplitMix64, mix
from .twg import (
    enumerate_twgs, is_twg, twg_count_formula, twg_count_recursive, witnesses,
)
from .witness import DecompositionError, al_scan, excess, extract_rea, run_wga

MASTER = 20240601


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f} s)"


def c1_closure_oracle(instances: int = 500) -> tuple[bool, str]:
    rng = SplitMix64(mix(MASTER, 1))
    bad = 0
    for i in range(instances):
        r = 4 + i % 3
        n = 2 + rng.randbelow(49)
        p = (1 + rng.randbelow(9)) / 10
        g = sample_gnp(n, p, rng.next_u64())
        a, b = closure(g, r), closure_naive(g, r)
        same = (a.final_graph == b.final_graph and np.array_equal(a.eu, b.eu)
                and np.array_equal(a.ev, b.ev) and np.array_equal(a.rnd, b.rnd))
        bad += not same
    return bad == 0, f"{instances} instances, {bad} mismatches"


def c2_enumeration() -> tuple[bool, str]:
    want = {(5, 0): 1, (5, 1): 1, (5, 2): 180, (5, 3): 196560, (6, 0): 1, (6, 1): 1, (6, 2): 980}
    got = {}
    ok = True
    for (r, k), w in want.items():
        got[r, k] = len(enumerate_twgs(r, k))
        ok &= got[r, k] == w == twg_count_formula(r, k) == twg_count_recursive(r, k)
    return ok, " ".join(f"r={r},k={k}:{got[r, k]}" for r, k in want)


def c3_structure() -> tuple[bool, str]:
    bad = total = 0
    for r, kmax in ((5, 3), (6, 2)):
        lam = C.lam(r)
        for k in range(kmax + 1):
            for es in enumerate_twgs(r, k):
                total += 1
                verts = {v for f in es for v in f} | {0, 1}
                ok = (len(verts) == (r - 2) * k + 2 and len(es) == lam * (r - 2) * k + 1
                      and witnesses(es, (0, 1), r) and excess(es, (0, 1), r) == 0
                      and is_twg(es, (0, 1), r))
                bad += not ok
    return bad == 0, f"{total} TWGs, {bad} failures"


def c4_fuss_catalan() -> tuple[bool, str]:
    bad = 0
    for d in range(1, 16):
        rec = C.fuss_catalan_recurrence(d, 30)
        bad += sum(C.fuss_catalan(d, k) != rec[k] for k in range(31))
    catalan = [math.comb(2 * k, k) // (k + 1) for k in range(21)]
    bad += sum(C.fuss_catalan(1, k) != catalan[k] for k in range(21))
    return bad == 0, f"d<=15, k<=30 and Catalan k<=20: {bad} mismatches"


def c5_constants() -> tuple[bool, str]:
    msgs = []
    ok = True
    for r in range(5, 9):
        res = C.gamma_residual(r)
        ok &= res <= 1e-12
        msgs.append(f"gamma({r}) residual {res:.1e}")
    r = 5
    d = C.fc_degree(r)
    a = float(C.alpha(d))
    grid = [a * (1 + 0.25 * (i + 1)) for i in range(20)]
    rhos = [C.rho(r, ab) for ab in grid]
    ok &= all(C.rho_residual(r, ab, x) <= 1e-12 * ab for ab, x in zip(grid, rhos))
    ok &= all(x > y for x, y in zip(rhos, rhos[1:]))
    x = 1 / (2 * a)
    ok &= abs(C.fc_generating_value(d, x) - C.fc_series(d, x, 200)) <= 1e-9
    ok &= all(abs(rh - C.fc_generating_value(d, 1 / ab)) <= 1e-9 for ab, rh in zip(grid, rhos))
    msgs.append("rho residuals, monotonicity, series and rho = f(1/abar) checked on 20 points")
    return ok, "; ".join(msgs)


def c6_kr_tree_stability(samples: int = 200) -> tuple[bool, str]:
    bad = 0
    for i in range(samples):
        r = 5 + i % 3
        t = sample_random_kr_tree(r, 1 + i % 30, mix(MASTER, 6, i))
        bad += (not is_stable(t.to_graph(), r)) or bool(check_clique_claim(t))
    return bad == 0, f"{samples} trees, {bad} failures"


def c7_overlays(samples: int = 500) -> tuple[bool, str]:
    bad_cmp = bad_exp = bad_replay = 0
    for i in range(samples):
        rng = SplitMix64(mix(MASTER, 7, 0, i))
        r = 5 + i % 3
        t, g = random_overlay(r, 1 + rng.randbelow(20), rng.randbelow(5), rng.randbelow(25),
                              0.3 + 0.6 * rng.random(), rng.next_u64())
        rep = check_comparison(t, g)
        bad_cmp += not rep.holds or len(rep.seeds) > 4
    for i in range(samples):
        rng = SplitMix64(mix(MASTER, 7, 1, i))
        r = 5 + i % 3
        t = sample_random_kr_tree(r, 1 + rng.randbelow(40), rng.next_u64())
        seeds = rng.sample(sorted(t.vertices), min(len(t.vertices), rng.randbelow(9)))
        bad_exp += not expansion_bound_check(t, seeds)[2]
        bad_replay += bool(replay_check(t, rstar_bp(t, seeds)))
    ok = bad_cmp == bad_exp == bad_replay == 0
    return ok, (f"{samples} overlays ({bad_cmp} comparison failures), {samples} seed sets "
                f"({bad_exp} expansion failures, {bad_replay} replay failures)")


def c8_witness(samples: int = 100) -> tuple[bool, str]:
    r = 5
    sizes = (40, 80, 150, 250, 400)
    found = traces = bad = 0
    seed = 0
    first_bad = ""
    while found < samples:
        n = sizes[seed % len(sizes)]
        g = sample_gnp(n, 2.0 * C.p_c(r, n), mix(MASTER, 8, seed))
        seed += 1
        res = closure(g, r)
        if not res.percolates():
            continue
        found += 1
        wa = run_wga(res)
        added = res.added_edges
        for f in sorted({added[0], added[len(added) // 2], added[-1]}):
            traces += 1
            try:
                tr = extract_rea(wa, f, check=True)
                m = tr.metrics()
                twg = is_twg(tr.witness, f, r)
                ok = (m.chi >= 0 and (m.chi == 0) == twg and m.beta <= m.costly_steps
                      and (twg or m.omega <= m.tau + 1))
            except DecompositionError as exc:
                ok = False
                first_bad = first_bad or f"sample {seed - 1}, edge {f}: {exc}"
            if not ok:
                bad += 1
                first_bad = first_bad or f"sample {seed - 1}, edge {f}"
        bad += not al_scan(res, wa).holds
    detail = f"{found} percolating samples, {traces} traces, {bad} failures"
    return bad == 0, detail + (f"; first: {first_bad}" if first_bad else "")


def c9_census(trials: int = 500) -> tuple[bool, str]:
    r, n = 5, 300
    p = 0.5 * C.p_c(r, n)
    s = census_experiment(r, n, p, trials, mix(MASTER, 9))
    note = " after one reseed" if s.reseeded else ""
    return s.within, (f"mean X_1 {s.mean:.4f} +- {s.stderr:.4f}, exact {s.expected:.4f}, "
                      f"z={s.z:.2f}{note}")


def c10_sweep(trials: int = 20) -> tuple[bool, str]:
    r, n = 5, 1000
    grid = tuple(scaled_to_p(r, n, s) for s in (0.5, 1.0, 2.0, 4.0))
    res = percolation_sweep(ExperimentConfig(r, n, grid, trials, mix(MASTER, 10)))
    fr = [row.fraction for row in res.rows]
    ok = res.monotone_per_trial() and all(a <= b for a, b in zip(fr, fr[1:])) and fr[-1] >= fr[0]
    return ok, "fractions " + " ".join(f"{x:.2f}" for x in fr)


def golden(name: str) -> bytes:
    return resources.files("krbootstrap").joinpath("fixtures", name).read_bytes()


def c11_render() -> tuple[bool, str]:
    spec = HeatmapSpec()
    g = sample_gnp(150, 1.5 * C.p_c(5, 150), mix(MASTER, 11))
    a = render_heatmap(closure(g, 5), spec)
    b = render_heatmap(closure(sample_gnp(150, 1.5 * C.p_c(5, 150), mix(MASTER, 11)), 5), spec)
    img = read_ppm(a)
    ok = a == b and symmetric(img) and color_stop_check(img, spec)
    ok &= render_heatmap(closure(Graph.empty(8), 5)) == golden("edgeless8.ppm")
    ok &= render_heatmap(closure(Graph.complete(8), 5)) == golden("complete8.ppm")
    return ok, "deterministic bytes, symmetric, on-gradient, golden edgeless/complete match"


def c12_expansion(trials: int = 20) -> tuple[bool, str]:
    r, n = 5, 2000
    gb = 2 ** (1 / 3) * C.gamma(r)
    s = edge_expansion_experiment(r, n, gb, trials, mix(MASTER, 12))
    ok = all(x >= 1.0 for x in s.ratios) and s.mean >= 1.0
    return ok, f"ratio {s.mean:.4f} (95% CI {s.ci95[0]:.4f}..{s.ci95[1]:.4f}) vs rho {s.rho:.4f}; {s.caveat}"


CRITERIA: dict[int, tuple[str, Callable[[], tuple[bool, str]]]] = {
    1: ("closure oracle equivalence", c1_closure_oracle),
    2: ("TWG enumeration vs formula", c2_enumeration),
    3: ("TWG structural identities", c3_structure),
    4: ("Fuss-Catalan identities", c4_fuss_catalan),
    5: ("threshold constants", c5_constants),
    6: ("K_r-tree stability", c6_kr_tree_stability),
    7: ("comparison/expansion/spread suites", c7_overlays),
    8: ("witness/decomposition invariants", c8_witness),
    9: ("census expectation", c9_census),
    10: ("monotone coupled sweep", c10_sweep),
    11: ("render determinism", c11_render),
    12: ("edge-expansion diagnostic", c12_expansion),
}


def run_criterion(number: int) -> CriterionResult:
    name, fn = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except (AssertionError, ValueError, RuntimeError) as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CriterionResult(number, name, ok, detail, time.perf_counter() - t0)


def run_all(only: list[int] | None = None, echo: Callable[[str], None] | None = print) -> list[CriterionResult]:
    out = []
    for k in only or sorted(CRITERIA):
        res = run_criterion(k)
        if echo:
            echo(res.line())
        out.append(res)
    return out

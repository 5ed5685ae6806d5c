"""Command line: ``python -m krbootstrap <subcommand> ...``.

Exit codes: 0 success, 1 usage or input error, 2 assertion or oracle
failure, 3 resource refusal.  Every run writes its resolved configuration
and the package version to stderr before doing any work.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Sequence

from . import constants as C
from .closure import closure
from .graph import Graph, GraphError, ResourceError, format_edge_list, read_edge_list, sample_gnp
from .twg import CapExceeded

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_RESOURCE = 0, 1, 2, 3


def package_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _pair(text: str) -> tuple[int, int]:
    try:
        u, v = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'u,v', got {text!r}") from None
    return (u, v) if u < v else (v, u)


def _ints(text: str) -> list[int]:
    if not text.strip():
        return []
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated integer list, got {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated number list, got {text!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="edge-list file ('n m' then m lines 'u v'); otherwise sample G(n, p)")
    p.add_argument("--n", type=int, help="vertex count for a sampled graph")
    p.add_argument("--p", type=float, help="edge probability for a sampled graph")
    p.add_argument("--r", type=int, default=5, help="clique size r (default 5)")


def _load_graph(args) -> Graph:
    if args.input:
        return read_edge_list(args.input)
    if args.n is None or args.p is None:
        raise UsageError("give --input FILE or both --n and --p")
    return sample_gnp(args.n, args.p, args.seed)


# -- subcommands -------------------------------------------------------------

def cmd_close(args) -> int:
    from .render import format_edge_times
    res = closure(_load_graph(args), args.r)
    _emit(format_edge_times(res, args.all_pairs), args.out)
    return EXIT_OK


def cmd_percolate(args) -> int:
    g = _load_graph(args)
    res = closure(g, args.r, record_copies=False)
    print(json.dumps({"n": g.n, "initial_edges": g.edge_count, "added": res.num_added,
                      "rounds": res.num_rounds, "percolates": res.percolates()}))
    if args.save_graph:
        Path(args.save_graph).write_text(format_edge_list(g))
    return EXIT_OK


def cmd_witness(args) -> int:
    from .twg import is_twg
    from .witness import extract_rea, run_wga
    res = closure(_load_graph(args), args.r)
    if res.label(*args.edge) < 0:
        raise UsageError(f"edge {args.edge} is not in the closure")
    tr = extract_rea(run_wga(res), args.edge, check=args.r >= 5)
    lines = [json.dumps(rec) for rec in tr.records()]
    if args.summary:
        m = tr.metrics().as_dict()
        m["is_twg"] = is_twg(tr.witness, args.edge, args.r)
        lines.append(json.dumps({"summary": m}))
    _emit("\n".join(lines) + ("\n" if lines else ""), args.out)
    return EXIT_OK


def cmd_count(args) -> int:
    from .twg import balanced_twg_count, twg_count_formula
    value = balanced_twg_count(args.r, args.k) if args.balanced else twg_count_formula(args.r, args.k)
    print(value)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    from .twg import enumerate_twgs
    graphs = enumerate_twgs(args.r, args.k, cap=args.cap)
    text = "".join(" ".join(f"{u}-{v}" for u, v in es) + "\n" for es in graphs)
    _emit(text, args.out)
    return EXIT_OK


def cmd_constants(args) -> int:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tc = C.ThresholdConstants.of(args.r)
    table: dict[str, object] = {
        "r": args.r,
        "lambda": str(tc.lam),
        "lambda_float": float(tc.lam),
        "d": tc.d,
        "alpha_d": str(tc.alpha),
        "alpha_d_float": float(tc.alpha),
        "beta_d": tc.beta,
        "gamma": tc.gamma,
        "gamma_residual": C.gamma_residual(args.r),
    }
    if args.n is not None:
        table["n"] = args.n
        table["p_c"] = tc.p_c(args.n)
        if args.r >= 5:
            table["droplet_scale_at_p_c"] = tc.droplet_scale(args.n, tc.p_c(args.n))
    if args.gamma_bar is not None:
        abar = C.alpha_bar(args.r, args.gamma_bar)
        table["gamma_bar"] = args.gamma_bar
        table["alpha_bar"] = abar
        table["rho"] = C.rho(args.r, abar)
    if args.json:
        print(json.dumps(table))
    else:
        w = max(len(k) for k in table)
        for k, v in table.items():
            print(f"{k:<{w}}  {v:.12g}" if isinstance(v, float) else f"{k:<{w}}  {v}")
    return EXIT_OK


def _read_tree(path: str):
    from .krtree import parse_kr_tree
    return parse_kr_tree(Path(path).read_text())


def cmd_bp(args) -> int:
    from .krtree import expansion_bound_check, replay_check, rstar_bp
    t = _read_tree(args.tree)
    trace = rstar_bp(t, args.seeds)
    for line in trace.log_lines():
        print(line)
    size, bound, holds = expansion_bound_check(t, args.seeds)
    print(f"infected {len(trace.infected)}: {' '.join(map(str, sorted(trace.infected)))}")
    print("histogram " + " ".join(f"t_{k}={c}" for k, c in trace.histogram.items()))
    print(f"expansion |I_*| = {size} <= {bound}: {holds}")
    bad = replay_check(t, trace)
    for msg in bad:
        print(f"replay: {msg}", file=sys.stderr)
    return EXIT_CHECK if bad or not holds else EXIT_OK


def cmd_compare(args) -> int:
    from .krtree import check_comparison, expansion_bound_check, random_overlay, rstar_bp
    if args.tree:
        if not args.input:
            raise UsageError("--tree needs --input GRAPH for the overlay")
        pairs = [(_read_tree(args.tree), read_edge_list(args.input))]
    else:
        from .rng import SplitMix64, mix
        pairs = []
        for i in range(args.random):
            rng = SplitMix64(mix(args.seed, i))
            pairs.append(random_overlay(args.r, 1 + rng.randbelow(args.max_order), rng.randbelow(5),
                                        rng.randbelow(25), 0.3 + 0.6 * rng.random(), rng.next_u64()))
    failures = 0
    for i, (t, g) in enumerate(pairs):
        rep = check_comparison(t, g)
        size, bound, holds = expansion_bound_check(t, rep.seeds)
        x = len(rep.seeds)
        ratio = f"{len(rep.spread) / x:.3f}" if x else "n/a"
        if not rep.holds or not holds:
            failures += 1
            for msg in rep.violations[:5]:
                print(f"instance {i}: {msg}", file=sys.stderr)
        if args.tree or args.verbose:
            print(f"instance {i}: |S|={x} |I_*|={len(rstar_bp(t, rep.seeds).infected)} bound={bound} "
                  f"added={rep.added} |E_*|={len(rep.spread)} |E_*|/|S|={ratio} "
                  f"{'ok' if rep.holds and holds else 'FAIL'}")
    print(f"{len(pairs)} overlays, {failures} failures")
    return EXIT_CHECK if failures else EXIT_OK


def cmd_sweep(args) -> int:
    from .experiments import ExperimentConfig, percolation_sweep, scaled_to_p
    if (args.grid is None) == (args.scaled is None):
        raise UsageError("give exactly one of --grid (p values) or --scaled (gamma n p^lambda values)")
    grid = args.grid if args.grid is not None else [scaled_to_p(args.r, args.n, s) for s in args.scaled]
    cfg = ExperimentConfig(args.r, args.n, tuple(grid), args.trials, args.seed, args.threads or 1,
                           args.out, not args.uncoupled)
    res = percolation_sweep(cfg)
    if args.out is None:
        sys.stdout.write(res.csv_text)
    if args.json_summary:
        print(json.dumps({"rows": [row.__dict__ for row in res.rows],
                          "monotone_per_trial": res.monotone_per_trial() if cfg.coupled else None}))
    if cfg.coupled and not res.monotone_per_trial():
        print("coupled sweep is not monotone in p", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_expansion(args) -> int:
    from .experiments import edge_expansion_experiment
    gb = args.gamma_bar if args.gamma_bar is not None else args.gamma_factor * C.gamma(args.r)
    s = edge_expansion_experiment(args.r, args.n, gb, args.trials, args.seed, args.threads or 1)
    sys.stdout.write(s.report())
    if args.json_summary:
        print(json.dumps(s.as_dict()))
    return EXIT_OK


def cmd_census(args) -> int:
    from .experiments import census_experiment, twg_census
    if args.input:
        res = twg_census(read_edge_list(args.input), args.r, args.k, args.node_budget)
        print(json.dumps({"counts": res.counts, "truncated": res.truncated, "nodes": res.nodes}))
        return EXIT_OK
    p = args.p if args.p is not None else args.pc_factor * C.p_c(args.r, args.n)
    s = census_experiment(args.r, args.n, p, args.trials, args.seed, args.k, args.node_budget,
                          args.threads or 1)
    sys.stdout.write(s.report())
    if args.json_summary:
        print(json.dumps(s.__dict__))
    return EXIT_OK if s.within else EXIT_CHECK


def cmd_render(args) -> int:
    from .render import EdgeTimes, HeatmapSpec, render_heatmap
    if not args.out:
        raise UsageError("render needs --out FILE")
    et = EdgeTimes.from_csv(args.input)
    render_heatmap(et, HeatmapSpec(size=args.size, order=args.order, downsample=args.downsample), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_all
    results = run_all(args.only)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {', '.join(map(str, failed))}" if failed else ""))
    return EXIT_CHECK if failed else EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed for all randomness (default 0)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (THREADS env overrides)")
    common.add_argument("--out", default=None, help="output file (default stdout)")

    top = _Parser(prog="krbootstrap", description="K_r-bootstrap percolation toolkit")
    top.add_argument("--version", action="version", version=f"%(prog)s {package_version()}")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, fn, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=fn)
        return p

    p = add("close", cmd_close, "run the K_r-dynamics; CSV u,v,round")
    _graph_args(p)
    p.add_argument("--all-pairs", action="store_true", help="also list never-added pairs with round -1")

    p = add("percolate", cmd_percolate, "does the closure of the graph become complete")
    _graph_args(p)
    p.add_argument("--save-graph", help="write the (sampled) input graph as an edge list")

    p = add("witness", cmd_witness, "red edge algorithm trace for one edge, as JSON lines")
    _graph_args(p)
    p.add_argument("--edge", type=_pair, required=True, help="target pair 'u,v'")
    p.add_argument("--summary", action="store_true", help="append a summary record with the final metrics")

    p = add("count", cmd_count, "exact number t(k) of labelled k-TWGs")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--balanced", action="store_true", help="count balanced TWGs b(k) instead")

    p = add("enumerate", cmd_enumerate, "list every labelled k-TWG for the edge 0-1, one per line")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--cap", type=int, default=10**7, help="refuse beyond this many graphs")

    p = add("constants", cmd_constants, "threshold constants lambda, alpha_d, beta_d, gamma, p_c, rho")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, help="also print p_c(n) and the droplet scale at p_c")
    p.add_argument("--gamma-bar", type=float, help="also print rho for this gamma_bar > gamma")
    p.add_argument("--json", action="store_true", help="machine-readable output")

    p = add("bp", cmd_bp, "(r-2)*-bootstrap percolation on a K_r-tree file")
    p.add_argument("--tree", required=True, help="tree file: 'r t' then t clique lines")
    p.add_argument("--seeds", type=_ints, required=True, help="comma-separated seed vertices")

    p = add("compare", cmd_compare, "comparison, expansion and spread checks on K_r-tree overlays")
    p.add_argument("--tree", help="tree file; needs --input")
    p.add_argument("--input", help="edge-list file of G on the same vertex universe")
    p.add_argument("--random", type=int, default=100, help="number of random overlays when no --tree")
    p.add_argument("--r", type=int, default=5)
    p.add_argument("--max-order", type=int, default=20, help="largest tree order for random overlays")
    p.add_argument("--verbose", action="store_true", help="one line per random overlay")

    p = add("sweep", cmd_sweep, "percolation fraction over a p grid (coupled by default); CSV")
    p.add_argument("--r", type=int, default=5)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=_floats, help="comma-separated p values")
    p.add_argument("--scaled", type=_floats, help="comma-separated gamma n p^lambda values")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--uncoupled", action="store_true", help="independent graphs per grid point")
    p.add_argument("--json-summary", action="store_true")

    p = add("expansion", cmd_expansion, "|E(closure)| / (p C(n,2)) next to rho (asymptotic diagnostic)")
    p.add_argument("--r", type=int, default=5)
    p.add_argument("--n", type=int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gamma-bar", type=float)
    g.add_argument("--gamma-factor", type=float, default=2 ** (1 / 3), help="gamma_bar / gamma (default 2^(1/3))")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--json-summary", action="store_true")

    p = add("census", cmd_census, "TWG census: X_k in one graph, or sample mean vs exact expectation")
    p.add_argument("--input", help="count X_0..X_k in this edge-list graph")
    p.add_argument("--r", type=int, default=5)
    p.add_argument("--n", type=int, default=300)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--p", type=float)
    g.add_argument("--pc-factor", type=float, default=0.5, help="p / p_c(n) (default 0.5)")
    p.add_argument("--k", type=int, default=1, help="order (0, 1 or 2)")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--node-budget", type=int, default=10**6)
    p.add_argument("--json-summary", action="store_true")

    p = add("render", cmd_render, "edge-time heatmap (binary PPM) from a close CSV")
    p.add_argument("--input", required=True, help="CSV written by 'close'")
    p.add_argument("--order", choices=("retro", "id", "degree"), default="retro")
    p.add_argument("--size", type=int, help="image side in pixels (default n, at most 4000)")
    p.add_argument("--downsample", action="store_true", help="allow a side smaller than n")

    p = add("verify", cmd_verify, "run the acceptance suite; exit 0 iff every criterion passes")
    p.add_argument("--only", type=_ints, help="comma-separated criterion numbers")
    return top


def _resolved(args) -> dict:
    d = {k: v for k, v in vars(args).items() if k != "func"}
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        print(f"# krbootstrap {package_version()} {json.dumps(_resolved(args), sort_keys=True)}",
              file=sys.stderr)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceError, CapExceeded) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except AssertionError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (GraphError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

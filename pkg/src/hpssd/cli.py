"""Command-line front end: generate / run / sweep / report / plot.

Exit codes: 0 success, 1 sweep-level failure, 2 usage or manifest errors
(argparse uses 2 as well), 3 unreadable or empty results data.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import PARAM_RANGES, RunConfig
from .evaluation import build_report, render_tables, write_report
from .harness import (
    SweepManifest,
    execute_run,
    load_manifest,
    read_results,
    result_to_row,
    sample_run_config,
    write_results,
)
from .netgen import generate_population
from .plots import write_plots

PARALLELISM_ENV = "HPSSD_PARALLELISM"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_DATA = 3

# defaults for `generate`: midpoints of the design ranges
_GENERATE_DEFAULTS = {
    "level_p": 0.225,
    "n_cliques": 10_000,
    "mean_degree": 15.0,
    "clique_weight": 0.3,
    "homophily": 0.5,
    "attrition": 0.25,
}


def _default_parallelism() -> int:
    value = os.environ.get(PARALLELISM_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hpssd",
        description="Cliques-and-blocks network simulator and "
        "hybrid snowball sampling evaluation harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate one population and export it")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--n-cliques", type=int, default=_GENERATE_DEFAULTS["n_cliques"])
    gen.add_argument("--level-p", type=float, default=_GENERATE_DEFAULTS["level_p"])
    gen.add_argument("--mean-degree", type=float, default=_GENERATE_DEFAULTS["mean_degree"])
    gen.add_argument("--clique-weight", type=float, default=_GENERATE_DEFAULTS["clique_weight"])
    gen.add_argument("--homophily", type=float, default=_GENERATE_DEFAULTS["homophily"])
    gen.add_argument("--out", required=True, help="output directory")

    run = sub.add_parser("run", help="execute one run and print its result row")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--index", type=int, default=0, help="run index within the seed")
    run.add_argument("--out", help="directory for the result row and forest export")

    sweep = sub.add_parser("sweep", help="execute a Monte Carlo sweep")
    sweep.add_argument("--config", help="manifest JSON (overrides the flags below)")
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--runs", type=int, help="number of runs (default from --scale)")
    sweep.add_argument("--scale", choices=("desk", "paper"), default="desk",
                       help="desk = 500 runs, paper = 8000 runs")
    sweep.add_argument("--parallelism", type=int, default=None)
    sweep.add_argument("--out", default="sweep_out", help="output directory")
    sweep.add_argument("--plot", action="store_true", help="also render SVG figures")

    rep = sub.add_parser("report", help="recompute the report from a results CSV")
    rep.add_argument("results", help="path to results.csv")
    rep.add_argument("--out", help="output directory (default: beside the results)")
    rep.add_argument("--plot", action="store_true")

    plot = sub.add_parser("plot", help="render SVG figures from a results CSV")
    plot.add_argument("results", help="path to results.csv")
    plot.add_argument("--out", help="output directory (default: beside the results)")

    return parser


def _echo_params(config: RunConfig) -> str:
    parts = [f"{name}={getattr(config, name)!r}" for name in PARAM_RANGES]
    return " ".join(parts)


def cmd_generate(args) -> int:
    config = RunConfig(
        run_id=0,
        master_seed=args.seed,
        level_p=args.level_p,
        n_cliques=args.n_cliques,
        mean_degree=args.mean_degree,
        clique_weight=args.clique_weight,
        homophily=args.homophily,
        attrition=0.0,
    )
    from .harness import STREAM_POPULATION, substream

    try:
        os.makedirs(args.out, exist_ok=True)
        population = generate_population(config, substream(args.seed, 0, STREAM_POPULATION))
        population.export_nodes(
            os.path.join(args.out, "nodes.csv"),
            comment=f"seed={args.seed} {_echo_params(config)}",
        )
        population.export_edges(os.path.join(args.out, "edges.tsv"))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    def fmt(value):
        return "undefined" if value is None else f"{value:.4f}"

    print(
        f"nodes={population.n_nodes} edges={population.n_edges} "
        f"mean_degree={population.mean_degree:.3f} quota={population.quota:.4f} "
        f"phi_y={fmt(population.phi_y)} phi_k={fmt(population.phi_k)}"
    )
    return EXIT_OK


def cmd_run(args) -> int:
    config = sample_run_config(args.seed, args.index)
    result, forests = execute_run(config, keep_forests=True)
    print(json.dumps(result_to_row(result), indent=2))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_results(os.path.join(args.out, "result.csv"), [result])
        with open(os.path.join(args.out, "forests.csv"), "w", encoding="utf-8") as fh:
            fh.write("scenario,node_id,stage,recruiter_id\n")
            for tag in sorted(forests):
                forests[tag].export_csv(fh)
    return EXIT_OK


def sweep_manifest_from_args(args) -> SweepManifest:
    """Manifest from CLI flags; --config wins over the individual flags."""
    if args.config:
        return load_manifest(args.config)
    runs = args.runs if args.runs is not None else (8000 if args.scale == "paper" else 500)
    parallelism = args.parallelism if args.parallelism is not None else _default_parallelism()
    manifest = SweepManifest(
        master_seed=args.seed,
        n_runs=runs,
        parallelism=parallelism,
        out_dir=args.out,
    )
    manifest.validate()
    return manifest


def cmd_sweep(args) -> int:
    try:
        manifest = sweep_manifest_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    def progress(done, total):
        print(f"\rrun {done}/{total}", end="", file=sys.stderr, flush=True)

    from .harness import execute_sweep

    try:
        outcome = execute_sweep(manifest, progress=progress)
    except (OSError, ValueError) as exc:
        print(f"\nerror: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print("", file=sys.stderr)

    if outcome.report is not None:
        print(render_tables(outcome.report), end="")
    print(
        f"executed={outcome.executed} skipped={outcome.skipped} failed={outcome.failed}",
        file=sys.stderr,
    )
    if args.plot and outcome.results:
        write_plots(outcome.results, outcome.report, os.path.join(manifest.out_dir, "plots"))
    if outcome.failed and not outcome.results:
        return EXIT_FAILURE
    return EXIT_OK


def _load_results_or_exit(path):
    try:
        results = read_results(path)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None
    if not results:
        print(f"error: {path}: no runs in results file", file=sys.stderr)
        return None
    return results


def cmd_report(args) -> int:
    results = _load_results_or_exit(args.results)
    if results is None:
        return EXIT_DATA
    out_dir = args.out or os.path.dirname(os.path.abspath(args.results))
    report = build_report(results)
    write_report(report, out_dir)
    print(render_tables(report), end="")
    if args.plot:
        write_plots(results, report, os.path.join(out_dir, "plots"))
    return EXIT_OK


def cmd_plot(args) -> int:
    results = _load_results_or_exit(args.results)
    if results is None:
        return EXIT_DATA
    out_dir = args.out or os.path.join(os.path.dirname(os.path.abspath(args.results)), "plots")
    report = build_report(results)
    paths = write_plots(results, report, out_dir)
    for path in paths:
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "generate": cmd_generate,
        "run": cmd_run,
        "sweep": cmd_sweep,
        "report": cmd_report,
        "plot": cmd_plot,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())

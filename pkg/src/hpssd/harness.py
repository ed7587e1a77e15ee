"""Monte Carlo harness: draw run configurations, execute runs, persist sweeps.

Reproducibility scheme: every random draw of run ``i`` under master seed ``s``
comes from a counter-based substream keyed by (s, i, stream_id), so results
depend only on the manifest, never on worker scheduling. Stream ids separate
the config draw, population generation, attrition, the benchmark draw, and
the four scenarios, which keeps the scenarios from perturbing each other.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import PARAM_RANGES, RunConfig
from .evaluation import EvaluationReport, RunResult, ScenarioOutcome, build_report, write_report
from .netgen import generate_population
from .recruitment import (
    SCENARIO_TAGS,
    assign_attrition,
    draw_golden_sample,
    estimate_mean,
    run_scenario,
)

logger = logging.getLogger(__name__)

STREAM_CONFIG = 0
STREAM_POPULATION = 1
STREAM_ATTRITION = 2
STREAM_BENCHMARK = 3
STREAM_SCENARIO = 4  # + scenario position

RESULTS_NAME = "results.csv"
MANIFEST_NAME = "manifest.json"
ERRORS_NAME = "errors.log"

_CONFIG_COLUMNS = (
    "run_id", "master_seed", "level_p", "n_cliques", "mean_degree",
    "clique_weight", "homophily", "attrition",
)
_RESULT_COLUMNS = ("n_nodes", "y_true", "phi_y", "phi_k", "yhat_bench")
_SCENARIO_COLUMNS = tuple(
    f"{field}_{tag}" for tag in SCENARIO_TAGS for field in ("y0", "yhat", "n", "n0")
)
CSV_COLUMNS = _CONFIG_COLUMNS + _RESULT_COLUMNS + _SCENARIO_COLUMNS


def substream(master_seed, run_index, stream) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(run_index, stream))
    return np.random.default_rng(seq)


def sample_run_config(master_seed, run_index) -> RunConfig:
    """Draw the six run parameters uniformly from their design ranges."""
    rng = substream(master_seed, run_index, STREAM_CONFIG)
    lo, hi = PARAM_RANGES["n_cliques"]
    return RunConfig(
        run_id=run_index,
        master_seed=master_seed,
        level_p=float(rng.uniform(*PARAM_RANGES["level_p"])),
        n_cliques=int(rng.integers(lo, hi + 1)),
        mean_degree=float(rng.uniform(*PARAM_RANGES["mean_degree"])),
        clique_weight=float(rng.uniform(*PARAM_RANGES["clique_weight"])),
        homophily=float(rng.uniform(*PARAM_RANGES["homophily"])),
        attrition=float(rng.uniform(*PARAM_RANGES["attrition"])),
    )


def execute_run(config: RunConfig, keep_forests=False):
    """One full run: population, attrition, benchmark, all four scenarios.

    Returns a RunResult, or (RunResult, {tag: forest}) with ``keep_forests``.
    """
    seed, index = config.master_seed, config.run_id
    population = generate_population(config, substream(seed, index, STREAM_POPULATION))
    assign_attrition(population, config.attrition, substream(seed, index, STREAM_ATTRITION))
    golden = draw_golden_sample(population, substream(seed, index, STREAM_BENCHMARK))

    outcomes = {}
    forests = {}
    for k, tag in enumerate(SCENARIO_TAGS):
        sample, forest = run_scenario(
            population, golden, tag, substream(seed, index, STREAM_SCENARIO + k)
        )
        outcomes[tag] = ScenarioOutcome(
            seed_estimate=estimate_mean(population, sample.seeds),
            estimate=estimate_mean(population, sample.members),
            size=len(sample.members),
            seed_count=len(sample.seeds),
        )
        if keep_forests:
            forests[tag] = forest

    result = RunResult(
        config=config,
        n_nodes=population.n_nodes,
        y_true=population.quota,
        phi_y=population.phi_y,
        phi_k=population.phi_k,
        yhat_bench=estimate_mean(population, golden.members),
        scenarios=outcomes,
    )
    return (result, forests) if keep_forests else result


def result_to_row(result: RunResult) -> dict:
    cfg = result.config

    def fmt(value):
        if value is None:
            return ""
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        return repr(float(value))

    row = {
        "run_id": str(cfg.run_id),
        "master_seed": str(cfg.master_seed),
        "level_p": fmt(cfg.level_p),
        "n_cliques": str(cfg.n_cliques),
        "mean_degree": fmt(cfg.mean_degree),
        "clique_weight": fmt(cfg.clique_weight),
        "homophily": fmt(cfg.homophily),
        "attrition": fmt(cfg.attrition),
        "n_nodes": str(result.n_nodes),
        "y_true": fmt(result.y_true),
        "phi_y": fmt(result.phi_y),
        "phi_k": fmt(result.phi_k),
        "yhat_bench": fmt(result.yhat_bench),
    }
    for tag in SCENARIO_TAGS:
        outcome = result.scenarios[tag]
        row[f"y0_{tag}"] = fmt(outcome.seed_estimate)
        row[f"yhat_{tag}"] = fmt(outcome.estimate)
        row[f"n_{tag}"] = str(outcome.size)
        row[f"n0_{tag}"] = str(outcome.seed_count)
    return row


def row_to_result(row: dict) -> RunResult:
    def opt(name):
        return None if row[name] == "" else float(row[name])

    config = RunConfig(
        run_id=int(row["run_id"]),
        master_seed=int(row["master_seed"]),
        level_p=float(row["level_p"]),
        n_cliques=int(row["n_cliques"]),
        mean_degree=float(row["mean_degree"]),
        clique_weight=float(row["clique_weight"]),
        homophily=float(row["homophily"]),
        attrition=float(row["attrition"]),
    )
    scenarios = {
        tag: ScenarioOutcome(
            seed_estimate=opt(f"y0_{tag}"),
            estimate=opt(f"yhat_{tag}"),
            size=int(row[f"n_{tag}"]),
            seed_count=int(row[f"n0_{tag}"]),
        )
        for tag in SCENARIO_TAGS
    }
    return RunResult(
        config=config,
        n_nodes=int(row["n_nodes"]),
        y_true=float(row["y_true"]),
        phi_y=opt("phi_y"),
        phi_k=opt("phi_k"),
        yhat_bench=opt("yhat_bench"),
        scenarios=scenarios,
    )


def write_results(path, results) -> None:
    """Write the results table sorted by run id (stable byte-for-byte)."""
    ordered = sorted(results, key=lambda res: res.config.run_id)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for result in ordered:
            writer.writerow(result_to_row(result))


def read_results(path):
    """Parse a results CSV back into RunResult objects."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(CSV_COLUMNS) - set(reader.fieldnames):
            raise ValueError(f"{path}: not a results file (bad header)")
        return [row_to_result(row) for row in reader]


@dataclass(frozen=True)
class SweepManifest:
    master_seed: int
    n_runs: int
    parallelism: int
    out_dir: str

    def validate(self) -> None:
        if self.n_runs < 1:
            raise ValueError(f"n_runs must be >= 1, got {self.n_runs}")
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism}")

    def to_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "n_runs": self.n_runs,
            "parallelism": self.parallelism,
            "out_dir": self.out_dir,
            "engine": f"hpssd {__version__}",
        }


def load_manifest(path) -> SweepManifest:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        manifest = SweepManifest(
            master_seed=int(raw["master_seed"]),
            n_runs=int(raw["n_runs"]),
            parallelism=int(raw.get("parallelism", 1)),
            out_dir=str(raw.get("out_dir", os.path.dirname(path) or ".")),
        )
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ValueError(f"malformed manifest {path}: {exc}") from exc
    manifest.validate()
    return manifest


def _run_one(args):
    master_seed, run_index = args
    try:
        config = sample_run_config(master_seed, run_index)
        return "ok", run_index, execute_run(config)
    except Exception as exc:  # crash isolation: one bad run must not kill the sweep
        logger.exception("run %d failed", run_index)
        return "error", run_index, f"{type(exc).__name__}: {exc}"


@dataclass
class SweepOutcome:
    results: list
    report: EvaluationReport | None
    executed: int
    skipped: int
    failed: int


def execute_sweep(manifest: SweepManifest, progress=None) -> SweepOutcome:
    """Run all pending runs of the manifest and persist everything.

    Writes results.csv (sorted by run id), a manifest echo, report.json plus
    table CSVs, and an errors.log for failed runs. Runs already present in
    an existing results.csv are skipped, so an interrupted sweep resumes.
    """
    manifest.validate()
    out_dir = manifest.out_dir
    os.makedirs(out_dir, exist_ok=True)
    results_path = os.path.join(out_dir, RESULTS_NAME)

    results = []
    if os.path.exists(results_path):
        results = [
            res for res in read_results(results_path)
            if res.config.master_seed == manifest.master_seed
            and res.config.run_id < manifest.n_runs
        ]
    done = {res.config.run_id for res in results}
    pending = [i for i in range(manifest.n_runs) if i not in done]

    with open(os.path.join(out_dir, MANIFEST_NAME), "w", encoding="utf-8") as fh:
        json.dump(manifest.to_dict(), fh, indent=2)
        fh.write("\n")

    failures = []
    completed = 0

    def consume(outcome):
        nonlocal completed
        kind, run_index, payload = outcome
        if kind == "ok":
            results.append(payload)
        else:
            failures.append((run_index, payload))
        completed += 1
        if progress is not None:
            progress(completed, len(pending))

    # Stream partial results to disk as runs finish so an interrupted sweep
    # can resume; the final sorted rewrite makes the file scheduling-proof.
    need_header = not os.path.exists(results_path) or os.path.getsize(results_path) == 0
    partial = open(results_path, "a", encoding="utf-8", newline="")
    try:
        writer = csv.DictWriter(partial, fieldnames=CSV_COLUMNS)
        if need_header and pending:
            writer.writeheader()
            partial.flush()

        if manifest.parallelism == 1 or len(pending) <= 1:
            for index in pending:
                outcome = _run_one((manifest.master_seed, index))
                if outcome[0] == "ok":
                    writer.writerow(result_to_row(outcome[2]))
                    partial.flush()
                consume(outcome)
        else:
            with ProcessPoolExecutor(max_workers=manifest.parallelism) as pool:
                futures = [
                    pool.submit(_run_one, (manifest.master_seed, index))
                    for index in pending
                ]
                for future in as_completed(futures):
                    outcome = future.result()
                    if outcome[0] == "ok":
                        writer.writerow(result_to_row(outcome[2]))
                        partial.flush()
                    consume(outcome)
    finally:
        partial.close()

    write_results(results_path, results)

    if failures:
        with open(os.path.join(out_dir, ERRORS_NAME), "a", encoding="utf-8") as fh:
            for run_index, message in sorted(failures):
                fh.write(f"run {run_index}: {message}\n")

    report = None
    if results:
        report = build_report(sorted(results, key=lambda res: res.config.run_id))
        write_report(report, out_dir)

    return SweepOutcome(
        results=sorted(results, key=lambda res: res.config.run_id),
        report=report,
        executed=len(pending) - len(failures),
        skipped=len(done),
        failed=len(failures),
    )

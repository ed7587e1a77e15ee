"""Shared fixtures and builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from hpssd.config import RunConfig
from hpssd.evaluation import RunResult, ScenarioOutcome
from hpssd.netgen import Population, generate_population
from hpssd.recruitment import SCENARIO_TAGS


def make_config(**overrides) -> RunConfig:
    base = dict(
        run_id=0,
        master_seed=0,
        level_p=0.225,
        n_cliques=8000,
        mean_degree=14.0,
        clique_weight=0.3,
        homophily=0.5,
        attrition=0.2,
    )
    base.update(overrides)
    return RunConfig(**base)


def toy_population(edges, y, e=None, r=None, clique_id=None) -> Population:
    """Hand-built population for oracle-grade control in tests."""
    y = np.asarray(y, dtype=np.int8)
    n = len(y)
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(edges):
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        edges = np.stack([lo, hi], axis=1)
    degree = np.bincount(edges.ravel(), minlength=n) if len(edges) else np.zeros(n, dtype=np.int64)
    e = np.full(n, 0.5) if e is None else np.asarray(e, dtype=np.float64)
    r = np.zeros(n) if r is None else np.asarray(r, dtype=np.float64)
    clique_id = np.arange(n) if clique_id is None else np.asarray(clique_id)
    return Population(
        clique_id=clique_id,
        alpha=e.copy(),
        beta=e.copy(),
        e=e,
        y=y,
        r=r,
        edges=edges,
        edge_is_clique=np.zeros(len(edges), dtype=bool),
        degree=degree,
        phi_y=None,
        phi_k=None,
        config=make_config(attrition=0.0),
    )


def synth_result(run_id, y_true, bench, per_scenario, homophily=0.5,
                 attrition=0.2, n_nodes=20000) -> RunResult:
    """RunResult with hand-set estimates.

    ``per_scenario`` maps tag -> (seed_estimate, estimate, n, n0); missing
    tags reuse scenario I's values.
    """
    default = per_scenario.get("I", next(iter(per_scenario.values())))
    scenarios = {}
    for tag in SCENARIO_TAGS:
        seed_est, est, n, n0 = per_scenario.get(tag, default)
        scenarios[tag] = ScenarioOutcome(
            seed_estimate=seed_est, estimate=est, size=n, seed_count=n0
        )
    config = make_config(run_id=run_id, homophily=homophily, attrition=attrition)
    return RunResult(
        config=config,
        n_nodes=n_nodes,
        y_true=y_true,
        phi_y=0.02,
        phi_k=0.05,
        yhat_bench=bench,
        scenarios=scenarios,
    )


@pytest.fixture(scope="session")
def pop_mid() -> Population:
    """One mid-size generated population shared by read-only tests."""
    config = make_config()
    rng = np.random.default_rng(np.random.SeedSequence(123, spawn_key=(0, 1)))
    return generate_population(config, rng)

"""Benchmark sampling and the four hybrid recruitment scenarios.

Scenarios differ on two axes: which fraction of the benchmark sample seeds
the snowball (all of it, or a random half) and which law drives the number
of recruits per respondent (Poisson with mean 0.5, or the heavier-tailed
shifted Yule with shape 3 and the same mean). Recruitment is link-traced:
every member of the forest knows its stage and recruiter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import ShiftedYuleParams, sample_shifted_yule
from .netgen import Population

BENCHMARK_BASE_SIZE = 1000
RECRUIT_POISSON_MEAN = 0.5
RECRUIT_YULE_SHAPE = 3.0
MAX_STAGES = 1000  # safety cap; branching is subcritical, never binds

SCENARIO_TAGS = ("I", "II", "III", "IV")


@dataclass(frozen=True)
class ScenarioSpec:
    seed_fraction: float    # share of the benchmark sample used as seeds
    heavy_tailed: bool      # shifted Yule recruits instead of Poisson


SCENARIOS = {
    "I": ScenarioSpec(seed_fraction=1.0, heavy_tailed=False),
    "II": ScenarioSpec(seed_fraction=1.0, heavy_tailed=True),
    "III": ScenarioSpec(seed_fraction=0.5, heavy_tailed=False),
    "IV": ScenarioSpec(seed_fraction=0.5, heavy_tailed=True),
}


@dataclass
class ScenarioSample:
    """Member set of one sampling design on one population."""

    scenario: str
    members: np.ndarray  # node ids, in recruitment order
    seeds: np.ndarray    # subset of members, stage 0


@dataclass
class RecruitmentForest:
    """Link-traced recruitment records: one row per forest member."""

    scenario: str
    node_id: np.ndarray
    stage: np.ndarray
    recruiter: np.ndarray  # -1 for seeds

    def __len__(self) -> int:
        return len(self.node_id)

    def stage_sizes(self) -> np.ndarray:
        if len(self.stage) == 0:
            return np.zeros(0, dtype=np.int64)
        return np.bincount(self.stage)

    def export_csv(self, fh) -> None:
        """Append rows "scenario,node_id,stage,recruiter_id" (no header)."""
        for node, stage, rec in zip(self.node_id, self.stage, self.recruiter):
            rec_field = "" if rec < 0 else str(rec)
            fh.write(f"{self.scenario},{node},{stage},{rec_field}\n")


def assign_attrition(population: Population, attrition, rng):
    """Per-node non-response probabilities.

    p = attrition + (e - mean(e)) / 10 * 0.25, clamped to [0, 1]; the node
    value is a Binomial(100, p) count over 100. Higher-risk nodes end up
    slightly more likely to drop out.
    """
    if not 0.0 <= attrition <= 1.0:
        raise ValueError(f"attrition must be in [0, 1], got {attrition}")
    e = population.e
    p = attrition + (e - e.mean()) / 10.0 * 0.25
    np.clip(p, 0.0, 1.0, out=p)
    r = rng.binomial(100, p) / 100.0
    population.r = r
    return r


def golden_draw_size(attrition) -> int:
    """Benchmark draw count: floor(1000 / (1 - attrition))."""
    return math.floor(BENCHMARK_BASE_SIZE / (1.0 - attrition))


def draw_golden_sample(population: Population, rng) -> ScenarioSample:
    """The cost benchmark: a uniform draw thinned by individual attrition."""
    config = population.config
    attrition = config.attrition if config is not None else 0.0
    size = golden_draw_size(attrition)
    if size > population.n_nodes:
        raise ValueError(
            f"benchmark draw of {size} exceeds population size {population.n_nodes}"
        )
    if np.isnan(population.r).any():
        raise ValueError("attrition must be assigned before sampling")
    drawn = rng.choice(population.n_nodes, size=size, replace=False)
    responds = rng.random(size) < 1.0 - population.r[drawn]
    members = drawn[responds]
    return ScenarioSample(scenario="benchmark", members=members, seeds=members)


def _draw_recruit_counts(spec: ScenarioSpec, count, rng):
    if spec.heavy_tailed:
        return sample_shifted_yule(ShiftedYuleParams(RECRUIT_YULE_SHAPE), rng, size=count)
    return rng.poisson(RECRUIT_POISSON_MEAN, size=count)


def run_scenario(population: Population, golden: ScenarioSample, scenario, rng):
    """Execute one hybrid design from the shared benchmark sample.

    Stage 0 is the seed set; at every stage each member draws its recruit
    count (capped at its degree) and picks that many new nodes uniformly
    among its neighbours outside the forest; each pick joins the next stage
    with probability 1 - r. Members are processed in the order they entered
    their stage, so a node never appears twice and the first recruiter to
    reach it wins. Non-responders stay recruitable by somebody else later.
    Iterates until a stage comes up empty.

    Returns (sample, forest).
    """
    spec = SCENARIOS[scenario]
    base = golden.members
    if spec.seed_fraction >= 1.0:
        seeds = base.copy()
    else:
        half = int(len(base) * spec.seed_fraction)
        seeds = rng.choice(base, size=half, replace=False)

    if len(seeds) == 0:
        empty = np.zeros(0, dtype=np.int64)
        sample = ScenarioSample(scenario=scenario, members=empty, seeds=empty)
        forest = RecruitmentForest(scenario, empty, empty.copy(), empty.copy())
        return sample, forest

    indptr, indices = population.adjacency()
    degree = population.degree
    r = population.r
    in_forest = np.zeros(population.n_nodes, dtype=bool)
    in_forest[seeds] = True

    nodes = [seeds]
    stages = [np.zeros(len(seeds), dtype=np.int64)]
    recruiters = [np.full(len(seeds), -1, dtype=np.int64)]

    current = seeds
    stage = 0
    while len(current) > 0 and stage < MAX_STAGES:
        wanted = _draw_recruit_counts(spec, len(current), rng)
        wanted = np.minimum(wanted, degree[current])
        next_nodes = []
        next_recruiters = []
        for i, m in zip(current, wanted):
            if m == 0:
                continue
            nbrs = indices[indptr[i]: indptr[i + 1]]
            eligible = nbrs[~in_forest[nbrs]]
            if m >= len(eligible):
                picks = eligible
            else:
                picks = eligible[rng.choice(len(eligible), size=int(m), replace=False)]
            for j in picks:
                if rng.random() < 1.0 - r[j]:
                    in_forest[j] = True
                    next_nodes.append(j)
                    next_recruiters.append(i)
        stage += 1
        current = np.array(next_nodes, dtype=np.int64)
        if len(current) > 0:
            nodes.append(current)
            stages.append(np.full(len(current), stage, dtype=np.int64))
            recruiters.append(np.array(next_recruiters, dtype=np.int64))

    node_id = np.concatenate(nodes)
    forest = RecruitmentForest(
        scenario=scenario,
        node_id=node_id,
        stage=np.concatenate(stages),
        recruiter=np.concatenate(recruiters),
    )
    sample = ScenarioSample(scenario=scenario, members=node_id, seeds=seeds)
    return sample, forest


def estimate_mean(population: Population, members) -> float | None:
    """Unadjusted sample mean of the outcome; None for an empty sample."""
    if len(members) == 0:
        return None
    return float(population.y[members].mean())

"""Run configuration: the six free parameters of one simulated population.

Every run of the simulator is fully described by a RunConfig. The sampling
ranges in PARAM_RANGES are the design domain of the Monte Carlo experiment;
the generator functions themselves accept values outside these ranges (useful
for toy networks), validation against the ranges happens only when configs
are drawn by the harness.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

# (low, high) sampling bounds per parameter; n_cliques is integer-uniform,
# the rest are continuous-uniform.
PARAM_RANGES = {
    "level_p": (0.15, 0.30),
    "n_cliques": (5_000, 15_000),
    "mean_degree": (5.0, 25.0),
    "clique_weight": (0.1, 0.5),
    "homophily": (0.2, 0.8),
    "attrition": (0.0, 0.5),
}


@dataclass(frozen=True)
class RunConfig:
    """All hyperparameters of one run plus its reproducibility key.

    The pair (master_seed, run_id) identifies the random substreams of the
    run: two configs with the same pair replay bit-identically.
    """

    run_id: int
    master_seed: int
    level_p: float        # centrality of the risk-level distribution
    n_cliques: int        # number of cliques drawn
    mean_degree: float    # target mean degree of the grafted graph
    clique_weight: float  # weight of the clique coefficient in the risk mix
    homophily: float      # exponent applied to the mixing matrix
    attrition: float      # universal non-response probability

    def in_design_ranges(self) -> bool:
        for name, (lo, hi) in PARAM_RANGES.items():
            value = getattr(self, name)
            if not lo <= value <= hi:
                return False
        return True

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

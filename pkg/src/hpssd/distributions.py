"""Random samplers for the stochastic primitives of the simulation.

All samplers take a numpy Generator and are pure functions of (parameters,
generator state): replaying a seed replays the stream. Scalar calls return
Python numbers; passing ``size`` returns an ndarray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# The ten admissible risk-level values, index k -> 0.1 * k + 0.05. Kept as
# literals so equality checks against sampled levels are exact.
BLOCK_LEVELS = (0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95)
_BLOCK_LEVEL_ARRAY = np.array(BLOCK_LEVELS)

CLIQUE_SIZE_MEAN = 1.2  # Poisson rate of (household size - 1)


@dataclass(frozen=True)
class OverdispersedBinomialParams:
    """Beta-binomial with intra-class correlation parameterisation.

    The mixing Beta has a = p * (1/rho - 1), b = (1 - p) * (1/rho - 1), so
    the count keeps mean trials * p while the variance is inflated by the
    factor (1 + (trials - 1) * rho) relative to a plain binomial.
    """

    trials: int = 9
    p: float = 0.275
    rho: float = 0.3

    def validate(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must be in (0, 1), got {self.rho}")


@dataclass(frozen=True)
class ShiftedYuleParams:
    """Shifted Yule distribution on {0, 1, ...}; mean is lam/(lam-1) - 1."""

    lam: float = 3.0

    def validate(self) -> None:
        if self.lam <= 2.0:
            raise ValueError(f"lam must be > 2 for a finite mean, got {self.lam}")


def sample_overdispersed_binomial(params, rng, size=None):
    """Draw counts in {0..trials} from the overdispersed binomial."""
    params.validate()
    if params.p == 0.0:
        return 0 if size is None else np.zeros(size, dtype=np.int64)
    if params.p == 1.0:
        full = params.trials
        return full if size is None else np.full(size, full, dtype=np.int64)
    scale = 1.0 / params.rho - 1.0
    a = params.p * scale
    b = (1.0 - params.p) * scale
    q = rng.beta(a, b, size=size)
    k = rng.binomial(params.trials, q)
    return int(k) if size is None else k


def sample_block_level(p, rng, size=None, rho=0.3):
    """Draw risk-level values from the ten-point grid 0.05 .. 0.95."""
    k = sample_overdispersed_binomial(
        OverdispersedBinomialParams(trials=9, p=p, rho=rho), rng, size=size
    )
    if size is None:
        return BLOCK_LEVELS[k]
    return _BLOCK_LEVEL_ARRAY[k]


def level_index(level):
    """Map level values back to block indices 0..9."""
    return np.rint((np.asarray(level) - 0.05) * 10.0).astype(np.int64)


def yule_pmf(k, lam):
    """Probability of integer k under the shifted Yule law with shape lam.

    Computed as lam * Gamma(lam + 1) * Gamma(k + 1) / Gamma(lam + k + 2)
    through log-gamma, stable for large k.
    """
    if lam <= 2.0:
        raise ValueError(f"lam must be > 2, got {lam}")
    if k < 0:
        raise ValueError("k must be non-negative")
    log_p = (
        math.log(lam)
        + math.lgamma(lam + 1.0)
        + math.lgamma(k + 1.0)
        - math.lgamma(lam + k + 2.0)
    )
    return math.exp(log_p)


# Cumulative tables for inverse-CDF Yule sampling, keyed by shape. Tables are
# extended lazily: the mean is small so almost all draws resolve within the
# first few entries. Capped to bound memory for shapes barely above 2, where
# the tail would need astronomically long tables; clamping there affects
# events rarer than ~1e-9.
_YULE_CDF_CACHE: dict[float, np.ndarray] = {}
_YULE_TABLE_CAP = 1 << 21


def _yule_cdf_table(lam, upto):
    table = _YULE_CDF_CACHE.get(lam)
    if table is not None and (table[-1] >= upto or len(table) >= _YULE_TABLE_CAP):
        return table
    size = 64 if table is None else len(table)
    while True:
        size = min(size * 2, _YULE_TABLE_CAP)
        ks = np.arange(size, dtype=np.float64)
        # pmf via the recurrence f(0) = lam/(lam+1), f(k+1)/f(k) = (k+1)/(lam+k+2)
        ratios = np.concatenate(([lam / (lam + 1.0)], (ks[:-1] + 1.0) / (lam + ks[:-1] + 2.0)))
        cdf = np.cumsum(np.cumprod(ratios))
        if cdf[-1] >= upto or size >= _YULE_TABLE_CAP:
            _YULE_CDF_CACHE[lam] = cdf
            return cdf


def sample_shifted_yule(params, rng, size=None):
    """Draw from the shifted Yule law by inverse-CDF lookup."""
    params.validate()
    u = rng.random(size=size)
    max_u = float(u) if size is None else float(np.max(u, initial=0.0))
    cdf = _yule_cdf_table(params.lam, max_u)
    k = np.searchsorted(cdf, u, side="right")
    k = np.minimum(k, len(cdf) - 1)
    return int(k) if size is None else k.astype(np.int64)


def sample_clique_size(rng, size=None):
    """Household size: 1 + Poisson(1.2), always >= 1."""
    k = rng.poisson(CLIQUE_SIZE_MEAN, size=size) + 1
    return int(k) if size is None else k


def sample_poisson(lam, rng, size=None):
    """Plain Poisson draw; lam must be non-negative."""
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    k = rng.poisson(lam, size=size)
    return int(k) if size is None else k

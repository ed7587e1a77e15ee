"""Block mixing matrix: linking propensities between the ten risk levels.

The base matrix is built column by column from Normal densities evaluated at
the integer points 1..10 with mean and standard deviation both equal to the
column index, then symmetrized from the upper triangle and normalized to a
grand sum of one. Homophily is tuned by raising the entries elementwise to an
exponent and renormalizing; this preserves symmetry, the dominance of each
diagonal entry over the rest of its row, and the strictly decreasing diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

N_BLOCKS = 10


@dataclass(frozen=True)
class MixingMatrix:
    entries: np.ndarray  # 10x10, symmetric, grand sum 1
    exponent: float      # homophily exponent already applied

    def __post_init__(self):
        self.entries.setflags(write=False)

    def to_csv(self, path) -> None:
        """Dump all entries at full double precision for cross-validation."""
        with open(path, "w", encoding="utf-8") as fh:
            for row in self.entries:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _raw_base() -> np.ndarray:
    """Pre-normalization matrix: column x holds Normal(x, x) densities at 1..10."""
    points = np.arange(1, N_BLOCKS + 1, dtype=np.float64)
    raw = np.empty((N_BLOCKS, N_BLOCKS))
    for col in range(N_BLOCKS):
        mu = sigma = float(points[col])
        raw[:, col] = np.exp(-0.5 * ((points - mu) / sigma) ** 2) / (
            sigma * math.sqrt(2.0 * math.pi)
        )
    # keep the upper triangle, mirror it onto the lower
    upper = np.triu(raw)
    return upper + np.triu(raw, k=1).T


def build_base_matrix() -> MixingMatrix:
    """The normalized baseline matrix (exponent 1)."""
    raw = _raw_base()
    return MixingMatrix(entries=raw / raw.sum(), exponent=1.0)


def apply_homophily(base: MixingMatrix, exponent: float) -> MixingMatrix:
    """Raise entries elementwise to ``exponent`` and renormalize.

    Elementwise, not a matrix power: a matrix power can break the dominance
    and monotone-diagonal properties that the elementwise transform provably
    preserves.
    """
    if exponent <= 0.0:
        raise ValueError(f"exponent must be > 0, got {exponent}")
    powered = base.entries ** exponent
    return MixingMatrix(entries=powered / powered.sum(), exponent=exponent)


_BASE: MixingMatrix | None = None


def mixing_matrix(exponent: float) -> MixingMatrix:
    """Convenience builder: base matrix with the given homophily exponent."""
    global _BASE
    if _BASE is None:
        _BASE = build_base_matrix()
    return apply_homophily(_BASE, exponent)

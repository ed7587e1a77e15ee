"""Cliques-and-blocks population generator.

A population is a union of fully connected cliques (households sharing one
risk coefficient) and edges drawn from a Poisson blockmodel over ten risk
levels. Each node carries a clique coefficient alpha, an individual level
beta, a mixed risk score e, a binary outcome y drawn from e, and later an
individual attrition probability r. Node data is stored columnar (one numpy
array per attribute); edges are an (M, 2) array with the lower id first.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .distributions import (
    BLOCK_LEVELS,
    level_index,
    sample_block_level,
    sample_clique_size,
)
from .mixing import MixingMatrix, mixing_matrix

logger = logging.getLogger(__name__)


@dataclass
class Population:
    clique_id: np.ndarray      # int, per node
    alpha: np.ndarray          # clique coefficient, per node
    beta: np.ndarray           # individual level, per node
    e: np.ndarray              # risk score alpha*w + beta*(1-w)
    y: np.ndarray              # binary outcome
    r: np.ndarray              # attrition probability; NaN until assigned
    edges: np.ndarray          # (M, 2), u < v, deduplicated
    edge_is_clique: np.ndarray  # bool per edge: clique-edge vs block-edge
    degree: np.ndarray         # int, per node
    phi_y: float | None        # edge assortativity of y
    phi_k: float | None        # edge assortativity of degree
    config: RunConfig | None = None
    warnings: list = field(default_factory=list)
    _adjacency: tuple | None = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.clique_id)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def mean_degree(self) -> float:
        return 2.0 * self.n_edges / self.n_nodes

    @property
    def quota(self) -> float:
        """Population share of positive outcomes (the estimand)."""
        return float(self.y.mean())

    def adjacency(self):
        """CSR-style neighbour lists: (indptr, indices), neighbours sorted."""
        if self._adjacency is None:
            n = self.n_nodes
            src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
            dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
            order = np.lexsort((dst, src))
            indices = dst[order]
            counts = np.bincount(src, minlength=n)
            indptr = np.concatenate([[0], np.cumsum(counts)])
            self._adjacency = (indptr, indices)
        return self._adjacency

    def export_nodes(self, path, comment=None) -> None:
        """Node table CSV: id,clique,alpha,beta,e,y,r,degree."""
        with open(path, "w", encoding="utf-8") as fh:
            if comment:
                fh.write(f"# {comment}\n")
            fh.write("id,clique,alpha,beta,e,y,r,degree\n")
            for i in range(self.n_nodes):
                r = self.r[i]
                fh.write(
                    f"{i},{self.clique_id[i]},{self.alpha[i]!r},{self.beta[i]!r},"
                    f"{self.e[i]!r},{self.y[i]},{'' if np.isnan(r) else repr(float(r))},"
                    f"{self.degree[i]}\n"
                )

    def export_edges(self, path) -> None:
        """Edge list, one line per edge: id1<TAB>id2<TAB>provenance."""
        with open(path, "w", encoding="utf-8") as fh:
            for (u, v), is_clique in zip(self.edges, self.edge_is_clique):
                fh.write(f"{u}\t{v}\t{'clique' if is_clique else 'block'}\n")


def generate_cliques(n_cliques, level_p, rng):
    """Draw cliques with i.i.d. sizes and one shared alpha per clique.

    Returns (clique_id, alpha, clique_edges): per-node arrays plus the edges
    of all within-clique pairs. Node ids are contiguous per clique.
    """
    sizes = sample_clique_size(rng, size=n_cliques)
    alphas = sample_block_level(level_p, rng, size=n_cliques)
    clique_id = np.repeat(np.arange(n_cliques), sizes)
    alpha = np.repeat(alphas, sizes)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])

    edge_parts = []
    for size in np.unique(sizes):
        if size < 2:
            continue
        pair_offsets = np.array(list(itertools.combinations(range(size), 2)))
        clique_starts = starts[sizes == size]
        block = clique_starts[:, None, None] + pair_offsets[None, :, :]
        edge_parts.append(block.reshape(-1, 2))
    if edge_parts:
        clique_edges = np.concatenate(edge_parts)
    else:
        clique_edges = np.empty((0, 2), dtype=np.int64)
    return clique_id, alpha, clique_edges


def assign_blocks(n_nodes, level_p, rng):
    """Individual levels, independent of clique membership."""
    return sample_block_level(level_p, rng, size=n_nodes)


def sample_block_edges(beta, matrix: MixingMatrix, target_mean_degree, clique_mean_degree, rng):
    """Linear-time Poisson blockmodel edges on top of the clique graph.

    The total count is Poisson with mean (target - clique mean degree) * N/2;
    each edge picks an ordered block pair with probability proportional to
    propensity times the two block cardinalities, then one uniform node per
    block. Self-loops and duplicate pairs are dropped afterwards (against
    other block edges here; against clique edges during grafting).

    Returns (edges, warning) where warning is a message when the target is
    already met by the cliques alone.
    """
    n = len(beta)
    lam = (target_mean_degree - clique_mean_degree) * n / 2.0
    if lam <= 0.0:
        warning = (
            f"target mean degree {target_mean_degree:.3f} not above the "
            f"clique-induced mean {clique_mean_degree:.3f}; no block edges drawn"
        )
        logger.warning(warning)
        return np.empty((0, 2), dtype=np.int64), warning

    m = rng.poisson(lam)
    b_idx = level_index(beta)
    counts = np.bincount(b_idx, minlength=len(BLOCK_LEVELS))
    weights = matrix.entries * counts[:, None] * counts[None, :]
    total = weights.sum()
    if total <= 0.0 or m == 0:
        return np.empty((0, 2), dtype=np.int64), None

    pair = rng.choice(weights.size, size=m, p=(weights / total).ravel())
    bi, bj = np.divmod(pair, len(BLOCK_LEVELS))
    members = np.argsort(b_idx, kind="stable")
    offsets = np.concatenate([[0], np.cumsum(counts)])
    u = members[offsets[bi] + (rng.random(m) * counts[bi]).astype(np.int64)]
    v = members[offsets[bj] + (rng.random(m) * counts[bj]).astype(np.int64)]

    keep = u != v
    lo = np.minimum(u[keep], v[keep])
    hi = np.maximum(u[keep], v[keep])
    edges = np.unique(lo * np.int64(n) + hi)
    return np.stack([edges // n, edges % n], axis=1), None


def graft(clique_edges, block_edges, n_nodes):
    """Union of the two edge sets without duplicates, plus node degrees."""
    n = np.int64(n_nodes)
    clique_codes = clique_edges[:, 0] * n + clique_edges[:, 1]
    block_codes = np.unique(block_edges[:, 0] * n + block_edges[:, 1])
    block_codes = block_codes[~np.isin(block_codes, clique_codes)]
    codes = np.concatenate([clique_codes, block_codes])
    edges = np.stack([codes // n, codes % n], axis=1)
    is_clique = np.zeros(len(codes), dtype=bool)
    is_clique[: len(clique_codes)] = True
    degree = np.bincount(edges.ravel(), minlength=n_nodes)
    return edges, is_clique, degree


def compute_risk_scores(alpha, beta, clique_weight):
    """Mix the clique and individual coefficients: e = alpha*w + beta*(1-w)."""
    if not 0.0 <= clique_weight <= 1.0:
        raise ValueError(f"clique_weight must be in [0, 1], got {clique_weight}")
    return alpha * clique_weight + beta * (1.0 - clique_weight)


def assign_outcomes(e, rng):
    """Bernoulli outcomes from the risk scores."""
    return (rng.random(len(e)) < e).astype(np.int8)


def edge_assortativity(population: Population, attribute):
    """Pearson correlation of an attribute across edge endpoints.

    ``attribute`` is "y", "degree", or a per-node value array. Each
    undirected edge contributes both orderings, which makes the statistic
    symmetric; for a binary attribute it reduces to the phi coefficient.
    Returns None when either endpoint margin has zero variance.
    """
    if isinstance(attribute, str):
        values = {"y": population.y, "degree": population.degree}[attribute]
    else:
        values = np.asarray(attribute)
    edges = population.edges
    if len(edges) < 2:
        return None
    a = values[edges[:, 0]].astype(np.float64)
    b = values[edges[:, 1]].astype(np.float64)
    x = np.concatenate([a, b])
    z = np.concatenate([b, a])
    xc = x - x.mean()
    zc = z - z.mean()
    var = float(xc @ xc)  # symmetrized, so both margins share this variance
    if var == 0.0:
        return None
    return float((xc @ zc) / var)


def generate_population(config: RunConfig, rng) -> Population:
    """One full population for the given configuration."""
    matrix = mixing_matrix(config.homophily)
    clique_id, alpha, clique_edges = generate_cliques(
        config.n_cliques, config.level_p, rng
    )
    n = len(clique_id)
    beta = assign_blocks(n, config.level_p, rng)
    clique_mean_degree = 2.0 * len(clique_edges) / n
    block_edges, warning = sample_block_edges(
        beta, matrix, config.mean_degree, clique_mean_degree, rng
    )
    edges, edge_is_clique, degree = graft(clique_edges, block_edges, n)
    e = compute_risk_scores(alpha, beta, config.clique_weight)
    y = assign_outcomes(e, rng)

    pop = Population(
        clique_id=clique_id,
        alpha=alpha,
        beta=beta,
        e=e,
        y=y,
        r=np.full(n, np.nan),
        edges=edges,
        edge_is_clique=edge_is_clique,
        degree=degree,
        phi_y=None,
        phi_k=None,
        config=config,
        warnings=[warning] if warning else [],
    )
    pop.phi_y = edge_assortativity(pop, "y")
    pop.phi_k = edge_assortativity(pop, "degree")
    return pop

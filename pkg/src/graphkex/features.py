"""Node properties of the text graph and per-document feature vectors.

Six properties feed the classifier: strength (weighted degree), eigenvector
centrality, a damped weight-normalized recursive rank, its position-biased
variant, coreness, and the topological clustering coefficient. All of them
are local or spectral; nothing here needs all-pairs shortest paths, which
keeps feature extraction cheap on large documents.

Raw values are range-normalized to [0, 1] per document before training so
document length cannot leak into the feature scale.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .graph import TextGraph

logger = logging.getLogger(__name__)

FEATURE_NAMES = (
    "strength",
    "eigenvector",
    "pagerank",
    "positionrank",
    "coreness",
    "clustering",
)


@dataclass(frozen=True)
class RankConfig:
    """Shared settings for the iterative rank computations.

    ``damping`` is the random-jump complement of the recursive rank,
    ``alpha`` the same for the position-biased variant; both default to the
    conventional 0.85.
    """

    damping: float = 0.85
    alpha: float = 0.85
    tolerance: float = 1e-6
    max_iterations: int = 200

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ValueError("damping must be in (0, 1)")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class FeatureVector:
    strength: float
    eigenvector: float
    pagerank: float
    positionrank: float
    coreness: float
    clustering: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.strength, self.eigenvector, self.pagerank,
             self.positionrank, self.coreness, self.clustering],
            dtype=np.float64,
        )

    @classmethod
    def from_array(cls, values) -> "FeatureVector":
        return cls(*(float(v) for v in values))


@dataclass
class RankResult:
    """Scores of an iterative computation plus its convergence status."""

    scores: dict[str, float]
    converged: bool
    iterations: int


def _as_dict(g: TextGraph, values: np.ndarray) -> dict[str, float]:
    return {w: float(v) for w, v in zip(g.words, values)}


def _strength_array(g: TextGraph) -> np.ndarray:
    return g.weights.sum(axis=1).astype(np.float64)


def strength(g: TextGraph) -> dict[str, float]:
    """Weighted degree: sum of incident edge weights per node."""
    return _as_dict(g, _strength_array(g))


def _eigenvector_array(g: TextGraph, cfg: RankConfig) -> tuple[np.ndarray, bool, int]:
    n = g.order
    if n == 0:
        return np.zeros(0), True, 0
    W = g.weights.astype(np.float64)
    v = np.full(n, 1.0 / math.sqrt(n))
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        # Iterating on I + W keeps the same dominant eigenvector but breaks
        # the +/- eigenvalue tie of bipartite graphs, where iterating on W
        # alone oscillates forever.
        nxt = v + W @ v
        nxt /= np.linalg.norm(nxt)
        delta = np.abs(nxt - v).max()
        v = nxt
        if delta < cfg.tolerance:
            converged = True
            break
    return v, converged, iterations


def eigenvector_centrality(g: TextGraph, config: RankConfig | None = None) -> RankResult:
    """Dominant-eigenvector importance on the weighted adjacency.

    Power iteration from the uniform vector, renormalized to unit Euclidean
    length each step; stops when the max-norm change drops below the
    tolerance. A graph that fails to converge within max_iterations returns
    its last iterate with ``converged=False``.
    """
    cfg = config or RankConfig()
    v, converged, iterations = _eigenvector_array(g, cfg)
    if not converged:
        logger.warning("eigenvector centrality did not converge in %d iterations", iterations)
    return RankResult(scores=_as_dict(g, v), converged=converged, iterations=iterations)


def _weight_normalized_matrix(g: TextGraph) -> np.ndarray:
    """M[i, j] = w_ij / strength(j); column j spreads node j's score."""
    W = g.weights.astype(np.float64)
    s = W.sum(axis=0)
    M = np.zeros_like(W)
    np.divide(W, s[np.newaxis, :], out=M, where=s[np.newaxis, :] > 0)
    return M


def _damped_rank(M: np.ndarray, bias: np.ndarray, start: np.ndarray,
                 damping: float, cfg: RankConfig) -> tuple[np.ndarray, bool, int]:
    scores = start.copy()
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        nxt = (1.0 - damping) * bias + damping * (M @ scores)
        delta = np.abs(nxt - scores).max()
        scores = nxt
        if delta < cfg.tolerance:
            converged = True
            break
    return scores, converged, iterations


def pagerank(g: TextGraph, config: RankConfig | None = None) -> RankResult:
    """Damped recursive rank with neighbor weights normalized by strength.

    Solves scores = (1 - d) + d * M @ scores by iteration from all ones.
    This is the unnormalized text-graph variant: scores need not sum to 1
    and the uniform fixed point of a regular graph is exactly 1.
    """
    cfg = config or RankConfig()
    n = g.order
    if n == 0:
        return RankResult({}, True, 0)
    scores, converged, iterations = _damped_rank(
        _weight_normalized_matrix(g), np.ones(n), np.ones(n), cfg.damping, cfg,
    )
    if not converged:
        logger.warning("rank iteration did not converge in %d iterations", iterations)
    return RankResult(scores=_as_dict(g, scores), converged=converged, iterations=iterations)


def _position_bias(g: TextGraph) -> np.ndarray:
    inv = np.array([sum(1.0 / p for p in ps) for ps in g.positions], dtype=np.float64)
    return inv / inv.sum()


def position_rank(g: TextGraph, config: RankConfig | None = None) -> RankResult:
    """Position-biased variant of the damped rank.

    Each node's jump weight is the sum of reciprocals of its occurrence
    positions, normalized over the graph, so words appearing early in the
    document are favored. Iteration starts from the bias vector itself.
    """
    cfg = config or RankConfig()
    if g.order == 0:
        return RankResult({}, True, 0)
    bias = _position_bias(g)
    scores, converged, iterations = _damped_rank(
        _weight_normalized_matrix(g), bias, bias, cfg.alpha, cfg,
    )
    if not converged:
        logger.warning("position rank did not converge in %d iterations", iterations)
    return RankResult(scores=_as_dict(g, scores), converged=converged, iterations=iterations)


def _coreness_array(g: TextGraph) -> np.ndarray:
    """Peel minimum-degree nodes; the running peel level is the core number."""
    n = g.order
    adj = g.weights > 0
    deg = adj.sum(axis=1).astype(np.int64)
    alive = np.ones(n, dtype=bool)
    core = np.zeros(n, dtype=np.int64)
    level = 0
    for _ in range(n):
        remaining = np.flatnonzero(alive)
        u = remaining[np.argmin(deg[remaining])]
        level = max(level, int(deg[u]))
        core[u] = level
        alive[u] = False
        nbrs = np.flatnonzero(adj[u] & alive)
        deg[nbrs] -= 1
    return core


def coreness(g: TextGraph) -> dict[str, int]:
    """Core number per node on the unweighted degree structure."""
    return {w: int(c) for w, c in zip(g.words, _coreness_array(g))}


def _clustering_array(g: TextGraph) -> np.ndarray:
    adj = g.weights > 0
    out = np.zeros(g.order, dtype=np.float64)
    for i in range(g.order):
        nbrs = np.flatnonzero(adj[i])
        d = len(nbrs)
        if d <= 1:
            continue
        links = int(adj[np.ix_(nbrs, nbrs)].sum()) // 2
        out[i] = 2.0 * links / (d * (d - 1))
    return out


def clustering_coefficient(g: TextGraph) -> dict[str, float]:
    """Edge density among each node's neighbors, ignoring weights.

    Nodes with fewer than two neighbors get 0. Low values mark words that
    glue otherwise unrelated contexts together.
    """
    return _as_dict(g, _clustering_array(g))


def _min_max(column: np.ndarray) -> np.ndarray:
    lo, hi = column.min(), column.max()
    if hi == lo:
        return np.zeros_like(column)
    return (column - lo) / (hi - lo)


def build_feature_records(g: TextGraph, config: RankConfig | None = None) -> list[tuple[str, FeatureVector]]:
    """Assemble the six-feature vector per node, range-normalized in [0, 1].

    A feature that is constant across the document normalizes to all zeros;
    a single-node graph cannot be normalized at all and yields one all-zero
    record with a warning.
    """
    cfg = config or RankConfig()
    if g.order == 0:
        return []
    if g.order == 1:
        logger.warning("single-node graph: emitting an all-zero feature record")
        return [(g.words[0], FeatureVector(0.0, 0.0, 0.0, 0.0, 0.0, 0.0))]

    eig, eig_ok, _ = _eigenvector_array(g, cfg)
    pr, pr_ok, _ = _damped_rank(
        _weight_normalized_matrix(g), np.ones(g.order), np.ones(g.order), cfg.damping, cfg,
    )
    bias = _position_bias(g)
    posr, posr_ok, _ = _damped_rank(_weight_normalized_matrix(g), bias, bias, cfg.alpha, cfg)
    if not (eig_ok and pr_ok and posr_ok):
        logger.warning("one or more rank iterations did not converge; using last iterates")

    raw = np.column_stack([
        _strength_array(g),
        eig,
        pr,
        posr,
        _coreness_array(g).astype(np.float64),
        _clustering_array(g),
    ])
    normalized = np.column_stack([_min_max(raw[:, k]) for k in range(raw.shape[1])])
    return [(w, FeatureVector.from_array(normalized[i])) for i, w in enumerate(g.words)]

"""Query strategies: per-instance informativeness scores and batch selection.

Five strategies are exposed under their config tokens:

  pe  prediction entropy      maximize  -sum_j p_j ln p_j
  bt  breaking ties           minimize  p(best) - p(second best)
  lc  least confidence        maximize  1 - p(best)
  ca  contrastive             maximize  mean KL(neighbor dist || own dist)
                                        over the m nearest unlabeled neighbors
  rs  random sampling         uniform draw, no model involved

Natural log throughout; rankings do not depend on the base. All top-k
selection breaks ties by ascending instance id.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .features import SparseVector, nearest_neighbors

STRATEGY_NAMES = ("pe", "bt", "lc", "ca", "rs")

# Which inputs each model-driven strategy needs in its QueryContext.
CONTEXT_NEEDS = {
    "pe": frozenset({"distributions"}),
    "bt": frozenset({"distributions"}),
    "lc": frozenset({"distributions"}),
    "ca": frozenset({"distributions", "embeddings"}),
    "rs": frozenset(),
}


@dataclass(frozen=True)
class CAConfig:
    """Contrastive strategy knobs; the neighbor metric is recorded so other
    geometries stay pluggable, but only cosine is implemented."""

    num_neighbors: int = 10
    epsilon: float = 1e-10
    metric: str = "cosine"

    def __post_init__(self) -> None:
        if self.num_neighbors < 1:
            raise ValueError("num_neighbors must be at least 1")
        if not 0.0 < self.epsilon < 1e-3:
            raise ValueError("epsilon must be in (0, 1e-3)")
        if self.metric != "cosine":
            raise ValueError(f"unsupported neighbor metric {self.metric!r}")


@dataclass
class QueryContext:
    """Model outputs for the unlabeled pool, keyed by instance id."""

    unlabeled: tuple[int, ...]
    distributions: Mapping[int, np.ndarray] | None = None
    embeddings: Mapping[int, SparseVector] | None = None
    rng_seed: int = 0


def entropy_score(distribution) -> float:
    p = np.asarray(distribution, dtype=float)
    nonzero = p[p > 0.0]
    return float(-(nonzero * np.log(nonzero)).sum())


def margin_score(distribution) -> float:
    p = np.asarray(distribution, dtype=float)
    if p.size < 2:
        raise ValueError("margin needs at least two classes")
    top_two = np.partition(p, p.size - 2)[-2:]
    return float(top_two[1] - top_two[0])


def least_confidence_score(distribution) -> float:
    p = np.asarray(distribution, dtype=float)
    return float(1.0 - p.max())


def kl_divergence(p, q, epsilon: float = 1e-10) -> float:
    """KL(p || q) with both arguments clamped below at epsilon.

    Clamping (rather than mixing) keeps one-hot distributions finite. The raw
    clamped sum can dip to about -epsilon for near-identical distributions;
    true KL is nonnegative, so such artifacts are floored at zero.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    pc = np.maximum(p, epsilon)
    qc = np.maximum(q, epsilon)
    return max(float(np.sum(pc * (np.log(pc) - np.log(qc)))), 0.0)


def contrastive_scores(ctx: QueryContext, config: CAConfig | None = None) -> dict[int, float]:
    """Mean KL divergence from each instance's m nearest neighbors.

    Neighbors are searched among the unlabeled pool itself, by cosine over
    the context embeddings; the neighbor's distribution is the first KL
    argument. High scores mark instances that disagree with their vicinity.
    """
    config = config or CAConfig()
    # Ascending-id order so positional neighbor ties resolve to the lowest id.
    ids = sorted(ctx.unlabeled)
    m = config.num_neighbors
    if len(ids) < m + 1:
        raise ValueError(f"contrastive scoring needs more than {m} unlabeled instances")
    if ctx.distributions is None or ctx.embeddings is None:
        raise ValueError("contrastive scoring needs distributions and embeddings")
    if set(ctx.distributions) != set(ids) or set(ctx.embeddings) != set(ids):
        raise ValueError("context must be keyed by exactly the unlabeled ids")

    probs = np.stack([np.asarray(ctx.distributions[i], dtype=float) for i in ids])
    clamped = np.maximum(probs, config.epsilon)
    log_clamped = np.log(clamped)
    neighbor_lists = nearest_neighbors([ctx.embeddings[i] for i in ids], m)

    scores: dict[int, float] = {}
    for row, instance_id in enumerate(ids):
        neighbors = neighbor_lists[row]
        divergences = (
            clamped[neighbors] * (log_clamped[neighbors] - log_clamped[row])
        ).sum(axis=1)
        scores[instance_id] = float(np.maximum(divergences, 0.0).mean())
    return scores


def select_batch(scores: Mapping[int, float], k: int, direction: str) -> list[int]:
    """Top-k ids under the given direction, best first, ties by ascending id."""
    if direction not in ("maximize", "minimize"):
        raise ValueError(f"unknown direction {direction!r}")
    if k > len(scores):
        raise ValueError(f"k={k} exceeds {len(scores)} scored instances")
    sign = -1.0 if direction == "maximize" else 1.0
    ranked = sorted(scores, key=lambda i: (sign * scores[i], i))
    return ranked[:k]


def random_batch(unlabeled: Sequence[int], k: int, seed: int) -> list[int]:
    """k distinct ids drawn uniformly without replacement; seeded."""
    if k > len(unlabeled):
        raise ValueError(f"k={k} exceeds pool of {len(unlabeled)}")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(unlabeled), size=k, replace=False)
    return [unlabeled[i] for i in chosen]


def compute_scores(
    name: str, ctx: QueryContext, ca_config: CAConfig | None = None
) -> tuple[dict[int, float], str]:
    """Score the whole unlabeled pool under one strategy.

    Returns (scores keyed by instance id, selection direction). Random
    sampling has no scores; use random_batch directly.
    """
    if name == "rs":
        raise ValueError("random sampling is not score-based; use random_batch")
    if name not in STRATEGY_NAMES:
        raise ValueError(f"unknown strategy {name!r}")
    if name == "ca":
        return contrastive_scores(ctx, ca_config), "maximize"
    if ctx.distributions is None:
        raise ValueError(f"strategy {name!r} needs distributions")
    if set(ctx.distributions) != set(ctx.unlabeled):
        raise ValueError("context must be keyed by exactly the unlabeled ids")
    scorer, direction = {
        "pe": (entropy_score, "maximize"),
        "bt": (margin_score, "minimize"),
        "lc": (least_confidence_score, "maximize"),
    }[name]
    return {i: scorer(ctx.distributions[i]) for i in ctx.unlabeled}, direction

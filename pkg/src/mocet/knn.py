"""Exact nearest-neighbor probability estimation over a reference corpus.

A step's success probability is the mean historical outcome of its k nearest
reference items in embedding space. Search is exact (full distance scan);
results are guaranteed identical to a brute-force distance sort, with ties
broken by ascending item id so queries are deterministic across runs and
platforms.

Scoring queries do not exclude corpus items that happen to share the query's
embedding; callers needing exclusion (e.g. leave-one-out validation) pass the
ids to drop via ``exclude_ids``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .corpus import EmbeddingVector, ProtocolStep, ReferenceCorpus

DEFAULT_K = 20
METRICS = ("euclidean", "cosine")


@dataclass(frozen=True)
class StepProbabilityEstimate:
    """Resolved success probability for one step.

    ``k_used`` and ``neighbor_ids`` are populated only when ``source`` is
    ``"knn"``; category and fixed sources carry no neighborhood.
    """

    step_id: str
    p: float
    source: str
    k_used: int | None = None
    neighbor_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"step {self.step_id!r}: probability {self.p} outside [0, 1]")
        if self.source == "knn" and len(self.neighbor_ids) != self.k_used:
            raise ValueError(
                f"step {self.step_id!r}: {len(self.neighbor_ids)} neighbors listed "
                f"but k_used={self.k_used}"
            )


class NeighborIndex:
    """Immutable exact-search index over a non-empty corpus.

    Safe for concurrent queries; rebuild to change the corpus or metric.
    """

    def __init__(self, corpus: ReferenceCorpus, metric: str = "euclidean"):
        if len(corpus) == 0:
            raise ValueError("cannot build an index over an empty corpus")
        if metric not in METRICS:
            raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
        self.corpus = corpus
        self.metric = metric
        self._matrix = np.array([item.embedding.values for item in corpus], dtype=np.float64)
        self._ids = np.array([item.id for item in corpus])
        self._outcome_by_id = {item.id: item.outcome for item in corpus}
        self._row_norms = np.sqrt(np.einsum("ij,ij->i", self._matrix, self._matrix))

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def dim(self) -> int:
        return self._matrix.shape[1]

    def outcome(self, item_id: str) -> int:
        return self._outcome_by_id[item_id]


def build_index(corpus: ReferenceCorpus, metric: str = "euclidean") -> NeighborIndex:
    """Build an exact k-NN index; raises on an empty corpus or unknown metric."""
    return NeighborIndex(corpus, metric)


def _distances(index: NeighborIndex, query: np.ndarray) -> np.ndarray:
    """Distance from the query to every corpus row under the index metric.

    For euclidean the returned values are squared distances: ordering is the
    same and exact ties stay exact without the sqrt rounding.
    """
    if index.metric == "euclidean":
        diff = index._matrix - query
        return np.einsum("ij,ij->i", diff, diff)
    qnorm = float(np.sqrt(query @ query))
    if qnorm == 0.0:
        return np.ones(len(index))
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = (index._matrix @ query) / (index._row_norms * qnorm)
    sims = np.where(index._row_norms == 0.0, 0.0, sims)
    return np.maximum(1.0 - sims, 0.0)


def nearest_neighbors(
    index: NeighborIndex,
    query: EmbeddingVector,
    k: int,
    exclude_ids: Iterable[str] = (),
) -> list[tuple[str, float]]:
    """k nearest corpus items to the query, as (id, distance) pairs.

    Pairs are sorted by ascending distance, ties by ascending id. Items whose
    id is in ``exclude_ids`` are not eligible.
    """
    if query.dim != index.dim:
        raise ValueError(f"query dimension {query.dim} does not match corpus dimension {index.dim}")
    q = np.asarray(query.values, dtype=np.float64)
    dists = _distances(index, q)
    ids = index._ids
    excluded = set(exclude_ids)
    if excluded:
        keep = ~np.isin(ids, sorted(excluded))
        dists, ids = dists[keep], ids[keep]
    if not 1 <= k <= len(ids):
        raise ValueError(f"k={k} must lie in [1, {len(ids)}] (eligible corpus size)")
    order = np.lexsort((ids, dists))[:k]
    if index.metric == "euclidean":
        return [(str(ids[i]), float(np.sqrt(dists[i]))) for i in order]
    return [(str(ids[i]), float(dists[i])) for i in order]


def neighborhood_probability(
    index: NeighborIndex,
    query: EmbeddingVector,
    k: int,
    exclude_ids: Iterable[str] = (),
) -> tuple[float, tuple[str, ...]]:
    """Mean outcome over the k nearest items, with the neighbor ids used.

    The mean is an integer count divided by k, so it is always an exact
    multiple of 1/k.
    """
    neighbors = nearest_neighbors(index, query, k, exclude_ids)
    ids = tuple(item_id for item_id, _ in neighbors)
    return sum(index.outcome(item_id) for item_id in ids) / k, ids


def estimate_step_probability(
    index: NeighborIndex,
    step: ProtocolStep,
    k: int = DEFAULT_K,
    exclude_ids: Iterable[str] = (),
) -> StepProbabilityEstimate:
    """Estimate a step's success probability from its embedding neighborhood."""
    if step.embedding is None:
        raise ValueError(f"step {step.id!r} carries no embedding")
    p, neighbor_ids = neighborhood_probability(index, step.embedding, k, exclude_ids)
    return StepProbabilityEstimate(
        step_id=step.id, p=p, source="knn", k_used=k, neighbor_ids=neighbor_ids
    )


def estimate_categorical_probability(corpus: ReferenceCorpus, category: str) -> float:
    """Mean outcome over all corpus items labeled with the category."""
    outcomes = [item.outcome for item in corpus if item.category == category]
    if not outcomes:
        raise ValueError(f"unknown category {category!r}: no corpus item carries it")
    return sum(outcomes) / len(outcomes)

"""Corpus-predictiveness validation via leave-one-out neighborhood estimates.

If neighborhood means carry signal, items with outcome 1 should receive
higher leave-one-out predictions than items with outcome 0. The separation
is tested with Mann-Whitney U (primary; no distributional assumption) and
Welch's t alongside, plus the AUC implied by U.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

from .corpus import ReferenceCorpus
from .knn import build_index, neighborhood_probability
from .stats import mann_whitney_u, welch_t


@dataclass(frozen=True)
class LooPrediction:
    """Neighborhood estimate for one item with the item itself excluded by id."""

    item_id: str
    predicted_p: float
    outcome: int


@dataclass(frozen=True)
class SeparationResult:
    """How well predictions separate outcome-1 items from outcome-0 items.

    ``k`` is the neighborhood size that produced the predictions, when known.
    Welch fields are None when either class has fewer than two members.
    """

    k: int | None
    n_correct: int
    n_incorrect: int
    mean_p_correct: float
    mean_p_incorrect: float
    se_correct: float | None
    se_incorrect: float | None
    u_statistic: float
    p_value_u: float
    t_statistic: float | None
    p_value_t: float | None
    auc: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "n_correct": self.n_correct,
            "n_incorrect": self.n_incorrect,
            "mean_p_correct": self.mean_p_correct,
            "mean_p_incorrect": self.mean_p_incorrect,
            "se_correct": self.se_correct,
            "se_incorrect": self.se_incorrect,
            "u_statistic": self.u_statistic,
            "p_value_u": self.p_value_u,
            "t_statistic": self.t_statistic,
            "p_value_t": self.p_value_t,
            "auc": self.auc,
        }


def leave_one_out_predictions(
    corpus: ReferenceCorpus, k: int, metric: str = "euclidean"
) -> list[LooPrediction]:
    """Predict every item's probability from its k nearest other items.

    Exclusion is strictly by id: an item whose embedding duplicates another's
    still leaves its twin eligible.
    """
    if len(corpus) < k + 1:
        raise ValueError(
            f"corpus of {len(corpus)} items cannot support leave-one-out with k={k}"
        )
    index = build_index(corpus, metric)
    predictions = []
    for item in corpus:
        p, _ = neighborhood_probability(index, item.embedding, k, exclude_ids=(item.id,))
        predictions.append(
            LooPrediction(item_id=item.id, predicted_p=p, outcome=item.outcome)
        )
    return predictions


def _mean_and_se(values: Sequence[float]) -> tuple[float, float | None]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, None
    variance = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(variance / n)


def separation_test(
    predictions: Sequence[LooPrediction], k: int | None = None
) -> SeparationResult:
    """Test whether predictions rank outcome-1 items above outcome-0 items."""
    ones = [pred.predicted_p for pred in predictions if pred.outcome == 1]
    zeros = [pred.predicted_p for pred in predictions if pred.outcome == 0]
    if not ones or not zeros:
        raise ValueError("both outcome classes must be present")
    u_result = mann_whitney_u(ones, zeros)
    mean_1, se_1 = _mean_and_se(ones)
    mean_0, se_0 = _mean_and_se(zeros)
    t_statistic = p_value_t = None
    if len(ones) >= 2 and len(zeros) >= 2:
        t_result = welch_t(ones, zeros)
        t_statistic, p_value_t = t_result.t, t_result.p_value
    return SeparationResult(
        k=k,
        n_correct=len(ones),
        n_incorrect=len(zeros),
        mean_p_correct=mean_1,
        mean_p_incorrect=mean_0,
        se_correct=se_1,
        se_incorrect=se_0,
        u_statistic=u_result.u,
        p_value_u=u_result.p_value,
        t_statistic=t_statistic,
        p_value_t=p_value_t,
        auc=u_result.u / (len(ones) * len(zeros)),
    )


def k_sweep(
    corpus: ReferenceCorpus, ks: Sequence[int], metric: str = "euclidean"
) -> list[SeparationResult]:
    """Run the leave-one-out separation test once per neighborhood size."""
    for k in ks:
        if len(corpus) < k + 1:
            raise ValueError(f"k={k} too large for corpus of {len(corpus)} items")
    return [
        separation_test(leave_one_out_predictions(corpus, k, metric), k=k) for k in ks
    ]

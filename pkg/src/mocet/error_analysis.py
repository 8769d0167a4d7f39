"""Error of approximating heterogeneous step probabilities by one weighted mean.

Steps grouped into categories with counts n_k and probabilities p_k have exact
overall success prod(p_k ** n_k). Collapsing them to the weighted mean
p = (1/n) * sum(n_k * p_k) gives the naive estimate p**n; multiplying that by
exp(-(1/(2 p^2)) * sum(n_k * alpha_k^2)), where alpha_k = p_k - p, cancels the
second-order term of the log expansion and leaves a third-order residual.

All products live in log space; exponentiation happens once per report.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Any

from .corpus import CorpusError

# slack allowed when checking that a caller-supplied mean matches the profile
_MEAN_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CategoryProfile:
    """Step counts and success probabilities per category: ((n_k, p_k), ...)."""

    groups: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        groups = tuple((count, float(p)) for count, p in self.groups)
        if not groups:
            raise ValueError("profile must contain at least one group")
        for count, p in groups:
            if type(count) is not int or count < 1:
                raise ValueError(f"group count must be an integer >= 1, got {count!r}")
            if not math.isfinite(p) or not 0.0 < p <= 1.0:
                raise ValueError(f"group probability must lie in (0, 1], got {p}")
        object.__setattr__(self, "groups", groups)

    @property
    def total_steps(self) -> int:
        return sum(count for count, _ in self.groups)


@dataclass(frozen=True)
class ErrorReport:
    """Exact vs approximate overall success, with both relative errors."""

    weighted_mean: float
    deviations: tuple[float, ...]
    exact_e_y: float
    naive_approx: float
    second_order_approx: float
    relative_error_naive: float
    relative_error_corrected: float
    bound_term: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "weighted_mean": self.weighted_mean,
            "deviations": list(self.deviations),
            "exact_e_y": self.exact_e_y,
            "naive_approx": self.naive_approx,
            "second_order_approx": self.second_order_approx,
            "relative_error_naive": self.relative_error_naive,
            "relative_error_corrected": self.relative_error_corrected,
            "bound_term": self.bound_term,
        }


def weighted_mean_probability(profile: CategoryProfile) -> float:
    """Step-count-weighted mean of the group probabilities."""
    if len(profile.groups) == 1:
        # bit-exact for a single category; the general expression may round
        return profile.groups[0][1]
    return sum(count * p for count, p in profile.groups) / profile.total_steps


def deviations(profile: CategoryProfile, p: float) -> tuple[float, ...]:
    """Per-group deviations p_k - p; requires p to be the profile's weighted mean.

    The count-weighted deviations sum to zero by construction of p.
    """
    mean = weighted_mean_probability(profile)
    if abs(p - mean) > _MEAN_TOLERANCE:
        raise ValueError(f"p={p} is not the profile's weighted mean {mean}")
    return tuple(p_k - p for _, p_k in profile.groups)


def approximation_report(profile: CategoryProfile) -> ErrorReport:
    """Compare exact overall success with the naive and corrected approximations."""
    p = weighted_mean_probability(profile)
    alphas = deviations(profile, p)
    n = profile.total_steps
    log_exact = math.fsum(count * math.log(p_k) for count, p_k in profile.groups)
    log_naive = n * math.log(p)
    bound_term = math.fsum(
        count * alpha * alpha for (count, _), alpha in zip(profile.groups, alphas)
    ) / (2.0 * p * p)
    exact = math.exp(log_exact)
    naive = math.exp(log_naive)
    corrected = math.exp(log_naive - bound_term)
    return ErrorReport(
        weighted_mean=p,
        deviations=alphas,
        exact_e_y=exact,
        naive_approx=naive,
        second_order_approx=corrected,
        relative_error_naive=(naive - exact) / exact,
        relative_error_corrected=(corrected - exact) / exact,
        bound_term=bound_term,
    )


def load_profile(source: IO[str]) -> CategoryProfile:
    """Load a profile document: {"groups": [{"n": int, "p": float}, ...]}."""
    try:
        document = json.load(source)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(document, dict) or not isinstance(document.get("groups"), list):
        raise CorpusError("profile must be an object with a 'groups' array")
    groups: list[tuple[int, float]] = []
    for i, raw in enumerate(document["groups"]):
        if not isinstance(raw, dict) or "n" not in raw or "p" not in raw:
            raise CorpusError(f"groups[{i}] must be an object with fields 'n' and 'p'")
        groups.append((raw["n"], raw["p"]))
    try:
        return CategoryProfile(tuple(groups))
    except (TypeError, ValueError) as exc:
        raise CorpusError(f"invalid profile: {exc}") from exc

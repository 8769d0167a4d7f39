"""MOCET scoring: chained Bernoulli success estimates and harm-weighted scores.

A scenario succeeds only if every step succeeds, so the closed-form overall
success probability is the product of per-step probabilities. The Monte Carlo
path draws one Bernoulli outcome per step per trial and counts trials where
all steps succeed. MOCET is the harm weight times the success probability
(expected casualties per incident); Cumulative MOCET scales that by the
annual occurrence rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .corpus import HarmModel, Protocol
from .knn import (
    DEFAULT_K,
    METRICS,
    NeighborIndex,
    StepProbabilityEstimate,
    estimate_categorical_probability,
    estimate_step_probability,
)

DEFAULT_TRIALS = 100_000

# below this, a per-step probability also gets a log-space product so long
# chains stay meaningful even when the direct product underflows
_LOG_SPACE_THRESHOLD = 1e-3

_SEED_MASK = (1 << 64) - 1

# doubles drawn per chunk when simulating, to bound memory
_CHUNK_CELLS = 4_000_000


@dataclass(frozen=True)
class SuccessEstimate:
    """Overall success probability with the per-step inputs that produced it."""

    e_y: float
    method: str  # "closed_form" | "monte_carlo"
    per_step: tuple[float, ...]
    log_e_y: float | None = None


@dataclass(frozen=True)
class SimulationResult:
    """Monte Carlo trial statistics; mean is exactly successes/trials."""

    trials: int
    successes: int
    mean: float
    std_error: float
    seed: int

    def as_dict(self) -> dict[str, Any]:
        return {
            "trials": self.trials,
            "successes": self.successes,
            "mean": self.mean,
            "std_error": self.std_error,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ScoreConfig:
    """Knobs governing one scoring run; echoed into every report."""

    k: int = DEFAULT_K
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    metric: str = "euclidean"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}; expected one of {METRICS}")

    def as_dict(self) -> dict[str, Any]:
        return {"k": self.k, "trials": self.trials, "seed": self.seed, "metric": self.metric}


@dataclass(frozen=True)
class MocetReport:
    """Full scoring result for one protocol; reproducible from the config echo."""

    scenario: str
    steps: tuple[StepProbabilityEstimate, ...]
    e_y_closed_form: float
    log_e_y: float | None
    simulation: SimulationResult
    mocet: float
    cumulative_mocet: float
    harm: HarmModel
    config: ScoreConfig

    def as_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "config": self.config.as_dict(),
            "harm": {"weight": self.harm.weight, "occurrence_rate": self.harm.occurrence_rate},
            "steps": [
                {
                    "id": est.step_id,
                    "p": est.p,
                    "source": est.source,
                    "k_used": est.k_used,
                    "neighbors": list(est.neighbor_ids),
                }
                for est in self.steps
            ],
            "e_y_closed_form": self.e_y_closed_form,
            "log_e_y": self.log_e_y,
            "simulation": self.simulation.as_dict(),
            "mocet": self.mocet,
            "cumulative_mocet": self.cumulative_mocet,
        }


def _checked_probabilities(probabilities: Sequence[float]) -> tuple[float, ...]:
    probs = tuple(float(p) for p in probabilities)
    if not probs:
        raise ValueError("probability sequence must be non-empty")
    for p in probs:
        if not math.isfinite(p) or not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} outside [0, 1]")
    return probs


def closed_form_success(probabilities: Sequence[float]) -> SuccessEstimate:
    """Exact product of per-step probabilities, in the order given."""
    probs = _checked_probabilities(probabilities)
    e_y = 1.0
    for p in probs:
        e_y *= p
    log_e_y = None
    if min(probs) < _LOG_SPACE_THRESHOLD:
        log_e_y = -math.inf if 0.0 in probs else math.fsum(math.log(p) for p in probs)
    return SuccessEstimate(e_y=e_y, method="closed_form", per_step=probs, log_e_y=log_e_y)


def _blocks_per_trial(n_steps: int) -> int:
    # each Philox counter tick yields 4 uint64 draws; give every trial whole blocks
    return (n_steps + 3) // 4


def trial_uniforms(seed: int, first_trial: int, n_trials: int, n_steps: int) -> np.ndarray:
    """Uniform draws for trials [first_trial, first_trial + n_trials).

    Trial i always reads the counter-based stream at block i * ceil(n_steps/4),
    regardless of how trials are batched, so chunked, parallel, and one-shot
    execution all see identical draws for a given seed.
    """
    blocks = _blocks_per_trial(n_steps)
    bit_gen = np.random.Philox(key=seed & _SEED_MASK)
    bit_gen.advance(first_trial * blocks)
    draws = np.random.Generator(bit_gen).random((n_trials, blocks * 4))
    return draws[:, :n_steps]


def simulate(probabilities: Sequence[float], trials: int, seed: int) -> SimulationResult:
    """Monte Carlo estimate of overall success over independent Bernoulli-chain trials.

    A trial succeeds iff every step's uniform draw lands below that step's
    probability. Identical seeds give identical results.
    """
    probs = np.asarray(_checked_probabilities(probabilities))
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    n_steps = len(probs)
    chunk = max(1, _CHUNK_CELLS // (_blocks_per_trial(n_steps) * 4))
    successes = 0
    done = 0
    while done < trials:
        count = min(chunk, trials - done)
        draws = trial_uniforms(seed, done, count, n_steps)
        successes += int((draws < probs).all(axis=1).sum())
        done += count
    mean = successes / trials
    std_error = math.sqrt(mean * (1.0 - mean) / trials)
    return SimulationResult(trials=trials, successes=successes, mean=mean,
                            std_error=std_error, seed=seed)


def success_probability(estimate: SuccessEstimate | SimulationResult) -> float:
    """Success probability carried by either estimate flavor."""
    if isinstance(estimate, SuccessEstimate):
        return estimate.e_y
    if isinstance(estimate, SimulationResult):
        return estimate.mean
    raise TypeError(f"expected SuccessEstimate or SimulationResult, got {type(estimate).__name__}")


def mocet_score(estimate: SuccessEstimate | SimulationResult, harm: HarmModel) -> float:
    """Expected casualties per incident: harm weight times success probability."""
    return harm.weight * success_probability(estimate)


def cumulative_mocet(mocet: float, harm: HarmModel) -> float:
    """Expected casualties per annum: occurrence rate times the per-incident score."""
    return harm.occurrence_rate * mocet


def resolve_step_probabilities(
    protocol: Protocol, index: NeighborIndex | None, k: int
) -> tuple[StepProbabilityEstimate, ...]:
    """Resolve every step to a probability: knn, category mean, or fixed value."""
    estimates = []
    for step in protocol.steps:
        if step.embedding is not None:
            if index is None:
                raise ValueError(f"step {step.id!r} needs a corpus index for knn estimation")
            estimates.append(estimate_step_probability(index, step, k))
        elif step.category is not None:
            if index is None:
                raise ValueError(f"step {step.id!r} needs a corpus for category estimation")
            p = estimate_categorical_probability(index.corpus, step.category)
            estimates.append(StepProbabilityEstimate(step_id=step.id, p=p, source="category"))
        else:
            estimates.append(
                StepProbabilityEstimate(step_id=step.id, p=step.fixed_p, source="fixed")
            )
    return tuple(estimates)


def score_protocol(
    protocol: Protocol, index: NeighborIndex | None, config: ScoreConfig
) -> MocetReport:
    """Score one protocol end to end; deterministic given (protocol, corpus, config).

    MOCET and Cumulative MOCET in the report are computed from the closed-form
    success probability; the Monte Carlo result is reported alongside.
    """
    if index is not None and index.metric != config.metric:
        raise ValueError(
            f"config metric {config.metric!r} does not match index metric {index.metric!r}"
        )
    estimates = resolve_step_probabilities(protocol, index, config.k)
    probs = [est.p for est in estimates]
    closed = closed_form_success(probs)
    sim = simulate(probs, config.trials, config.seed)
    score = mocet_score(closed, protocol.harm)
    return MocetReport(
        scenario=protocol.scenario,
        steps=estimates,
        e_y_closed_form=closed.e_y,
        log_e_y=closed.log_e_y,
        simulation=sim,
        mocet=score,
        cumulative_mocet=cumulative_mocet(score, protocol.harm),
        harm=protocol.harm,
        config=config,
    )

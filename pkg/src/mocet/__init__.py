"""MOCET: Monte Carlo expected-threat scoring for step-decomposed processes."""

from .corpus import (
    CorpusError,
    EmbeddingVector,
    HarmModel,
    Protocol,
    ProtocolStep,
    ReferenceCorpus,
    ReferenceItem,
    ValidationReport,
    dump_corpus,
    load_corpus,
    load_protocol,
    validate_corpus,
)
from .engine import (
    DEFAULT_TRIALS,
    MocetReport,
    ScoreConfig,
    SimulationResult,
    SuccessEstimate,
    closed_form_success,
    cumulative_mocet,
    mocet_score,
    score_protocol,
    simulate,
)
from .error_analysis import (
    CategoryProfile,
    ErrorReport,
    approximation_report,
    deviations,
    weighted_mean_probability,
)
from .knn import (
    DEFAULT_K,
    NeighborIndex,
    StepProbabilityEstimate,
    build_index,
    estimate_categorical_probability,
    estimate_step_probability,
    nearest_neighbors,
)
from .validation import (
    LooPrediction,
    SeparationResult,
    k_sweep,
    leave_one_out_predictions,
    separation_test,
)

__version__ = "0.1.0"

__all__ = [
    "CorpusError",
    "EmbeddingVector",
    "HarmModel",
    "Protocol",
    "ProtocolStep",
    "ReferenceCorpus",
    "ReferenceItem",
    "ValidationReport",
    "dump_corpus",
    "load_corpus",
    "load_protocol",
    "validate_corpus",
    "DEFAULT_TRIALS",
    "MocetReport",
    "ScoreConfig",
    "SimulationResult",
    "SuccessEstimate",
    "closed_form_success",
    "cumulative_mocet",
    "mocet_score",
    "score_protocol",
    "simulate",
    "CategoryProfile",
    "ErrorReport",
    "approximation_report",
    "deviations",
    "weighted_mean_probability",
    "DEFAULT_K",
    "NeighborIndex",
    "StepProbabilityEstimate",
    "build_index",
    "estimate_categorical_probability",
    "estimate_step_probability",
    "nearest_neighbors",
    "LooPrediction",
    "SeparationResult",
    "k_sweep",
    "leave_one_out_predictions",
    "separation_test",
    "__version__",
]

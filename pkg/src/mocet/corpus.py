"""Reference corpora and protocol definitions.

A corpus file is UTF-8 text with one JSON record per line:

    {"id": "s1", "text": "...", "embedding": [0.1, ...], "outcome": 1, "category": "acq"}

``text`` and ``category`` are optional; ``text`` is informational only and
never enters any computation. A protocol file is a single JSON document:

    {"scenario": "...",
     "harm": {"weight": 2315.0, "occurrence_rate": 30.0},
     "steps": [{"id": "s1", "embedding": [...]},
               {"id": "s2", "category": "acq"},
               {"id": "s3", "p": 0.4}]}

Each step carries exactly one probability source: an embedding vector, a
category label, or a direct probability ``p``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Any, Iterable


class CorpusError(ValueError):
    """Input data violates the record contract."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class EmbeddingVector:
    """Dense vector of finite 64-bit reals."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("embedding must have at least one entry")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("embedding entries must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ReferenceItem:
    """One historical step: an embedding plus its binary outcome."""

    id: str
    embedding: EmbeddingVector
    outcome: int
    text: str | None = None
    category: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise ValueError("item id must be a non-empty string")
        if type(self.outcome) is not int or self.outcome not in (0, 1):
            raise ValueError(f"outcome must be 0 or 1, got {self.outcome!r}")


@dataclass(frozen=True)
class ReferenceCorpus:
    """Immutable collection of reference items sharing one embedding dimension."""

    items: tuple[ReferenceItem, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        dims = {item.embedding.dim for item in self.items}
        if len(dims) > 1:
            raise ValueError(f"items mix embedding dimensions {sorted(dims)}")
        seen: set[str] = set()
        for item in self.items:
            if item.id in seen:
                raise ValueError(f"duplicate item id {item.id!r}")
            seen.add(item.id)

    @property
    def dim(self) -> int | None:
        return self.items[0].embedding.dim if self.items else None

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass(frozen=True)
class HarmModel:
    """Scenario harm weight (casualties per successful incident) and annual occurrence rate."""

    weight: float
    occurrence_rate: float

    def __post_init__(self) -> None:
        for name in ("weight", "occurrence_rate"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValueError(f"harm {name} must be a number, got {value!r}")
            value = float(value)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"harm {name} must be finite and >= 0, got {value}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class ProtocolStep:
    """One step of a scenario with exactly one probability source."""

    id: str
    embedding: EmbeddingVector | None = None
    category: str | None = None
    fixed_p: float | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise ValueError("step id must be a non-empty string")
        present = [
            name
            for name in ("embedding", "category", "fixed_p")
            if getattr(self, name) is not None
        ]
        if len(present) != 1:
            raise ValueError(
                f"step {self.id!r} must carry exactly one of embedding/category/p, "
                f"got {present or 'none'}"
            )
        if self.fixed_p is not None:
            p = float(self.fixed_p)
            if not math.isfinite(p) or not 0.0 <= p <= 1.0:
                raise ValueError(f"step {self.id!r}: p must lie in [0, 1], got {self.fixed_p}")
            object.__setattr__(self, "fixed_p", p)

    @property
    def source(self) -> str:
        """Which kind of probability source the step carries: knn, category, or fixed."""
        if self.embedding is not None:
            return "knn"
        if self.category is not None:
            return "category"
        return "fixed"


@dataclass(frozen=True)
class Protocol:
    """Ordered, non-empty step sequence for one scenario plus its harm model."""

    scenario: str
    steps: tuple[ProtocolStep, ...]
    harm: HarmModel

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ValueError("protocol must contain at least one step")
        seen: set[str] = set()
        for step in self.steps:
            if step.id in seen:
                raise ValueError(f"duplicate step id {step.id!r}")
            seen.add(step.id)


@dataclass(frozen=True)
class ValidationReport:
    """Summary statistics of a loaded corpus (report-only, never raises)."""

    items: int
    dim: int | None
    base_rate: float | None
    category_counts: dict[str, int]
    usable_for_estimation: bool
    note: str | None = None

    def as_dict(self) -> dict[str, Any]:
        return {
            "items": self.items,
            "dim": self.dim,
            "base_rate": self.base_rate,
            "category_counts": dict(self.category_counts),
            "usable_for_estimation": self.usable_for_estimation,
            "note": self.note,
        }


def _require_number(value: Any) -> float | None:
    """Return value as float if it is a finite JSON number, else None."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def _parse_embedding(raw: Any, line: int | None = None) -> EmbeddingVector:
    if not isinstance(raw, list) or not raw:
        raise CorpusError("field 'embedding' must be a non-empty array of numbers", line)
    values = []
    for entry in raw:
        value = _require_number(entry)
        if value is None:
            raise CorpusError(
                f"field 'embedding' contains a non-finite or non-numeric entry: {entry!r}",
                line,
            )
        values.append(value)
    return EmbeddingVector(tuple(values))


def _parse_corpus_record(record: Any, line: int) -> ReferenceItem:
    if not isinstance(record, dict):
        raise CorpusError("record must be a JSON object", line)
    item_id = record.get("id")
    if not isinstance(item_id, str) or not item_id:
        raise CorpusError("field 'id' must be a non-empty string", line)
    embedding = _parse_embedding(record.get("embedding"), line)
    outcome = record.get("outcome")
    if type(outcome) is not int or outcome not in (0, 1):
        raise CorpusError(f"field 'outcome' must be 0 or 1, got {outcome!r}", line)
    text = record.get("text")
    if text is not None and not isinstance(text, str):
        raise CorpusError("field 'text' must be a string when present", line)
    category = record.get("category")
    if category is not None and not isinstance(category, str):
        raise CorpusError("field 'category' must be a string when present", line)
    return ReferenceItem(id=item_id, embedding=embedding, outcome=outcome,
                         text=text, category=category)


def load_corpus(source: IO[str] | Iterable[str]) -> ReferenceCorpus:
    """Load a line-delimited corpus from an open stream or iterable of lines.

    Blank lines are skipped; every other line must be a valid record, so the
    loaded item count always equals the non-blank line count. Raises
    CorpusError with the offending line number otherwise.
    """
    items: list[ReferenceItem] = []
    ids: set[str] = set()
    dim: int | None = None
    for line_no, raw_line in enumerate(source, start=1):
        stripped = raw_line.strip()
        if not stripped:
            continue
        try:
            record = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"invalid JSON: {exc.msg}", line_no) from exc
        item = _parse_corpus_record(record, line_no)
        if item.id in ids:
            raise CorpusError(f"duplicate item id {item.id!r}", line_no)
        if dim is None:
            dim = item.embedding.dim
        elif item.embedding.dim != dim:
            raise CorpusError(
                f"embedding dimension {item.embedding.dim} does not match corpus dimension {dim}",
                line_no,
            )
        ids.add(item.id)
        items.append(item)
    return ReferenceCorpus(tuple(items))


def dump_corpus(corpus: ReferenceCorpus, sink: IO[str]) -> None:
    """Write a corpus in the line-delimited record format; inverse of load_corpus."""
    for item in corpus:
        record: dict[str, Any] = {"id": item.id}
        if item.text is not None:
            record["text"] = item.text
        record["embedding"] = list(item.embedding.values)
        record["outcome"] = item.outcome
        if item.category is not None:
            record["category"] = item.category
        sink.write(json.dumps(record, ensure_ascii=False) + "\n")


def _parse_step(raw: Any, position: int) -> ProtocolStep:
    where = f"steps[{position}]"
    if not isinstance(raw, dict):
        raise CorpusError(f"{where} must be a JSON object")
    step_id = raw.get("id")
    if not isinstance(step_id, str) or not step_id:
        raise CorpusError(f"{where}: field 'id' must be a non-empty string")
    sources = [name for name in ("embedding", "category", "p") if raw.get(name) is not None]
    if len(sources) != 1:
        raise CorpusError(
            f"{where} ({step_id!r}): exactly one of embedding/category/p required, "
            f"got {sources or 'none'}"
        )
    if sources == ["embedding"]:
        return ProtocolStep(id=step_id, embedding=_parse_embedding(raw["embedding"]))
    if sources == ["category"]:
        category = raw["category"]
        if not isinstance(category, str) or not category:
            raise CorpusError(f"{where} ({step_id!r}): field 'category' must be a non-empty string")
        return ProtocolStep(id=step_id, category=category)
    p = _require_number(raw["p"])
    if p is None or not 0.0 <= p <= 1.0:
        raise CorpusError(f"{where} ({step_id!r}): field 'p' must be a number in [0, 1]")
    return ProtocolStep(id=step_id, fixed_p=p)


def load_protocol(source: IO[str]) -> Protocol:
    """Load a protocol document (single JSON object) from an open stream."""
    try:
        document = json.load(source)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(document, dict):
        raise CorpusError("protocol must be a JSON object")
    scenario = document.get("scenario")
    if not isinstance(scenario, str) or not scenario:
        raise CorpusError("field 'scenario' must be a non-empty string")
    harm_raw = document.get("harm")
    if not isinstance(harm_raw, dict):
        raise CorpusError("field 'harm' must be an object with weight and occurrence_rate")
    weight = _require_number(harm_raw.get("weight"))
    rate = _require_number(harm_raw.get("occurrence_rate"))
    if weight is None or weight < 0:
        raise CorpusError("harm field 'weight' must be a number >= 0")
    if rate is None or rate < 0:
        raise CorpusError("harm field 'occurrence_rate' must be a number >= 0")
    steps_raw = document.get("steps")
    if not isinstance(steps_raw, list) or not steps_raw:
        raise CorpusError("field 'steps' must be a non-empty array")
    steps = tuple(_parse_step(raw, i) for i, raw in enumerate(steps_raw))
    try:
        return Protocol(scenario=scenario, steps=steps, harm=HarmModel(weight, rate))
    except ValueError as exc:
        raise CorpusError(str(exc)) from exc


def validate_corpus(corpus: ReferenceCorpus) -> ValidationReport:
    """Summarize a corpus: size, dimension, outcome base rate, category counts."""
    counts: dict[str, int] = {}
    for item in corpus:
        if item.category is not None:
            counts[item.category] = counts.get(item.category, 0) + 1
    if len(corpus) == 0:
        return ValidationReport(
            items=0,
            dim=None,
            base_rate=None,
            category_counts={},
            usable_for_estimation=False,
            note="unusable for estimation: corpus is empty",
        )
    base_rate = sum(item.outcome for item in corpus) / len(corpus)
    return ValidationReport(
        items=len(corpus),
        dim=corpus.dim,
        base_rate=base_rate,
        category_counts=dict(sorted(counts.items())),
        usable_for_estimation=True,
    )

"""Batch embedding of text records into the engine's corpus line format.

Input is one JSON record per line: {"id": "...", "text": "...", "outcome"?,
"category"?}. Output records keep every pass-through field untouched, add the
embedding, and preserve input order. Embedding values are written with nine
significant digits, enough for stable distance ranking while keeping files
diffable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .encoders import DEFAULT_MODEL, EmbedError, resolve_encoder

_PRECISION = 9


@dataclass(frozen=True)
class EmbedJob:
    input_path: str
    output_path: str
    model: str = DEFAULT_MODEL
    batch_size: int = 32

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise EmbedError(f"batch size must be >= 1, got {self.batch_size}")


def _parse_input_line(raw: str, line_no: int) -> dict:
    try:
        record = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise EmbedError(f"invalid JSON: {exc.msg}", line_no) from exc
    if not isinstance(record, dict):
        raise EmbedError("record must be a JSON object", line_no)
    item_id = record.get("id")
    if not isinstance(item_id, str) or not item_id:
        raise EmbedError("field 'id' must be a non-empty string", line_no)
    text = record.get("text")
    if not isinstance(text, str) or not text.strip():
        raise EmbedError("field 'text' must be a non-empty string", line_no)
    outcome = record.get("outcome")
    if outcome is not None and (type(outcome) is not int or outcome not in (0, 1)):
        raise EmbedError(f"field 'outcome' must be 0 or 1 when present, got {outcome!r}", line_no)
    category = record.get("category")
    if category is not None and not isinstance(category, str):
        raise EmbedError("field 'category' must be a string when present", line_no)
    return record


def _round_sig(value: float) -> float:
    return float(format(value, f".{_PRECISION}g"))


def _output_line(record: dict, embedding: list[float]) -> str:
    out: dict = {"id": record["id"], "text": record["text"],
                 "embedding": [_round_sig(v) for v in embedding]}
    if record.get("outcome") is not None:
        out["outcome"] = record["outcome"]
    if record.get("category") is not None:
        out["category"] = record["category"]
    return json.dumps(out, ensure_ascii=False)


def embed_texts(job: EmbedJob) -> int:
    """Embed every input record and write corpus lines; returns the count written."""
    with open(job.input_path, encoding="utf-8") as handle:
        records = []
        for line_no, raw_line in enumerate(handle, start=1):
            stripped = raw_line.strip()
            if not stripped:
                continue
            records.append(_parse_input_line(stripped, line_no))

    encoder = resolve_encoder(job.model)
    dim: int | None = None
    with open(job.output_path, "w", encoding="utf-8") as sink:
        for start in range(0, len(records), job.batch_size):
            batch = records[start : start + job.batch_size]
            # encode the trimmed text; the stored text stays verbatim
            vectors = encoder.encode([r["text"].strip() for r in batch], job.batch_size)
            for record, vector in zip(batch, vectors):
                if dim is None:
                    dim = len(vector)
                elif len(vector) != dim:
                    raise EmbedError(
                        f"model emitted dimension {len(vector)} after {dim}; "
                        "refusing to mix dimensions"
                    )
                sink.write(_output_line(record, vector) + "\n")
    return len(records)

"""Text encoders behind one interface: encode(texts) -> list of vectors.

Model strings of the form ``hash:<dim>`` select the built-in deterministic
feature-hashing encoder, which needs no downloads and exists so pipelines and
tests can run offline. Anything else is passed to sentence-transformers.
"""

from __future__ import annotations

import hashlib
import math

DEFAULT_MODEL = "all-mpnet-base-v2"


class EmbedError(ValueError):
    """Input data or model configuration is unusable."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def _token_vector(token: str, dim: int) -> list[float]:
    values: list[float] = []
    block = 0
    while len(values) < dim:
        digest = hashlib.sha256(f"{token}\x00{block}".encode("utf-8")).digest()
        for i in range(0, 32, 4):
            if len(values) >= dim:
                break
            word = int.from_bytes(digest[i : i + 4], "big")
            values.append(word / 2**31 - 1.0)  # [-1, 1)
        block += 1
    return values


class HashEncoder:
    """Deterministic token-hashing encoder; similar token sets land nearby."""

    def __init__(self, dim: int):
        if dim < 1:
            raise EmbedError(f"hash encoder dimension must be >= 1, got {dim}")
        self.dim = dim
        self.name = f"hash:{dim}"

    def encode(self, texts: list[str], batch_size: int = 32) -> list[list[float]]:
        vectors = []
        for text in texts:
            total = [0.0] * self.dim
            for token in text.lower().split():
                for i, value in enumerate(_token_vector(token, self.dim)):
                    total[i] += value
            norm = math.sqrt(sum(v * v for v in total))
            if norm > 0.0:
                total = [v / norm for v in total]
            vectors.append(total)
        return vectors


class SentenceTransformerEncoder:
    """Pretrained sentence-embedding model via the sentence-transformers library."""

    def __init__(self, model_name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EmbedError(
                f"model {model_name!r} needs the sentence-transformers package: {exc}"
            ) from exc
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as exc:  # hub/file errors surface as many types
            raise EmbedError(f"cannot load model {model_name!r}: {exc}") from exc
        self.name = model_name
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: list[str], batch_size: int = 32) -> list[list[float]]:
        vectors = self._model.encode(
            texts, batch_size=batch_size, convert_to_numpy=True, show_progress_bar=False
        )
        return [[float(v) for v in vector] for vector in vectors]


def resolve_encoder(model: str):
    """Pick the encoder implied by the model string."""
    if model.startswith("hash:"):
        try:
            dim = int(model.split(":", 1)[1])
        except ValueError:
            raise EmbedError(f"bad hash encoder spec {model!r}; expected hash:<dim>")
        return HashEncoder(dim)
    return SentenceTransformerEncoder(model)

"""Text-to-embedding pipeline emitting MOCET corpus records."""

from .encoders import DEFAULT_MODEL, EmbedError, HashEncoder, SentenceTransformerEncoder, resolve_encoder
from .pipeline import EmbedJob, embed_texts

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_MODEL",
    "EmbedError",
    "EmbedJob",
    "HashEncoder",
    "SentenceTransformerEncoder",
    "embed_texts",
    "resolve_encoder",
    "__version__",
]

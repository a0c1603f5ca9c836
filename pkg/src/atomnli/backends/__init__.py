from .base import (
    BackendDescriptor,
    EmbeddingBackend,
    EntailmentBackend,
    GenerationBackend,
    GenerationParams,
)
from .cache import ResponseCache, canonical_payload
from .mock import (
    MOCK_EMBEDDING_DIM,
    MockEmbeddingBackend,
    MockEntailmentBackend,
    MockGenerationBackend,
    load_generation_fixtures,
    load_nli_fixtures,
    prompt_fingerprint,
)
from .remote import (
    RemoteEmbeddingBackend,
    RemoteEntailmentBackend,
    RemoteGenerationBackend,
    TokenBucket,
)

__all__ = [
    "BackendDescriptor",
    "GenerationParams",
    "GenerationBackend",
    "EntailmentBackend",
    "EmbeddingBackend",
    "ResponseCache",
    "canonical_payload",
    "MockGenerationBackend",
    "MockEntailmentBackend",
    "MockEmbeddingBackend",
    "MOCK_EMBEDDING_DIM",
    "load_generation_fixtures",
    "load_nli_fixtures",
    "prompt_fingerprint",
    "RemoteGenerationBackend",
    "RemoteEntailmentBackend",
    "RemoteEmbeddingBackend",
    "TokenBucket",
]

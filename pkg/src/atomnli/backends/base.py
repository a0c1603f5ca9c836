"""Backend descriptors and the cached-call plumbing shared by all backends.

Three capabilities exist behind this interface: text generation, NLI
classification, and text embedding. Every call is content-addressed into a
persistent cache, so any pipeline stage re-run with a warm cache produces
byte-identical outputs with zero network activity.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core import NliLabel
from ..errors import IntegrityError, ValidationError
from .cache import ResponseCache


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.0
    max_tokens: int = 512

    def to_record(self) -> dict:
        return {"temperature": self.temperature, "max_tokens": self.max_tokens}


@dataclass(frozen=True)
class BackendDescriptor:
    """Identity and wire parameters of one backend.

    The cache identity incorporates the endpoint and generation params, so
    pointing the same name at a different endpoint (or changing params)
    never collides in the cache.
    """

    backend_id: str
    endpoint: str = ""
    auth_env_var: str = ""
    params: GenerationParams = field(default_factory=GenerationParams)

    @property
    def cache_id(self) -> str:
        payload = json.dumps(
            {"endpoint": self.endpoint, "params": self.params.to_record()},
            sort_keys=True,
        )
        suffix = hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]
        return f"{self.backend_id}@{suffix}"

    def to_record(self) -> dict:
        return {
            "backend_id": self.backend_id,
            "endpoint": self.endpoint,
            "auth_env_var": self.auth_env_var,
            "params": self.params.to_record(),
        }

    @classmethod
    def from_record(cls, record: dict) -> "BackendDescriptor":
        params = record.get("params", {})
        return cls(
            backend_id=record["backend_id"],
            endpoint=record.get("endpoint", ""),
            auth_env_var=record.get("auth_env_var", ""),
            params=GenerationParams(
                temperature=params.get("temperature", 0.0),
                max_tokens=params.get("max_tokens", 512),
            ),
        )


class CachedBackend:
    """Base class routing every request through the response cache."""

    def __init__(self, descriptor: BackendDescriptor, cache: Optional[ResponseCache] = None):
        self.descriptor = descriptor
        self.cache = cache

    def _cached(self, payload: dict, compute) -> object:
        if self.cache is None:
            return compute()
        key = self.cache.key_for(self.descriptor.cache_id, payload)
        hit = self.cache.get(key)
        if hit is not None:
            return hit["response"]
        response = compute()
        self.cache.put(key, self.descriptor.cache_id, payload, response)
        return response


class GenerationBackend(CachedBackend):
    def generate(self, prompt: str) -> str:
        if not prompt:
            raise ValidationError("generate: prompt must be non-empty")
        payload = {"op": "generate", "prompt": prompt}
        return str(self._cached(payload, lambda: self._generate(prompt)))

    def _generate(self, prompt: str) -> str:
        raise NotImplementedError


class EntailmentBackend(CachedBackend):
    def classify(self, premise: str, hypothesis: str) -> NliLabel:
        if not premise or not hypothesis:
            raise ValidationError("classify: premise and hypothesis must be non-empty")
        payload = {"op": "classify", "premise": premise, "hypothesis": hypothesis}
        raw = self._cached(payload, lambda: self._classify(premise, hypothesis).value)
        return NliLabel.parse(str(raw))

    def _classify(self, premise: str, hypothesis: str) -> NliLabel:
        raise NotImplementedError


class EmbeddingBackend(CachedBackend):
    def __init__(self, descriptor: BackendDescriptor, cache: Optional[ResponseCache] = None):
        super().__init__(descriptor, cache)
        self._dimension: Optional[int] = None

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise ValidationError("embed: text must be non-empty")
        payload = {"op": "embed", "text": text}
        raw = self._cached(payload, lambda: [float(x) for x in self._embed(text)])
        vector = np.asarray(raw, dtype=np.float64)
        if self._dimension is None:
            self._dimension = vector.shape[0]
        elif vector.shape[0] != self._dimension:
            raise IntegrityError(
                f"embedding dimension drift on {self.descriptor.backend_id}: "
                f"{vector.shape[0]} != {self._dimension}"
            )
        return vector

    def _embed(self, text: str) -> list:
        raise NotImplementedError

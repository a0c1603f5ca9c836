"""JSON-over-HTTP backends with retries and client-side rate limiting.

The remote wire format is adapter-specific and deliberately minimal; it is
isolated behind the three backend operations so swapping in a different
provider only means changing this module. Credentials come exclusively
from the environment variable named in the descriptor, never from files
or flags.

Wire schema (POST to the descriptor endpoint):
  generate:  {"prompt", "temperature", "max_tokens"} -> {"text": str}
  classify:  {"premise", "hypothesis"}               -> {"label": "e"|"n"|"c"}
  embed:     {"text"}                                -> {"embedding": [float]}
"""
from __future__ import annotations

import os
import threading
import time
from typing import Optional

import httpx

from ..core import NliLabel
from ..errors import BackendError, ConfigurationError
from .base import BackendDescriptor, EmbeddingBackend, EntailmentBackend, GenerationBackend
from .cache import ResponseCache, canonical_payload

MAX_ATTEMPTS = 3
BACKOFF_BASE_SECONDS = 0.5
RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class TokenBucket:
    """Thread-safe token bucket; acquire() blocks until a token is free."""

    def __init__(self, rate_per_second: float, capacity: Optional[float] = None):
        self.rate = float(rate_per_second)
        self.capacity = float(capacity if capacity is not None else max(1.0, rate_per_second))
        self._tokens = self.capacity
        self._updated = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self.capacity, self._tokens + (now - self._updated) * self.rate)
                self._updated = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            time.sleep(wait)


class _HttpTransport:
    """Shared POST-with-retries plumbing for the three remote backends."""

    def __init__(
        self,
        descriptor: BackendDescriptor,
        limiter: Optional[TokenBucket] = None,
        timeout: float = 60.0,
        client: Optional[httpx.Client] = None,
    ):
        self.descriptor = descriptor
        self.limiter = limiter
        self.client = client or httpx.Client(timeout=timeout)

    def headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.descriptor.auth_env_var:
            credential = os.environ.get(self.descriptor.auth_env_var)
            if not credential:
                raise ConfigurationError(
                    f"backend {self.descriptor.backend_id}: credential variable "
                    f"{self.descriptor.auth_env_var} is not set"
                )
            headers["Authorization"] = f"Bearer {credential}"
        return headers

    def post(self, payload: dict, request_key: str) -> dict:
        if not self.descriptor.endpoint:
            raise ConfigurationError(f"backend {self.descriptor.backend_id}: no endpoint configured")
        headers = self.headers()
        last_error = "no attempt made"
        for attempt in range(MAX_ATTEMPTS):
            if attempt:
                time.sleep(BACKOFF_BASE_SECONDS * (2 ** (attempt - 1)))
            if self.limiter is not None:
                self.limiter.acquire()
            try:
                response = self.client.post(
                    self.descriptor.endpoint,
                    content=canonical_payload(payload),
                    headers=headers,
                )
            except httpx.HTTPError as exc:
                last_error = f"transport error: {exc}"
                continue
            if response.status_code in RETRYABLE_STATUS:
                last_error = f"HTTP {response.status_code}"
                continue
            if response.status_code != 200:
                raise BackendError(
                    f"backend {self.descriptor.backend_id}: HTTP {response.status_code}",
                    request_key=request_key,
                )
            return response.json()
        raise BackendError(
            f"backend {self.descriptor.backend_id}: failed after {MAX_ATTEMPTS} attempts ({last_error})",
            request_key=request_key,
        )


class RemoteGenerationBackend(GenerationBackend):
    def __init__(
        self,
        descriptor: BackendDescriptor,
        cache: Optional[ResponseCache] = None,
        limiter: Optional[TokenBucket] = None,
        client: Optional[httpx.Client] = None,
    ):
        super().__init__(descriptor, cache)
        self.transport = _HttpTransport(descriptor, limiter, client=client)

    def _request_key(self, payload: dict) -> str:
        if self.cache is not None:
            return self.cache.key_for(self.descriptor.cache_id, payload)
        return canonical_payload(payload)[:64]

    def _generate(self, prompt: str) -> str:
        wire = {
            "prompt": prompt,
            "temperature": self.descriptor.params.temperature,
            "max_tokens": self.descriptor.params.max_tokens,
        }
        key = self._request_key({"op": "generate", "prompt": prompt})
        body = self.transport.post(wire, request_key=key)
        return str(body["text"])


class RemoteEntailmentBackend(EntailmentBackend):
    def __init__(
        self,
        descriptor: BackendDescriptor,
        cache: Optional[ResponseCache] = None,
        limiter: Optional[TokenBucket] = None,
        client: Optional[httpx.Client] = None,
    ):
        super().__init__(descriptor, cache)
        self.transport = _HttpTransport(descriptor, limiter, client=client)

    def _classify(self, premise: str, hypothesis: str) -> NliLabel:
        payload = {"op": "classify", "premise": premise, "hypothesis": hypothesis}
        key = self.cache.key_for(self.descriptor.cache_id, payload) if self.cache else ""
        body = self.transport.post({"premise": premise, "hypothesis": hypothesis}, request_key=key)
        return NliLabel.parse(str(body["label"]))


class RemoteEmbeddingBackend(EmbeddingBackend):
    def __init__(
        self,
        descriptor: BackendDescriptor,
        cache: Optional[ResponseCache] = None,
        limiter: Optional[TokenBucket] = None,
        client: Optional[httpx.Client] = None,
    ):
        super().__init__(descriptor, cache)
        self.transport = _HttpTransport(descriptor, limiter, client=client)

    def _embed(self, text: str) -> list:
        payload = {"op": "embed", "text": text}
        key = self.cache.key_for(self.descriptor.cache_id, payload) if self.cache else ""
        body = self.transport.post({"text": text}, request_key=key)
        return [float(x) for x in body["embedding"]]

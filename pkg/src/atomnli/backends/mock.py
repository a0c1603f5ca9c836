"""Deterministic mock backends for offline runs and tests.

All mocks are pure functions of their inputs and fixture files:

- generation: fixture-table lookup keyed by the SHA-256 of the exact
  prompt; a prompt with no fixture is an error, never a silent default.
- NLI classification: fixture-table lookup keyed by the exact
  (premise, hypothesis) pair, with a fallback rule of string equality ->
  entailment, otherwise neutral.
- embedding: a unit vector drawn from an RNG seeded by the text hash, so
  identical texts embed identically and distinct texts are nearly
  orthogonal at this dimensionality.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Mapping, Optional, Tuple, Union

import numpy as np

from ..core import NliLabel
from ..errors import NoFixtureError, ValidationError
from .base import BackendDescriptor, EmbeddingBackend, EntailmentBackend, GenerationBackend
from .cache import ResponseCache

MOCK_EMBEDDING_DIM = 64
_EMBED_SALT = b"atomnli-mock-embedding-v1"


def prompt_fingerprint(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:24]


def load_generation_fixtures(path: Union[str, Path]) -> dict:
    """Fixture table: {prompt_fingerprint: {"response": str, "hint": str}}."""
    table = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(table, dict):
        raise ValidationError(f"{path}: generation fixture table must be a JSON object")
    return table


def load_nli_fixtures(path: Union[str, Path]) -> dict:
    """Fixture table: list of {premise, hypothesis, label} records."""
    records = json.loads(Path(path).read_text(encoding="utf-8"))
    table = {}
    for record in records:
        table[(record["premise"], record["hypothesis"])] = NliLabel.parse(record["label"])
    return table


class MockGenerationBackend(GenerationBackend):
    def __init__(
        self,
        descriptor: BackendDescriptor,
        fixtures: Mapping[str, dict],
        cache: Optional[ResponseCache] = None,
    ):
        super().__init__(descriptor, cache)
        self.fixtures = fixtures
        self.calls = 0

    def _generate(self, prompt: str) -> str:
        self.calls += 1
        fingerprint = prompt_fingerprint(prompt)
        entry = self.fixtures.get(fingerprint)
        if entry is None:
            head = prompt.splitlines()[0][:80] if prompt.splitlines() else ""
            raise NoFixtureError(
                f"no fixture for prompt {fingerprint} (starts: {head!r})",
                request_key=fingerprint,
            )
        return entry["response"]


class MockEntailmentBackend(EntailmentBackend):
    def __init__(
        self,
        descriptor: BackendDescriptor,
        fixtures: Optional[Mapping[Tuple[str, str], NliLabel]] = None,
        cache: Optional[ResponseCache] = None,
    ):
        super().__init__(descriptor, cache)
        self.fixtures = dict(fixtures or {})
        self.calls = 0

    def _classify(self, premise: str, hypothesis: str) -> NliLabel:
        self.calls += 1
        hit = self.fixtures.get((premise, hypothesis))
        if hit is not None:
            return hit
        if premise.strip() == hypothesis.strip():
            return NliLabel.ENTAILMENT
        return NliLabel.NEUTRAL


class MockEmbeddingBackend(EmbeddingBackend):
    def __init__(
        self,
        descriptor: BackendDescriptor,
        dimension: int = MOCK_EMBEDDING_DIM,
        cache: Optional[ResponseCache] = None,
    ):
        super().__init__(descriptor, cache)
        self.dimension = dimension
        self.calls = 0

    def _embed(self, text: str) -> list:
        self.calls += 1
        digest = hashlib.sha256(_EMBED_SALT + text.encode("utf-8")).digest()
        seed = int.from_bytes(digest[:8], "big")
        rng = np.random.default_rng(seed)
        vector = rng.standard_normal(self.dimension)
        vector /= np.linalg.norm(vector)
        return [float(x) for x in vector]

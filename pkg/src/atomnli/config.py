"""Harness configuration: one plain-text INI file plus environment
variables for credentials.

Every knob has a default, so a config file is only needed to point at
real backends or to override evaluation policy. The effective config is
hashed into the run id, making any change that could alter outputs start
a fresh run.
"""
from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

from .backends import (
    BackendDescriptor,
    GenerationParams,
    MockEmbeddingBackend,
    MockEntailmentBackend,
    MockGenerationBackend,
    RemoteEmbeddingBackend,
    RemoteEntailmentBackend,
    RemoteGenerationBackend,
    ResponseCache,
    TokenBucket,
    load_generation_fixtures,
    load_nli_fixtures,
)
from .errors import ConfigurationError
from .resources import data_path


@dataclass(frozen=True)
class HarnessConfig:
    generation: BackendDescriptor = field(
        default_factory=lambda: BackendDescriptor("gen:remote")
    )
    entailment: BackendDescriptor = field(
        default_factory=lambda: BackendDescriptor("nli:remote")
    )
    embedding: BackendDescriptor = field(
        default_factory=lambda: BackendDescriptor("emb:remote")
    )
    parallelism: int = 4
    rate_limit_per_second: float = 8.0
    group_threshold: float = 0.75
    default_full_label: str = "less"
    ic_weighting: str = "uniform"
    primary_annotator: str = "a1"
    mock_generation_fixtures: str = ""
    mock_nli_fixtures: str = ""

    def to_record(self) -> dict:
        return {
            "generation": self.generation.to_record(),
            "entailment": self.entailment.to_record(),
            "embedding": self.embedding.to_record(),
            "parallelism": self.parallelism,
            "rate_limit_per_second": self.rate_limit_per_second,
            "group_threshold": self.group_threshold,
            "default_full_label": self.default_full_label,
            "ic_weighting": self.ic_weighting,
            "primary_annotator": self.primary_annotator,
            "mock_generation_fixtures": self.mock_generation_fixtures,
            "mock_nli_fixtures": self.mock_nli_fixtures,
        }


def _descriptor_from_section(section, default_id: str) -> BackendDescriptor:
    return BackendDescriptor(
        backend_id=section.get("backend_id", default_id),
        endpoint=section.get("endpoint", ""),
        auth_env_var=section.get("auth_env_var", ""),
        params=GenerationParams(
            temperature=section.getfloat("temperature", 0.0),
            max_tokens=section.getint("max_tokens", 512),
        ),
    )


def load_config(path: Union[str, Path, None] = None) -> HarnessConfig:
    config = HarnessConfig()
    if path is None:
        return config
    parser = configparser.ConfigParser()
    read = parser.read(Path(path))
    if not read:
        raise ConfigurationError(f"config file not found: {path}")
    if parser.has_section("generation"):
        config = replace(config, generation=_descriptor_from_section(
            parser["generation"], "gen:remote"))
    if parser.has_section("entailment"):
        config = replace(config, entailment=_descriptor_from_section(
            parser["entailment"], "nli:remote"))
    if parser.has_section("embedding"):
        config = replace(config, embedding=_descriptor_from_section(
            parser["embedding"], "emb:remote"))
    if parser.has_section("pipeline"):
        section = parser["pipeline"]
        config = replace(
            config,
            parallelism=section.getint("parallelism", config.parallelism),
            rate_limit_per_second=section.getfloat(
                "rate_limit_per_second", config.rate_limit_per_second),
            group_threshold=section.getfloat("group_threshold", config.group_threshold),
            default_full_label=section.get("default_full_label", config.default_full_label),
            ic_weighting=section.get("ic_weighting", config.ic_weighting),
            primary_annotator=section.get("primary_annotator", config.primary_annotator),
        )
    if parser.has_section("mock"):
        section = parser["mock"]
        config = replace(
            config,
            mock_generation_fixtures=section.get(
                "generation_fixtures", config.mock_generation_fixtures),
            mock_nli_fixtures=section.get("nli_fixtures", config.mock_nli_fixtures),
        )
    return config


def config_hash(config: HarnessConfig, dataset_path: str, kind: str, mock: bool) -> str:
    payload = {
        "config": config.to_record(),
        "dataset": Path(dataset_path).name,
        "kind": kind,
        "mock": mock,
    }
    blob = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:10]


@dataclass
class Backends:
    generation: object
    entailment: object
    embedding: object
    mock: bool


MOCK_GENERATION = BackendDescriptor("gen:mock")
MOCK_ENTAILMENT = BackendDescriptor("nli:mock")
MOCK_EMBEDDING = BackendDescriptor("emb:mock")


def build_backends(
    config: HarnessConfig, mock: bool, cache: Optional[ResponseCache]
) -> Backends:
    """Materialize the three backends, swapping in fixture-driven mocks
    when requested (the --mock path)."""
    if mock:
        generation_path = config.mock_generation_fixtures or str(
            data_path("fixtures", "mock_generation.json"))
        nli_path = config.mock_nli_fixtures or str(
            data_path("fixtures", "mock_nli.json"))
        return Backends(
            generation=MockGenerationBackend(
                MOCK_GENERATION, load_generation_fixtures(generation_path), cache),
            entailment=MockEntailmentBackend(
                MOCK_ENTAILMENT, load_nli_fixtures(nli_path), cache),
            embedding=MockEmbeddingBackend(MOCK_EMBEDDING, cache=cache),
            mock=True,
        )
    limiter = TokenBucket(config.rate_limit_per_second)
    return Backends(
        generation=RemoteGenerationBackend(config.generation, cache, limiter),
        entailment=RemoteEntailmentBackend(config.entailment, cache, limiter),
        embedding=RemoteEmbeddingBackend(config.embedding, cache, limiter),
        mock=False,
    )

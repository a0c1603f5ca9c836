"""Run directories: manifest, stage registry, and artifact paths.

One directory per run holds every artifact a pipeline produces: the
manifest, per-stage line-oriented JSON files, the response cache, and
reports. The run id is derived from the effective configuration, dataset,
and kind, so changing any of them starts a new run rather than silently
mixing artifacts.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

from .config import HarnessConfig, config_hash
from .errors import ValidationError

MANIFEST_NAME = "manifest.json"

# Stage output files, all relative to the run directory.
GENERATED_ATOMS = "generated_atoms.jsonl"
DECOMPOSE_META = "decompose_meta.json"
PRUNED_ATOMS = "pruned_atoms.jsonl"
PRUNE_META = "prune_meta.json"
ANNOTATIONS = "annotations.jsonl"
ANNOTATED_ATOMS = "annotated_atoms.jsonl"
SUBPROBLEMS = "subproblems.jsonl"
CRITICAL_SETS = "critical_sets.jsonl"
NLI_RECORDS = "nli_records.jsonl"
NLI_PREDICTIONS = "nli_predictions.jsonl"
EVAL_NLI_META = "eval_nli_meta.json"
DEFEASIBLE_RECORDS = "defeasible_records.jsonl"
DEFEASIBLE_PREDICTIONS = "defeasible_predictions.jsonl"
EVAL_DEFEASIBLE_META = "eval_defeasible_meta.json"
SIMILARITY_GRAPH = "similarity_graph.json"
BUCKETS = "buckets.jsonl"
GROUP_META = "group_meta.json"
REPORTS_DIR = "reports"


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


@dataclass
class RunManifest:
    run_id: str
    kind: str
    dataset: str
    mock: bool
    config_hash: str
    config: dict
    created_at: str
    updated_at: str
    stages: Dict[str, dict] = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "run_id": self.run_id,
            "kind": self.kind,
            "dataset": self.dataset,
            "mock": self.mock,
            "config_hash": self.config_hash,
            "config": self.config,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "stages": self.stages,
        }

    @classmethod
    def from_record(cls, record: dict) -> "RunManifest":
        return cls(**record)


class Run:
    """Handle on one run directory."""

    def __init__(self, directory: Union[str, Path], manifest: RunManifest):
        self.directory = Path(directory)
        self.manifest = manifest

    @property
    def cache_dir(self) -> Path:
        return self.directory / "cache"

    def path(self, name: str) -> Path:
        return self.directory / name

    def reports_path(self, name: str) -> Path:
        return self.directory / REPORTS_DIR / name

    def save_manifest(self) -> None:
        self.manifest.updated_at = _now()
        self.directory.mkdir(parents=True, exist_ok=True)
        payload = json.dumps(self.manifest.to_record(), indent=2, sort_keys=True)
        (self.directory / MANIFEST_NAME).write_text(payload + "\n", encoding="utf-8")

    def record_stage(self, stage: str, outputs: List[str]) -> None:
        missing = [name for name in outputs if not self.path(name).exists()]
        if missing:
            raise ValidationError(
                f"stage '{stage}' claims outputs that do not exist: {', '.join(missing)}"
            )
        self.manifest.stages[stage] = {
            "outputs": sorted(outputs),
            "run_id": self.manifest.run_id,
            "completed_at": _now(),
        }
        self.save_manifest()

    def require_stage(self, stage: str) -> None:
        if stage not in self.manifest.stages:
            raise ValidationError(
                f"run {self.manifest.run_id} is missing stage '{stage}'; run it first"
            )
        for name in self.manifest.stages[stage]["outputs"]:
            if not self.path(name).exists():
                raise ValidationError(
                    f"stage '{stage}' output {name} is missing from {self.directory}"
                )

    def has_stage(self, stage: str) -> bool:
        return stage in self.manifest.stages


def create_run(
    directory: Union[str, Path],
    config: HarnessConfig,
    dataset: Union[str, Path],
    kind: str,
    mock: bool,
) -> Run:
    """Create a run directory, or re-open it if the configuration matches.

    A changed effective config forces a new run id, so re-using the
    directory with different settings is refused rather than mixing
    artifacts of different provenance.
    """
    directory = Path(directory)
    digest = config_hash(config, str(dataset), kind, mock)
    run_id = f"{kind}-{Path(dataset).stem}-{digest}"
    manifest_path = directory / MANIFEST_NAME
    if manifest_path.exists():
        existing = load_run(directory)
        if existing.manifest.run_id != run_id:
            raise ValidationError(
                f"run directory {directory} belongs to run "
                f"{existing.manifest.run_id}, but the current configuration "
                f"implies {run_id}; use a fresh directory"
            )
        return existing
    now = _now()
    manifest = RunManifest(
        run_id=run_id,
        kind=kind,
        dataset=str(dataset),
        mock=mock,
        config_hash=digest,
        config=config.to_record(),
        created_at=now,
        updated_at=now,
    )
    run = Run(directory, manifest)
    run.save_manifest()
    run.cache_dir.mkdir(parents=True, exist_ok=True)
    return run


def load_run(directory: Union[str, Path]) -> Run:
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise ValidationError(f"no run manifest in {directory}; run 'decompose' first")
    record = json.loads(manifest_path.read_text(encoding="utf-8"))
    return Run(directory, RunManifest.from_record(record))


def open_run_for(
    directory: Union[str, Path],
    config: HarnessConfig,
    mock: bool,
    expected_kind: Optional[str] = None,
) -> Run:
    """Open an existing run and verify it matches the effective config."""
    run = load_run(directory)
    digest = config_hash(config, run.manifest.dataset, run.manifest.kind, mock)
    if digest != run.manifest.config_hash:
        raise ValidationError(
            f"configuration changed (hash {digest} != {run.manifest.config_hash}); "
            "config changes force a new run id, use a fresh directory"
        )
    if expected_kind and run.manifest.kind != expected_kind:
        raise ValidationError(
            f"run {run.manifest.run_id} is a {run.manifest.kind} run, "
            f"but this stage needs kind '{expected_kind}'"
        )
    return run


def write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_json(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))

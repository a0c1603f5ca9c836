"""Dataset ingestion: line-oriented JSON files of examples."""
from __future__ import annotations

import json
from pathlib import Path
from typing import List, Union

from .core import DefeasibleExample, NliExample
from .errors import IntegrityError, ValidationError

KIND_NLI = "nli"
KIND_DEFEASIBLE = "defeasible"

_REQUIRED_FIELDS = {
    KIND_NLI: ("id", "premise", "hypothesis", "gold"),
    KIND_DEFEASIBLE: ("id", "premise", "hypothesis", "update", "gold"),
}


def load_dataset(path: Union[str, Path], kind: str) -> List:
    """Read and validate a dataset file, one JSON object per line.

    Errors name the offending line number and field; a duplicate id is an
    integrity error at its second occurrence.
    """
    if kind not in _REQUIRED_FIELDS:
        raise ValidationError(f"unknown dataset kind: {kind!r}")
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"dataset file not found: {path}")
    examples = []
    seen = {}
    with path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: line {line_number}: not valid JSON ({exc.msg})")
            for field in _REQUIRED_FIELDS[kind]:
                if field not in record:
                    raise ValidationError(
                        f"{path}: line {line_number}: missing field '{field}'"
                    )
            try:
                if kind == KIND_NLI:
                    example = NliExample.from_record(record)
                else:
                    example = DefeasibleExample.from_record(record)
            except ValidationError as exc:
                raise ValidationError(f"{path}: line {line_number}: {exc}")
            if example.id in seen:
                raise IntegrityError(
                    f"{path}: line {line_number}: duplicate id '{example.id}' "
                    f"(first seen on line {seen[example.id]})"
                )
            seen[example.id] = line_number
            examples.append(example)
    return examples

"""Canonical data types and label algebras shared by every pipeline stage.

All values here are immutable after construction and serialize to a single
JSON object per record (one record per line in dataset, atom, and
prediction files).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from .errors import ValidationError


class NliLabel(str, Enum):
    """Three-way inference label, serialized as single characters."""

    ENTAILMENT = "e"
    NEUTRAL = "n"
    CONTRADICTION = "c"

    @classmethod
    def parse(cls, raw: str) -> "NliLabel":
        try:
            return cls(raw)
        except ValueError:
            raise ValidationError(f"not an NLI label: {raw!r} (expected e, n or c)")


class DefeasibleLabel(str, Enum):
    """Binary effect of an update on a hypothesis."""

    STRENGTHENER = "strengthener"
    WEAKENER = "weakener"

    @classmethod
    def parse(cls, raw: str) -> "DefeasibleLabel":
        try:
            return cls(raw)
        except ValueError:
            raise ValidationError(f"not a defeasible label: {raw!r}")


class TernaryEffect(str, Enum):
    """Direction of an update's effect on one proposition."""

    MORE = "more"
    LESS = "less"
    NONE = "none"

    @classmethod
    def parse(cls, raw: str) -> "TernaryEffect":
        try:
            return cls(raw)
        except ValueError:
            raise ValidationError(f"not a ternary effect: {raw!r}")


_EFFECT_VALUES = (-2, -1, 0, 1, 2)


@dataclass(frozen=True)
class EffectScore:
    """Five-point effect of an update on one atom, or the invalid sentinel.

    ``value`` is an integer in [-2, +2]; ``None`` encodes an atom that was
    rejected at annotation time. The sentinel is stored, never dropped, so
    reports can state how many generations were rejected.
    """

    value: Optional[int]

    def __post_init__(self):
        if self.value is not None and self.value not in _EFFECT_VALUES:
            raise ValidationError(f"effect score out of range: {self.value}")

    @classmethod
    def invalid(cls) -> "EffectScore":
        return cls(None)

    @property
    def is_invalid(self) -> bool:
        return self.value is None

    @property
    def sign(self) -> int:
        if self.value is None:
            raise ValidationError("invalid atom has no effect class")
        return (self.value > 0) - (self.value < 0)

    def serialize(self) -> Union[int, str]:
        return "invalid" if self.value is None else self.value

    @classmethod
    def parse(cls, raw: Union[int, str]) -> "EffectScore":
        if raw == "invalid":
            return cls.invalid()
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ValidationError(f"not an effect score: {raw!r}")
        return cls(raw)


def ternary_of_effect(score: EffectScore) -> TernaryEffect:
    """Collapse a five-point effect to its direction: more, less or none."""
    sign = score.sign
    if sign > 0:
        return TernaryEffect.MORE
    if sign < 0:
        return TernaryEffect.LESS
    return TernaryEffect.NONE


def binary_of_effect(score: EffectScore) -> Optional[DefeasibleLabel]:
    """Same sign rule as :func:`ternary_of_effect`, surfaced as a
    strengthener/weakener label; a zero effect returns ``None``."""
    sign = score.sign
    if sign > 0:
        return DefeasibleLabel.STRENGTHENER
    if sign < 0:
        return DefeasibleLabel.WEAKENER
    return None


def normalize_atom_text(text: str) -> str:
    """Normalization used for atom identity: lowercase, collapse internal
    whitespace, strip one trailing period."""
    collapsed = " ".join(text.split()).lower()
    if collapsed.endswith("."):
        collapsed = collapsed[:-1]
    return collapsed


def atom_id_for(parent_example_id: str, text: str) -> str:
    """Deterministic atom identifier: hash of the parent example id and the
    normalized atom text. Stable across runs and platforms."""
    digest = hashlib.sha256(
        f"{parent_example_id}\x1f{normalize_atom_text(text)}".encode("utf-8")
    )
    return digest.hexdigest()[:16]


def _require_nonempty(record_name: str, **fields: str) -> None:
    for name, value in fields.items():
        if not isinstance(value, str) or not value.strip():
            raise ValidationError(f"{record_name}: field '{name}' must be non-empty text")


@dataclass(frozen=True)
class NliExample:
    """A premise/hypothesis pair with a three-way gold label."""

    id: str
    premise: str
    hypothesis: str
    gold: NliLabel

    def __post_init__(self):
        _require_nonempty("NliExample", id=self.id, premise=self.premise, hypothesis=self.hypothesis)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "premise": self.premise,
            "hypothesis": self.hypothesis,
            "gold": self.gold.value,
        }

    @classmethod
    def from_record(cls, record: dict) -> "NliExample":
        return cls(
            id=record["id"],
            premise=record["premise"],
            hypothesis=record["hypothesis"],
            gold=NliLabel.parse(record["gold"]),
        )


@dataclass(frozen=True)
class DefeasibleExample:
    """A premise/hypothesis/update triple with a binary gold label."""

    id: str
    premise: str
    hypothesis: str
    update: str
    gold: DefeasibleLabel

    def __post_init__(self):
        _require_nonempty(
            "DefeasibleExample",
            id=self.id,
            premise=self.premise,
            hypothesis=self.hypothesis,
            update=self.update,
        )

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "premise": self.premise,
            "hypothesis": self.hypothesis,
            "update": self.update,
            "gold": self.gold.value,
        }

    @classmethod
    def from_record(cls, record: dict) -> "DefeasibleExample":
        return cls(
            id=record["id"],
            premise=record["premise"],
            hypothesis=record["hypothesis"],
            update=record["update"],
            gold=DefeasibleLabel.parse(record["gold"]),
        )


@dataclass(frozen=True)
class Atom:
    """One propositional decomposition of a hypothesis.

    ``machine_valid`` is set by classifier pruning, ``human_valid`` by
    annotation; either may be absent if that stage has not run.
    ``effect_gold`` is present only for human-valid defeasible atoms.
    """

    atom_id: str
    parent_example_id: str
    text: str
    machine_valid: Optional[bool] = None
    human_valid: Optional[bool] = None
    effect_gold: Optional[EffectScore] = None

    def __post_init__(self):
        _require_nonempty("Atom", atom_id=self.atom_id, parent_example_id=self.parent_example_id, text=self.text)
        if self.effect_gold is not None and self.human_valid is not True:
            raise ValidationError(
                f"Atom {self.atom_id}: effect_gold is only legal on human-valid atoms"
            )

    @classmethod
    def create(cls, parent_example_id: str, text: str) -> "Atom":
        return cls(
            atom_id=atom_id_for(parent_example_id, text),
            parent_example_id=parent_example_id,
            text=text,
        )

    def to_record(self) -> dict:
        return {
            "atom_id": self.atom_id,
            "parent_example_id": self.parent_example_id,
            "text": self.text,
            "machine_valid": self.machine_valid,
            "human_valid": self.human_valid,
            "effect_gold": None if self.effect_gold is None else self.effect_gold.serialize(),
        }

    @classmethod
    def from_record(cls, record: dict) -> "Atom":
        effect = record.get("effect_gold")
        return cls(
            atom_id=record["atom_id"],
            parent_example_id=record["parent_example_id"],
            text=record["text"],
            machine_valid=record.get("machine_valid"),
            human_valid=record.get("human_valid"),
            effect_gold=None if effect is None else EffectScore.parse(effect),
        )


@dataclass(frozen=True)
class Prediction:
    """One model decision about a full example or an atomic sub-problem.

    ``raw_response`` keeps the backend's completion verbatim so every
    parsed label stays auditable.
    """

    subject: str
    predicted: str
    raw_response: str
    backend_id: str

    def to_record(self) -> dict:
        return {
            "subject": self.subject,
            "predicted": self.predicted,
            "raw_response": self.raw_response,
            "backend_id": self.backend_id,
        }

    @classmethod
    def from_record(cls, record: dict) -> "Prediction":
        return cls(
            subject=record["subject"],
            predicted=record["predicted"],
            raw_response=record["raw_response"],
            backend_id=record["backend_id"],
        )


def write_jsonl(path: Union[str, Path], records: Iterable[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            handle.write("\n")


def read_jsonl(path: Union[str, Path]) -> Iterator[dict]:
    with Path(path).open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: line {line_number}: not valid JSON ({exc.msg})")

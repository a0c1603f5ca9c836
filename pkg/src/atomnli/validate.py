"""Machine pruning of candidate atoms and ingestion of human annotations.

Stage 1 keeps atoms the classifier judges entailed by the hypothesis;
stage 2 (defeasible pipelines only) drops atoms entailed by the premise.
Human annotation then assigns validity and, for defeasible atoms, a
five-point effect score. Annotation never resurrects a machine-pruned
atom.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .backends import EntailmentBackend
from .core import Atom, EffectScore, NliLabel
from .errors import IntegrityError, ValidationError

PRIMARY_ANNOTATOR = "a1"


@dataclass(frozen=True)
class AnnotationRecord:
    """One annotator's judgment of one atom.

    ``effect`` must be present iff ``valid`` is true and the parent
    example is defeasible. Later submissions by the same annotator for the
    same atom supersede earlier ones.
    """

    atom_id: str
    annotator_id: str
    valid: bool
    effect: Optional[EffectScore] = None
    timestamp: str = ""

    def __post_init__(self):
        if not self.atom_id or not self.annotator_id:
            raise ValidationError("annotation record needs atom_id and annotator_id")
        if not self.valid and self.effect is not None and not self.effect.is_invalid:
            raise ValidationError(
                f"annotation for {self.atom_id}: invalid atoms cannot carry an effect"
            )

    def to_record(self) -> dict:
        return {
            "atom_id": self.atom_id,
            "annotator_id": self.annotator_id,
            "valid": self.valid,
            "effect": None if self.effect is None else self.effect.serialize(),
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_record(cls, record: dict) -> "AnnotationRecord":
        effect = record.get("effect")
        return cls(
            atom_id=record["atom_id"],
            annotator_id=record["annotator_id"],
            valid=bool(record["valid"]),
            effect=None if effect is None else EffectScore.parse(effect),
            timestamp=record.get("timestamp", ""),
        )


def prune_by_hypothesis(atom: Atom, hypothesis: str, nli: EntailmentBackend) -> bool:
    """Keep an atom only if the classifier says the hypothesis entails it."""
    if not atom.text.strip():
        raise ValidationError(f"atom {atom.atom_id} has empty text")
    return nli.classify(hypothesis, atom.text) == NliLabel.ENTAILMENT


def prune_by_premise(atom: Atom, premise: str, nli: EntailmentBackend) -> bool:
    """Keep an atom only if it is NOT entailed by the premise.

    Defeasible pipelines only: updates there act on information the
    premise does not already establish.
    """
    if not atom.text.strip():
        raise ValidationError(f"atom {atom.atom_id} has empty text")
    return nli.classify(premise, atom.text) != NliLabel.ENTAILMENT


def latest_by_annotator(
    records: Sequence[AnnotationRecord],
) -> Dict[Tuple[str, str], AnnotationRecord]:
    """Collapse a record log to the last submission per (atom, annotator)."""
    latest: Dict[Tuple[str, str], AnnotationRecord] = {}
    for record in records:
        latest[(record.atom_id, record.annotator_id)] = record
    return latest


def apply_annotations(
    atoms: Sequence[Atom],
    records: Sequence[AnnotationRecord],
    primary_annotator: str = PRIMARY_ANNOTATOR,
) -> List[Atom]:
    """Populate human_valid and effect_gold from annotation records.

    The designated primary annotator's record wins; other annotators'
    records are retained in the log for agreement statistics but do not
    touch the atoms. Machine fields are left untouched, and a record can
    never resurrect a machine-pruned atom.
    """
    by_id = {atom.atom_id: atom for atom in atoms}
    unresolved = sorted({r.atom_id for r in records} - set(by_id))
    if unresolved:
        raise IntegrityError(
            "annotation records reference unknown atoms: " + ", ".join(unresolved)
        )

    chosen: Dict[str, AnnotationRecord] = {}
    for (atom_id, annotator_id), record in latest_by_annotator(records).items():
        if annotator_id == primary_annotator:
            chosen[atom_id] = record

    updated = []
    for atom in atoms:
        record = chosen.get(atom.atom_id)
        if record is None:
            updated.append(atom)
            continue
        if atom.machine_valid is False:
            raise IntegrityError(
                f"atom {atom.atom_id} was machine-pruned; annotation cannot resurrect it"
            )
        valid = record.valid
        effect = record.effect if valid else None
        if effect is not None and effect.is_invalid:
            effect = None
        updated.append(replace(atom, human_valid=valid, effect_gold=effect))
    return updated

"""Traditional-NLI evaluation over full examples and atomic sub-problems.

The evaluated model first judges, for each atom, whether the hypothesis
entails it; atoms it admits form its own sub-problem set. Consistency
between the full premise/hypothesis prediction and the premise/atom
predictions follows three rules:

  entailment    -> every admitted atom predicted entailed
  contradiction -> at least one admitted atom predicted contradicting
  neutral       -> at least one neutral admitted atom, none contradicting

A label can also be induced purely from atom predictions: entailment if
all atoms entailed, contradiction if any contradicts, neutral otherwise.
"""
from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .backends import GenerationBackend
from .core import Atom, NliExample, NliLabel, Prediction
from .errors import IntegrityError, ValidationError
from .resources import data_path, prompt_template

END_MARKER = "[END]"

# First standalone e/n/c token, case-insensitive, scanning line by line.
_LABEL_TOKEN = re.compile(r"(?i)(?<![a-z0-9])([enc])(?![a-z0-9])")


@dataclass(frozen=True)
class NliContextExample:
    """One in-context exemplar for the three-way evaluation prompt."""

    premise: str
    hypothesis: str
    label: NliLabel
    explanation: str


def load_nli_context(path: Union[str, Path, None] = None) -> List[NliContextExample]:
    path = Path(path) if path else data_path("exemplars", "nli_context.json")
    records = json.loads(path.read_text(encoding="utf-8"))
    return [
        NliContextExample(
            premise=r["premise"],
            hypothesis=r["hypothesis"],
            label=NliLabel.parse(r["label"]),
            explanation=r["explanation"],
        )
        for r in records
    ]


def build_nli_prompt(
    premise: str, hypothesis: str, context: Sequence[NliContextExample]
) -> str:
    """Render the three-way prompt with in-context exemplars ahead of the
    target pair."""
    if not premise.strip() or not hypothesis.strip():
        raise ValidationError("premise and hypothesis must be non-empty")
    blocks = []
    for ex in context:
        blocks.append(
            f"Premise: {ex.premise}\nHypothesis:{ex.hypothesis}\n\n"
            "Is the hypothesis entailed by, contradicted by, or neutral with "
            f"respect to the premise?\n{ex.label.value}\n{ex.explanation}\n{END_MARKER}\n\n"
        )
    return prompt_template("nli").format(
        exemplars="".join(blocks), premise=premise, hypothesis=hypothesis
    )


def parse_nli_response(raw: str) -> Optional[NliLabel]:
    """Total parser: first standalone e/n/c token before the end marker,
    or None when no label can be found."""
    index = raw.find(END_MARKER)
    body = raw if index < 0 else raw[:index]
    for line in body.splitlines():
        match = _LABEL_TOKEN.search(line)
        if match:
            return NliLabel(match.group(1).lower())
    return None


@dataclass(frozen=True)
class NliEvaluationRecord:
    """Everything needed to audit one example's consistency.

    ``consistent`` and ``induced`` are recomputable from the predictions
    alone; both are None when the model admitted zero atoms, and such
    examples are excluded from consistency denominators.
    """

    example_id: str
    full_prediction: NliLabel
    admitted_atoms: Tuple[str, ...]
    atom_predictions: Dict[str, NliLabel]
    consistent: Optional[bool]
    induced: Optional[NliLabel]

    def __post_init__(self):
        if set(self.admitted_atoms) != set(self.atom_predictions):
            raise IntegrityError(
                f"record {self.example_id}: atom_predictions keys must equal admitted_atoms"
            )

    def to_record(self) -> dict:
        return {
            "example_id": self.example_id,
            "full_prediction": self.full_prediction.value,
            "admitted_atoms": list(self.admitted_atoms),
            "atom_predictions": {k: v.value for k, v in sorted(self.atom_predictions.items())},
            "consistent": self.consistent,
            "induced": None if self.induced is None else self.induced.value,
        }

    @classmethod
    def from_record(cls, record: dict) -> "NliEvaluationRecord":
        return cls(
            example_id=record["example_id"],
            full_prediction=NliLabel.parse(record["full_prediction"]),
            admitted_atoms=tuple(record["admitted_atoms"]),
            atom_predictions={
                k: NliLabel.parse(v) for k, v in record["atom_predictions"].items()
            },
            consistent=record["consistent"],
            induced=None if record["induced"] is None else NliLabel.parse(record["induced"]),
        )


def check_consistency(full: NliLabel, atom_labels: Sequence[NliLabel]) -> bool:
    """Do the atom-level predictions logically support the full one?"""
    if not atom_labels:
        raise ValidationError("check_consistency needs at least one atom label")
    if full == NliLabel.ENTAILMENT:
        return all(label == NliLabel.ENTAILMENT for label in atom_labels)
    if full == NliLabel.CONTRADICTION:
        return any(label == NliLabel.CONTRADICTION for label in atom_labels)
    return any(label == NliLabel.NEUTRAL for label in atom_labels) and not any(
        label == NliLabel.CONTRADICTION for label in atom_labels
    )


def induce_label(atom_labels: Sequence[NliLabel]) -> NliLabel:
    """Overall label induced purely from atom predictions."""
    if not atom_labels:
        raise ValidationError("induce_label needs at least one atom label")
    if all(label == NliLabel.ENTAILMENT for label in atom_labels):
        return NliLabel.ENTAILMENT
    if any(label == NliLabel.CONTRADICTION for label in atom_labels):
        return NliLabel.CONTRADICTION
    return NliLabel.NEUTRAL


@dataclass
class NliEvaluationResult:
    records: List[NliEvaluationRecord] = field(default_factory=list)
    predictions: List[Prediction] = field(default_factory=list)
    parse_failures: int = 0
    zero_atom_examples: List[str] = field(default_factory=list)


def admit_atoms(
    hypothesis: str,
    atoms: Sequence[Atom],
    gen: GenerationBackend,
    context: Sequence[NliContextExample],
) -> List[str]:
    """Atom ids the model itself judges entailed by the hypothesis."""
    admitted = []
    for atom in atoms:
        raw = gen.generate(build_nli_prompt(hypothesis, atom.text, context))
        if parse_nli_response(raw) == NliLabel.ENTAILMENT:
            admitted.append(atom.atom_id)
    return admitted


def _label_or_neutral(raw: str, result: NliEvaluationResult) -> NliLabel:
    label = parse_nli_response(raw)
    if label is None:
        result.parse_failures += 1
        return NliLabel.NEUTRAL
    return label


def _evaluate_one(
    example: NliExample,
    atoms: Sequence[Atom],
    gen: GenerationBackend,
    context: Sequence[NliContextExample],
) -> Tuple[NliEvaluationRecord, List[Prediction], int, bool]:
    backend_id = gen.descriptor.backend_id
    predictions: List[Prediction] = []
    parse_failures = 0

    raw_full = gen.generate(build_nli_prompt(example.premise, example.hypothesis, context))
    full = parse_nli_response(raw_full)
    if full is None:
        parse_failures += 1
        full = NliLabel.NEUTRAL
    predictions.append(
        Prediction(f"example:{example.id}:full", full.value, raw_full, backend_id)
    )

    admitted: List[str] = []
    atom_labels: Dict[str, NliLabel] = {}
    for atom in atoms:
        raw_admit = gen.generate(build_nli_prompt(example.hypothesis, atom.text, context))
        admit_label = parse_nli_response(raw_admit)
        if admit_label is None:
            parse_failures += 1
            admit_label = NliLabel.NEUTRAL
        predictions.append(
            Prediction(f"atom:{atom.atom_id}:admit", admit_label.value, raw_admit, backend_id)
        )
        if admit_label != NliLabel.ENTAILMENT:
            continue
        admitted.append(atom.atom_id)
        raw_atom = gen.generate(build_nli_prompt(example.premise, atom.text, context))
        atom_label = parse_nli_response(raw_atom)
        if atom_label is None:
            parse_failures += 1
            atom_label = NliLabel.NEUTRAL
        predictions.append(
            Prediction(f"atom:{atom.atom_id}:vs-premise", atom_label.value, raw_atom, backend_id)
        )
        atom_labels[atom.atom_id] = atom_label

    labels = [atom_labels[a] for a in admitted]
    record = NliEvaluationRecord(
        example_id=example.id,
        full_prediction=full,
        admitted_atoms=tuple(admitted),
        atom_predictions=atom_labels,
        consistent=check_consistency(full, labels) if labels else None,
        induced=induce_label(labels) if labels else None,
    )
    return record, predictions, parse_failures, not labels


def evaluate_nli(
    examples: Sequence[NliExample],
    atoms_by_example: Mapping[str, Sequence[Atom]],
    gen: GenerationBackend,
    context: Sequence[NliContextExample],
    parallelism: int = 1,
) -> NliEvaluationResult:
    """Run the full evaluation; output order is deterministic (sorted by
    example id) regardless of worker scheduling."""
    result = NliEvaluationResult()
    ordered = sorted(examples, key=lambda e: e.id)

    def work(example: NliExample):
        return _evaluate_one(example, atoms_by_example.get(example.id, ()), gen, context)

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(work, ordered))
    else:
        outcomes = [work(example) for example in ordered]

    for (record, predictions, failures, zero_atoms), example in zip(outcomes, ordered):
        result.records.append(record)
        result.predictions.extend(predictions)
        result.parse_failures += failures
        if zero_atoms:
            result.zero_atom_examples.append(example.id)
    return result


def _percent(numerator: int, denominator: int) -> Optional[float]:
    if denominator == 0:
        return None
    return 100.0 * numerator / denominator


def consistency_report(
    records: Sequence[NliEvaluationRecord],
    gold: Mapping[str, NliLabel],
    parse_failures: int = 0,
) -> dict:
    """Aggregate metrics: accuracy, overall consistency, consistency split
    by full-prediction correctness and by predicted label, and the
    induced-label accuracy. Examples whose model admitted zero atoms are
    excluded from consistency denominators and counted separately."""
    missing = sorted(r.example_id for r in records if r.example_id not in gold)
    if missing:
        raise IntegrityError("no gold label for examples: " + ", ".join(missing))

    total = len(records)
    scored = [r for r in records if r.consistent is not None]
    correct_full = [r for r in records if r.full_prediction == gold[r.example_id]]

    def consistency_over(subset: Sequence[NliEvaluationRecord]) -> Optional[float]:
        return _percent(sum(1 for r in subset if r.consistent), len(subset))

    by_label = {}
    for label in NliLabel:
        subset = [r for r in scored if r.full_prediction == label]
        by_label[label.name.lower()] = consistency_over(subset)

    induced_correct = sum(1 for r in scored if r.induced == gold[r.example_id])

    return {
        "examples_total": total,
        "examples_with_admitted_atoms": len(scored),
        "zero_atom_examples_excluded": total - len(scored),
        "full_example_accuracy": _percent(len(correct_full), total),
        "overall_logical_consistency": consistency_over(scored),
        "consistency_on_correct_examples": consistency_over(
            [r for r in scored if r.full_prediction == gold[r.example_id]]
        ),
        "consistency_on_incorrect_examples": consistency_over(
            [r for r in scored if r.full_prediction != gold[r.example_id]]
        ),
        "logical_consistency_by_label": by_label,
        "induced_atom_label_accuracy": _percent(induced_correct, len(scored)),
        "parse_failures": parse_failures,
    }

"""Defeasible-NLI sub-problems, critical atoms, and the metric suite.

Each human-valid atom of a hypothesis yields one sub-problem: does the
update strengthen, weaken, or leave the atom unchanged? The critical
atoms of an example are the valid atoms with the strongest gold effect
whose sign matches the example's overall label; they carry the inference
the example primarily tests.

Models answer with a direction only, so a sub-problem is scored by sign
agreement between the predicted direction and the five-point gold score.
"""
from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Union

from .backends import GenerationBackend
from .core import (
    Atom,
    DefeasibleExample,
    DefeasibleLabel,
    EffectScore,
    Prediction,
    TernaryEffect,
)
from .errors import IntegrityError, ValidationError
from .resources import data_path, prompt_template

END_MARKER = "[END]"

_ANSWER_TOKEN = re.compile(r"(?i)(?<![a-z0-9])(more|less|none)(?![a-z0-9])")


@dataclass(frozen=True)
class DefeasibleContextExample:
    premise: str
    hypothesis: str
    update: str
    answer: TernaryEffect
    explanation: str


def load_defeasible_context(
    path: Union[str, Path, None] = None, atoms: bool = False
) -> List[DefeasibleContextExample]:
    name = "defeasible_atom_context.json" if atoms else "defeasible_context.json"
    path = Path(path) if path else data_path("exemplars", name)
    records = json.loads(path.read_text(encoding="utf-8"))
    return [
        DefeasibleContextExample(
            premise=r["premise"],
            hypothesis=r["hypothesis"],
            update=r["update"],
            answer=TernaryEffect.parse(r["answer"]),
            explanation=r["explanation"],
        )
        for r in records
    ]


def build_defeasible_prompt(
    premise: str,
    hypothesis: str,
    update: str,
    context: Sequence[DefeasibleContextExample],
    ternary: bool,
) -> str:
    """Render the update-effect prompt; the ternary variant admits 'none'
    and is used for atomic sub-problems."""
    if not premise.strip() or not hypothesis.strip() or not update.strip():
        raise ValidationError("premise, hypothesis and update must be non-empty")
    question = (
        "Does the evidence make the hypothesis about the situation more or "
        "less likely to be true?"
    )
    blocks = []
    for ex in context:
        blocks.append(
            f"Situation: {ex.premise}\n\nHypothesis: {ex.hypothesis}\n"
            f"Evidence: {ex.update}\n\n{question}\n"
            f"{ex.answer.value}\n{ex.explanation}\n{END_MARKER}\n\n"
        )
    template = prompt_template("defeasible_ternary" if ternary else "defeasible_binary")
    return template.format(
        exemplars="".join(blocks), context=premise, hypothesis=hypothesis, evidence=update
    )


def parse_defeasible_response(raw: str, ternary: bool) -> Optional[TernaryEffect]:
    """Total parser: first standalone more/less (/none when ternary) token
    before the end marker, None when absent."""
    index = raw.find(END_MARKER)
    body = raw if index < 0 else raw[:index]
    for line in body.splitlines():
        for match in _ANSWER_TOKEN.finditer(line):
            effect = TernaryEffect(match.group(1).lower())
            if effect == TernaryEffect.NONE and not ternary:
                continue
            return effect
    return None


@dataclass(frozen=True)
class DefeasibleSubProblem:
    """One (premise, atom, update) inference item with its gold effect."""

    example_id: str
    atom_id: str
    premise: str
    atom_text: str
    update: str
    gold_effect: EffectScore

    def to_record(self) -> dict:
        return {
            "example_id": self.example_id,
            "atom_id": self.atom_id,
            "premise": self.premise,
            "atom_text": self.atom_text,
            "update": self.update,
            "gold_effect": self.gold_effect.serialize(),
        }

    @classmethod
    def from_record(cls, record: dict) -> "DefeasibleSubProblem":
        return cls(
            example_id=record["example_id"],
            atom_id=record["atom_id"],
            premise=record["premise"],
            atom_text=record["atom_text"],
            update=record["update"],
            gold_effect=EffectScore.parse(record["gold_effect"]),
        )


def build_subproblems(
    example: DefeasibleExample, atoms: Sequence[Atom]
) -> List[DefeasibleSubProblem]:
    """One sub-problem per human-valid atom, ordered by atom id. A valid
    atom without a gold effect is an integrity error; an example with no
    valid atoms yields an empty list for the caller to flag."""
    problems = []
    for atom in sorted(atoms, key=lambda a: a.atom_id):
        if atom.parent_example_id != example.id or atom.human_valid is not True:
            continue
        if atom.effect_gold is None or atom.effect_gold.is_invalid:
            raise IntegrityError(f"valid atom {atom.atom_id} is missing its gold effect")
        problems.append(
            DefeasibleSubProblem(
                example_id=example.id,
                atom_id=atom.atom_id,
                premise=example.premise,
                atom_text=atom.text,
                update=example.update,
                gold_effect=atom.effect_gold,
            )
        )
    return problems


@dataclass(frozen=True)
class CriticalAtomSet:
    """Atoms with the strongest polarity-matching effect for one example.

    Empty sets are legal and flagged: no atom's gold effect points in the
    direction of the example's overall label (usually a flawed source
    example)."""

    example_id: str
    atom_ids: FrozenSet[str]
    polarity: DefeasibleLabel
    magnitude: Optional[int]

    @property
    def empty(self) -> bool:
        return not self.atom_ids

    def to_record(self) -> dict:
        return {
            "example_id": self.example_id,
            "atom_ids": sorted(self.atom_ids),
            "polarity": self.polarity.value,
            "magnitude": self.magnitude,
        }

    @classmethod
    def from_record(cls, record: dict) -> "CriticalAtomSet":
        return cls(
            example_id=record["example_id"],
            atom_ids=frozenset(record["atom_ids"]),
            polarity=DefeasibleLabel.parse(record["polarity"]),
            magnitude=record["magnitude"],
        )


def identify_critical_atoms(
    example: DefeasibleExample, subproblems: Sequence[DefeasibleSubProblem]
) -> CriticalAtomSet:
    """Select all atoms attaining the maximum |effect| among those whose
    effect sign matches the example's gold polarity."""
    wanted_sign = 1 if example.gold == DefeasibleLabel.STRENGTHENER else -1
    matching = [
        p for p in subproblems
        if p.example_id == example.id and p.gold_effect.sign == wanted_sign
    ]
    if not matching:
        return CriticalAtomSet(example.id, frozenset(), example.gold, None)
    magnitude = max(abs(p.gold_effect.value) for p in matching)
    atom_ids = frozenset(
        p.atom_id for p in matching if abs(p.gold_effect.value) == magnitude
    )
    return CriticalAtomSet(example.id, atom_ids, example.gold, magnitude)


@dataclass(frozen=True)
class DefeasibleEvaluationRecord:
    example_id: str
    full_prediction: TernaryEffect
    atom_predictions: Dict[str, TernaryEffect]

    def to_record(self) -> dict:
        return {
            "example_id": self.example_id,
            "full_prediction": self.full_prediction.value,
            "atom_predictions": {k: v.value for k, v in sorted(self.atom_predictions.items())},
        }

    @classmethod
    def from_record(cls, record: dict) -> "DefeasibleEvaluationRecord":
        return cls(
            example_id=record["example_id"],
            full_prediction=TernaryEffect.parse(record["full_prediction"]),
            atom_predictions={
                k: TernaryEffect.parse(v) for k, v in record["atom_predictions"].items()
            },
        )


@dataclass
class DefeasibleEvaluationResult:
    records: List[DefeasibleEvaluationRecord] = field(default_factory=list)
    predictions: List[Prediction] = field(default_factory=list)
    parse_failures: int = 0
    defaulted_full_predictions: List[str] = field(default_factory=list)


def full_prediction_correct(prediction: TernaryEffect, gold: DefeasibleLabel) -> bool:
    return (prediction == TernaryEffect.MORE) == (gold == DefeasibleLabel.STRENGTHENER)


def subproblem_correct(prediction: TernaryEffect, gold_effect: EffectScore) -> bool:
    """Sign-match scoring: gold is five-point, predictions are a direction."""
    sign = gold_effect.sign
    if prediction == TernaryEffect.MORE:
        return sign > 0
    if prediction == TernaryEffect.LESS:
        return sign < 0
    return sign == 0


def evaluate_defeasible(
    examples: Sequence[DefeasibleExample],
    subproblems: Sequence[DefeasibleSubProblem],
    gen: GenerationBackend,
    full_context: Sequence[DefeasibleContextExample],
    atom_context: Sequence[DefeasibleContextExample],
    parallelism: int = 1,
    default_full: TernaryEffect = TernaryEffect.LESS,
) -> DefeasibleEvaluationResult:
    """Predict every full example (binary) and sub-problem (ternary).

    An unparseable full response falls back to ``default_full`` and is
    flagged; an unparseable sub-problem response counts as a parse failure
    and scores as 'none'. Raw responses are kept on every prediction.
    """
    result = DefeasibleEvaluationResult()
    by_example: Dict[str, List[DefeasibleSubProblem]] = {}
    for problem in subproblems:
        by_example.setdefault(problem.example_id, []).append(problem)
    ordered = sorted(examples, key=lambda e: e.id)
    backend_id = gen.descriptor.backend_id

    def work(example: DefeasibleExample):
        predictions = []
        failures = 0
        defaulted = False
        raw_full = gen.generate(
            build_defeasible_prompt(
                example.premise, example.hypothesis, example.update, full_context, ternary=False
            )
        )
        full = parse_defeasible_response(raw_full, ternary=False)
        if full is None:
            failures += 1
            defaulted = True
            full = default_full
        predictions.append(
            Prediction(f"example:{example.id}:full", full.value, raw_full, backend_id)
        )
        atom_preds: Dict[str, TernaryEffect] = {}
        for problem in sorted(by_example.get(example.id, []), key=lambda p: p.atom_id):
            raw = gen.generate(
                build_defeasible_prompt(
                    problem.premise, problem.atom_text, problem.update, atom_context, ternary=True
                )
            )
            effect = parse_defeasible_response(raw, ternary=True)
            if effect is None:
                failures += 1
                effect = TernaryEffect.NONE
            predictions.append(
                Prediction(f"subproblem:{problem.atom_id}", effect.value, raw, backend_id)
            )
            atom_preds[problem.atom_id] = effect
        record = DefeasibleEvaluationRecord(example.id, full, atom_preds)
        return record, predictions, failures, defaulted

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(work, ordered))
    else:
        outcomes = [work(example) for example in ordered]

    for (record, predictions, failures, defaulted), example in zip(outcomes, ordered):
        result.records.append(record)
        result.predictions.extend(predictions)
        result.parse_failures += failures
        if defaulted:
            result.defaulted_full_predictions.append(example.id)
    return result


def _percent(numerator: int, denominator: int) -> Optional[float]:
    if denominator == 0:
        return None
    return 100.0 * numerator / denominator


def table3_metrics(
    records: Sequence[DefeasibleEvaluationRecord],
    examples: Sequence[DefeasibleExample],
    subproblems: Sequence[DefeasibleSubProblem],
    critical_sets: Sequence[CriticalAtomSet],
) -> dict:
    """Accuracy metrics over full examples, all sub-problems, and critical
    sub-problems, plus full-example accuracy conditioned on getting all
    critical sub-problems right (or not).

    Examples with an empty critical set are excluded from the critical and
    conditional columns and counted. Zero-denominator conditionals are
    reported as absent rather than zero.
    """
    gold_by_id = {e.id: e.gold for e in examples}
    missing = sorted(r.example_id for r in records if r.example_id not in gold_by_id)
    if missing:
        raise IntegrityError("no gold label for examples: " + ", ".join(missing))
    record_by_id = {r.example_id: r for r in records}
    effect_by_atom = {p.atom_id: p.gold_effect for p in subproblems}
    critical_by_id = {c.example_id: c for c in critical_sets}

    full_correct = {
        r.example_id: full_prediction_correct(r.full_prediction, gold_by_id[r.example_id])
        for r in records
    }

    atom_results: List[bool] = []
    nonneutral_results: List[bool] = []
    critical_results: List[bool] = []
    for problem in subproblems:
        record = record_by_id.get(problem.example_id)
        if record is None or problem.atom_id not in record.atom_predictions:
            continue
        prediction = record.atom_predictions[problem.atom_id]
        correct = subproblem_correct(prediction, problem.gold_effect)
        atom_results.append(correct)
        if problem.gold_effect.sign != 0:
            nonneutral_results.append(correct)
        critical = critical_by_id.get(problem.example_id)
        if critical is not None and problem.atom_id in critical.atom_ids:
            critical_results.append(correct)

    conditioned = [
        c for c in critical_sets
        if not c.empty and c.example_id in record_by_id
    ]
    critical_all_correct: Dict[str, bool] = {}
    for critical in conditioned:
        record = record_by_id[critical.example_id]
        critical_all_correct[critical.example_id] = all(
            subproblem_correct(record.atom_predictions[a], effect_by_atom[a])
            for a in critical.atom_ids
        )
    crit_right = [eid for eid, ok in critical_all_correct.items() if ok]
    crit_wrong = [eid for eid, ok in critical_all_correct.items() if not ok]

    return {
        "examples_total": len(records),
        "subproblems_total": len(atom_results),
        "empty_critical_excluded": sum(1 for c in critical_sets if c.empty),
        "full_example_accuracy": _percent(sum(full_correct.values()), len(records)),
        "atom_accuracy": _percent(sum(atom_results), len(atom_results)),
        "atom_accuracy_nonneutral": _percent(sum(nonneutral_results), len(nonneutral_results)),
        "critical_atom_accuracy": _percent(sum(critical_results), len(critical_results)),
        "p_full_given_critical_correct": _percent(
            sum(1 for eid in crit_right if full_correct[eid]), len(crit_right)
        ),
        "p_full_given_critical_incorrect": _percent(
            sum(1 for eid in crit_wrong if full_correct[eid]), len(crit_wrong)
        ),
    }

"""Hypothesis decomposition into atoms, and question generation for atoms.

Decomposition is exemplar-prompted generation: a fixed instruction, a
block of hand-written sentence/facts exemplars, and the target sentence.
No parser or role labeler is involved.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

from .backends import GenerationBackend
from .core import Atom, normalize_atom_text
from .errors import ValidationError
from .resources import data_path, prompt_template

logger = logging.getLogger(__name__)

END_MARKER = "[END]"

PURPOSE_DECOMPOSITION = "decomposition"
PURPOSE_QUD = "qud"

# Accepted list markers in generated fact lists: "1.", "1)", "-", "*", none.
_LIST_MARKER = re.compile(r"^\s*(?:\d+\s*[.)]\s*|[-*]\s+)")


@dataclass(frozen=True)
class ExemplarSet:
    """Ordered in-context exemplars for one prompting purpose."""

    purpose: str
    items: Tuple[Tuple[str, Tuple[str, ...]], ...]

    def __post_init__(self):
        if self.purpose not in (PURPOSE_DECOMPOSITION, PURPOSE_QUD):
            raise ValidationError(f"unknown exemplar purpose: {self.purpose!r}")
        if not self.items:
            raise ValidationError("exemplar set must be non-empty")
        for sentence, atoms in self.items:
            if not sentence.strip():
                raise ValidationError("exemplar sentence must be non-empty")
            if not atoms or any(not a.strip() for a in atoms):
                raise ValidationError(f"exemplar for {sentence!r} has no atoms")


@dataclass(frozen=True)
class Qud:
    """The question a single atom answers."""

    atom_id: str
    question: str

    def __post_init__(self):
        if not self.question.strip():
            raise ValidationError("QUD question must be non-empty")

    @property
    def wellformed(self) -> bool:
        return self.question.rstrip().endswith("?")


def load_exemplars(path: Union[str, Path], purpose: str) -> ExemplarSet:
    """Read an exemplar file: a JSON list of {sentence, atoms[]} records."""
    records = json.loads(Path(path).read_text(encoding="utf-8"))
    items = tuple((r["sentence"], tuple(r["atoms"])) for r in records)
    return ExemplarSet(purpose=purpose, items=items)


def default_exemplars(purpose: str) -> ExemplarSet:
    name = "decomposition.json" if purpose == PURPOSE_DECOMPOSITION else "qud.json"
    return load_exemplars(data_path("exemplars", name), purpose)


def build_decomposition_prompt(hypothesis: str, exemplars: ExemplarSet) -> str:
    """Render the fact-generation prompt: instruction, exemplar
    SENTENCE/FACTS blocks, then the target sentence ending at "FACTS:"."""
    if exemplars.purpose != PURPOSE_DECOMPOSITION:
        raise ValidationError("decomposition prompt needs decomposition exemplars")
    if not hypothesis.strip():
        raise ValidationError("hypothesis must be non-empty")
    blocks = []
    for sentence, atoms in exemplars.items:
        facts = "\n".join(f"{i}. {atom}" for i, atom in enumerate(atoms, start=1))
        blocks.append(f"SENTENCE: {sentence}\n\nFACTS:\n{facts}\n{END_MARKER}\n\n")
    return prompt_template("decomposition").format(
        exemplars="".join(blocks), sentence=hypothesis
    )


def build_qud_prompt(sentence: str, exemplars: ExemplarSet) -> str:
    if exemplars.purpose != PURPOSE_QUD:
        raise ValidationError("QUD prompt needs qud exemplars")
    if not sentence.strip():
        raise ValidationError("sentence must be non-empty")
    blocks = [
        f"Sentence: {s}\nQuestion: {atoms[0]}\n\n" for s, atoms in exemplars.items
    ]
    return prompt_template("qud").format(exemplars="".join(blocks), sentence=sentence)


def strip_end_marker(raw: str) -> str:
    """Content before the first end marker, or everything if absent."""
    index = raw.find(END_MARKER)
    return raw if index < 0 else raw[:index]


def parse_atoms(raw: str) -> List[str]:
    """Total parser for generated fact lists.

    Takes content before the first end marker, splits lines, strips list
    numbering and surrounding whitespace, drops empty lines, and
    deduplicates on normalized text while preserving order. Never raises
    on arbitrary text; an empty result is the empty-decomposition signal
    and the caller decides policy.
    """
    seen = set()
    atoms: List[str] = []
    for line in strip_end_marker(raw).splitlines():
        text = _LIST_MARKER.sub("", line).strip()
        if not text:
            continue
        key = normalize_atom_text(text)
        if not key or key in seen:
            continue
        seen.add(key)
        atoms.append(text)
    return atoms


def decompose(
    hypothesis: str,
    gen: GenerationBackend,
    exemplars: ExemplarSet,
    parent_example_id: str,
) -> List[Atom]:
    """Generate, parse, and materialize atoms for one hypothesis.

    Atom ids are deterministic in (parent id, normalized text); output
    order follows the model output. An empty decomposition returns an
    empty list for the caller to flag, never a crash.
    """
    prompt = build_decomposition_prompt(hypothesis, exemplars)
    raw = gen.generate(prompt)
    return [Atom.create(parent_example_id, text) for text in parse_atoms(raw)]


def generate_qud(atom: Atom, gen: GenerationBackend, exemplars: ExemplarSet) -> Qud:
    """Ask the generation backend for the question the atom answers.

    Only human-valid atoms carry a question under discussion. A response
    without a question mark is stored raw with a logged parse warning.
    """
    if atom.human_valid is not True:
        raise ValidationError(f"atom {atom.atom_id} is not human-valid; no QUD")
    raw = gen.generate(build_qud_prompt(atom.text, exemplars))
    lines = [line.strip() for line in strip_end_marker(raw).splitlines() if line.strip()]
    question = lines[0] if lines else raw.strip()
    qud = Qud(atom_id=atom.atom_id, question=question)
    if not qud.wellformed:
        logger.warning("QUD for atom %s has no question mark: %r", atom.atom_id, question)
    return qud


_STOPWORDS = frozenset(
    """a an the and or but of in on at to for with by from as is are was were be
    been being am do does did doing have has had having this that these those
    there here it its it's his her their our your my who whom which what when
    where why how not no nor so than then too very can will just up down out
    over under again once while about against between into through during
    before after above below off he she they we you i them him us""".split()
)


def content_words(text: str) -> List[str]:
    tokens = re.findall(r"[a-z0-9']+", text.lower())
    return [t for t in tokens if t not in _STOPWORDS]


def coverage_gaps(hypothesis: str, atom_texts: Sequence[str]) -> List[str]:
    """Content words of the hypothesis missing from the union of atoms.

    Advisory only: the decomposition recipe tolerates a small rate of
    incompleteness, so gaps are reported, never fatal. Matching is plain
    token equality, no lemmatization.
    """
    from collections import Counter

    need = Counter(content_words(hypothesis))
    have = Counter()
    for text in atom_texts:
        have.update(content_words(text))
    missing = []
    for token, count in sorted(need.items()):
        if have[token] < count:
            missing.append(token)
    return missing

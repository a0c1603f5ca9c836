import json
import pathlib

import pytest

from atomnli.cli import main as cli_main
from atomnli.core import Atom, DefeasibleExample, EffectScore
from atomnli.resources import data_path

DATA_DIR = pathlib.Path(__file__).parent / "data"
GOLDEN_DIR = pathlib.Path(__file__).parent / "golden"

SNLI20 = str(data_path("fixtures", "snli20.jsonl"))
DNLI20 = str(data_path("fixtures", "dnli20.jsonl"))
ANNOTATIONS_DNLI20 = str(data_path("fixtures", "annotations_dnli20.jsonl"))


def run_cli(*args) -> int:
    """Invoke the CLI in-process and return its exit code."""
    return cli_main([str(a) for a in args])


def prepare_defeasible_run(run_dir, through_eval=False) -> None:
    assert run_cli("decompose", "--dataset", DNLI20, "--kind", "defeasible",
                   "--run-dir", run_dir, "--mock") == 0
    assert run_cli("prune", "--run-dir", run_dir, "--mock") == 0
    if through_eval:
        assert run_cli("eval-defeasible", "--run-dir", run_dir, "--mock",
                       "--annotations", ANNOTATIONS_DNLI20) == 0


def load_critical_cases():
    """The two bundled defeasible cases with per-atom effects; returns
    (example, atoms, expected critical names, magnitude, name->atom_id)."""
    cases = []
    for case in json.loads((DATA_DIR / "critical_cases.json").read_text()):
        example = DefeasibleExample.from_record(case["example"])
        atoms = []
        name_to_id = {}
        for spec in case["atoms"]:
            base = Atom.create(example.id, spec["text"])
            if spec["effect"] == "invalid":
                atom = Atom(
                    atom_id=base.atom_id, parent_example_id=example.id,
                    text=spec["text"], machine_valid=True, human_valid=False,
                )
            else:
                atom = Atom(
                    atom_id=base.atom_id, parent_example_id=example.id,
                    text=spec["text"], machine_valid=True, human_valid=True,
                    effect_gold=EffectScore(spec["effect"]),
                )
            atoms.append(atom)
            name_to_id[spec["name"]] = atom.atom_id
        cases.append((example, atoms, case["critical"], case["magnitude"], name_to_id))
    return cases


@pytest.fixture
def critical_cases():
    return load_critical_cases()

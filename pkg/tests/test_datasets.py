import json

import pytest

from atomnli.datasets import KIND_DEFEASIBLE, KIND_NLI, load_dataset
from atomnli.errors import IntegrityError, ValidationError
from atomnli.resources import data_path


def write_lines(path, rows):
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")


def test_load_nli_dataset(tmp_path):
    path = tmp_path / "data.jsonl"
    write_lines(path, [
        {"id": "a", "premise": "P1.", "hypothesis": "H1.", "gold": "e"},
        {"id": "b", "premise": "P2.", "hypothesis": "H2.", "gold": "n"},
        {"id": "c", "premise": "P3.", "hypothesis": "H3.", "gold": "c"},
    ])
    examples = load_dataset(path, KIND_NLI)
    assert [e.id for e in examples] == ["a", "b", "c"]


def test_duplicate_id_rejected_at_second_occurrence(tmp_path):
    path = tmp_path / "data.jsonl"
    write_lines(path, [
        {"id": "a", "premise": "P1.", "hypothesis": "H1.", "gold": "e"},
        {"id": "a", "premise": "P2.", "hypothesis": "H2.", "gold": "n"},
    ])
    with pytest.raises(IntegrityError, match="line 2.*duplicate id 'a'"):
        load_dataset(path, KIND_NLI)


def test_missing_update_field_under_defeasible(tmp_path):
    path = tmp_path / "data.jsonl"
    write_lines(path, [
        {"id": "a", "premise": "P.", "hypothesis": "H.", "gold": "strengthener"},
    ])
    with pytest.raises(ValidationError, match="line 1: missing field 'update'"):
        load_dataset(path, KIND_DEFEASIBLE)


def test_schema_violation_names_line_and_problem(tmp_path):
    path = tmp_path / "data.jsonl"
    write_lines(path, [
        {"id": "a", "premise": "P.", "hypothesis": "H.", "gold": "e"},
        {"id": "b", "premise": "", "hypothesis": "H.", "gold": "e"},
    ])
    with pytest.raises(ValidationError, match="line 2.*premise"):
        load_dataset(path, KIND_NLI)


def test_unknown_kind_and_missing_file(tmp_path):
    with pytest.raises(ValidationError, match="unknown dataset kind"):
        load_dataset(tmp_path / "x.jsonl", "other")
    with pytest.raises(ValidationError, match="not found"):
        load_dataset(tmp_path / "x.jsonl", KIND_NLI)


def test_bundled_fixture_datasets_are_valid():
    snli = load_dataset(data_path("fixtures", "snli20.jsonl"), KIND_NLI)
    dnli = load_dataset(data_path("fixtures", "dnli20.jsonl"), KIND_DEFEASIBLE)
    assert len(snli) == 20
    assert len(dnli) == 20
    assert len({e.premise + e.hypothesis for e in dnli}) == 5  # 5 groups x 4 updates

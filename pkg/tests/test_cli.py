import json
from pathlib import Path

from conftest import ANNOTATIONS_DNLI20, DNLI20, GOLDEN_DIR, SNLI20, run_cli


def test_unknown_flag_exits_64(tmp_path, capsys):
    assert run_cli("report", "--run-dir", tmp_path, "--bogus") == 64
    assert "Usage" in capsys.readouterr().err


def test_unknown_command_exits_64(capsys):
    assert run_cli("transmogrify") == 64


def test_help_exits_zero(capsys):
    assert run_cli("--help") == 0
    out = capsys.readouterr().out
    for command in ("decompose", "prune", "annotate-serve", "eval-nli",
                    "eval-defeasible", "group", "report", "rugplot"):
        assert command in out


def test_report_on_missing_stage_exits_1(tmp_path, capsys):
    run_dir = tmp_path / "run"
    assert run_cli("decompose", "--dataset", SNLI20, "--kind", "nli",
                   "--run-dir", run_dir, "--mock") == 0
    assert run_cli("report", "--run-dir", run_dir) == 1
    assert "eval-nli" in capsys.readouterr().err


def test_stage_out_of_order_exits_1(tmp_path, capsys):
    run_dir = tmp_path / "run"
    assert run_cli("decompose", "--dataset", SNLI20, "--kind", "nli",
                   "--run-dir", run_dir, "--mock") == 0
    assert run_cli("eval-nli", "--run-dir", run_dir, "--mock") == 1
    assert "prune" in capsys.readouterr().err


def test_bad_dataset_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "a", "premise": "P.", "hypothesis": "H.", "gold": "e"}\n'
                   '{"id": "a", "premise": "P.", "hypothesis": "H.", "gold": "e"}\n')
    assert run_cli("decompose", "--dataset", bad, "--kind", "nli",
                   "--run-dir", tmp_path / "run", "--mock") == 1
    assert "duplicate id" in capsys.readouterr().err


def test_missing_mock_fixture_exits_2(tmp_path, capsys):
    dataset = tmp_path / "novel.jsonl"
    dataset.write_text(json.dumps({
        "id": "x1", "premise": "A premise with no fixture.",
        "hypothesis": "A hypothesis with no fixture.", "gold": "e",
    }) + "\n")
    assert run_cli("decompose", "--dataset", dataset, "--kind", "nli",
                   "--run-dir", tmp_path / "run", "--mock") == 2
    assert "no fixture" in capsys.readouterr().err


def test_config_change_forces_new_run(tmp_path, capsys):
    run_dir = tmp_path / "run"
    assert run_cli("decompose", "--dataset", DNLI20, "--kind", "defeasible",
                   "--run-dir", run_dir, "--mock") == 0
    assert run_cli("prune", "--run-dir", run_dir, "--mock") == 0
    assert run_cli("eval-defeasible", "--run-dir", run_dir, "--mock",
                   "--annotations", ANNOTATIONS_DNLI20) == 0
    # a different similarity threshold is a different effective config
    assert run_cli("group", "--run-dir", run_dir, "--mock", "--threshold", "0.6") == 1
    assert "new run" in capsys.readouterr().err
    assert run_cli("group", "--run-dir", run_dir, "--mock", "--threshold", "0.75") == 0


def _nli_pipeline(run_dir):
    assert run_cli("decompose", "--dataset", SNLI20, "--kind", "nli",
                   "--run-dir", run_dir, "--mock") == 0
    assert run_cli("prune", "--run-dir", run_dir, "--mock") == 0
    assert run_cli("eval-nli", "--run-dir", run_dir, "--mock") == 0
    assert run_cli("report", "--run-dir", run_dir) == 0


def _defeasible_pipeline(run_dir):
    assert run_cli("decompose", "--dataset", DNLI20, "--kind", "defeasible",
                   "--run-dir", run_dir, "--mock") == 0
    assert run_cli("prune", "--run-dir", run_dir, "--mock") == 0
    assert run_cli("eval-defeasible", "--run-dir", run_dir, "--mock",
                   "--annotations", ANNOTATIONS_DNLI20) == 0
    assert run_cli("group", "--run-dir", run_dir, "--mock") == 0
    assert run_cli("report", "--run-dir", run_dir) == 0
    assert run_cli("rugplot", "--run-dir", run_dir) == 0


NLI_GOLDEN = ["nli_records.jsonl", "reports/nli_report.json", "reports/nli_report.txt"]
DEFEASIBLE_GOLDEN = [
    "defeasible_records.jsonl", "buckets.jsonl", "critical_sets.jsonl",
    "reports/defeasible_report.json", "reports/defeasible_report.txt",
    "reports/grouping_report.json", "reports/grouping_report.txt",
    "reports/rugplot.svg", "reports/rugplot.csv",
]


def test_nli_pipeline_matches_frozen_golden_files(tmp_path):
    run_dir = tmp_path / "run"
    _nli_pipeline(run_dir)
    for name in NLI_GOLDEN:
        produced = (run_dir / name).read_bytes()
        frozen = (GOLDEN_DIR / "nli" / Path(name).name).read_bytes()
        assert produced == frozen, f"{name} deviates from its golden file"


def test_defeasible_pipeline_matches_frozen_golden_files(tmp_path):
    run_dir = tmp_path / "run"
    _defeasible_pipeline(run_dir)
    for name in DEFEASIBLE_GOLDEN:
        produced = (run_dir / name).read_bytes()
        frozen = (GOLDEN_DIR / "defeasible" / Path(name).name).read_bytes()
        assert produced == frozen, f"{name} deviates from its golden file"


def test_reimporting_the_runs_own_annotations_is_harmless(tmp_path):
    run_dir = tmp_path / "run"
    _defeasible_pipeline(run_dir)
    own = run_dir / "annotations.jsonl"
    assert run_cli("eval-defeasible", "--run-dir", run_dir, "--mock",
                   "--annotations", own) == 0


def test_frozen_records_are_internally_recomputable():
    """consistent and induced in the golden records must be derivable from
    the stored predictions alone."""
    from atomnli.nli_eval import NliEvaluationRecord, check_consistency, induce_label

    for line in (GOLDEN_DIR / "nli" / "nli_records.jsonl").read_text().splitlines():
        record = NliEvaluationRecord.from_record(json.loads(line))
        labels = [record.atom_predictions[a] for a in record.admitted_atoms]
        if labels:
            assert record.consistent == check_consistency(record.full_prediction, labels)
            assert record.induced == induce_label(labels)
        else:
            assert record.consistent is None and record.induced is None


def test_eval_nli_bootstraps_run_from_dataset_flag(tmp_path):
    run_dir = tmp_path / "run"
    assert run_cli("eval-nli", "--dataset", SNLI20, "--run-dir", run_dir,
                   "--mock") == 0
    assert run_cli("report", "--run-dir", run_dir) == 0
    report = json.loads((run_dir / "reports" / "nli_report.json").read_text())
    assert report["examples_total"] == 20


def test_stage_rerun_with_warm_cache_is_byte_identical(tmp_path):
    run_dir = tmp_path / "run"
    _defeasible_pipeline(run_dir)
    artifacts = DEFEASIBLE_GOLDEN + ["generated_atoms.jsonl", "pruned_atoms.jsonl"]
    before = {name: (run_dir / name).read_bytes() for name in artifacts}
    cache_files = sorted(p.name for p in (run_dir / "cache").glob("*.json"))
    # every stage re-runs against the warm cache
    assert run_cli("decompose", "--dataset", DNLI20, "--kind", "defeasible",
                   "--run-dir", run_dir, "--mock") == 0
    assert run_cli("prune", "--run-dir", run_dir, "--mock") == 0
    assert run_cli("eval-defeasible", "--run-dir", run_dir, "--mock") == 0
    assert run_cli("group", "--run-dir", run_dir, "--mock") == 0
    assert run_cli("report", "--run-dir", run_dir) == 0
    assert run_cli("rugplot", "--run-dir", run_dir) == 0
    for name, content in before.items():
        assert (run_dir / name).read_bytes() == content, name
    assert sorted(p.name for p in (run_dir / "cache").glob("*.json")) == cache_files

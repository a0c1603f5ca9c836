import json

import pytest

from atomnli import runs
from atomnli.config import HarnessConfig, build_backends, config_hash, load_config
from atomnli.errors import ValidationError

from conftest import DNLI20, SNLI20, prepare_defeasible_run, run_cli


def test_load_config_defaults_and_file(tmp_path):
    default = load_config(None)
    assert default.group_threshold == 0.75
    assert default.parallelism == 4
    assert default.default_full_label == "less"

    path = tmp_path / "harness.ini"
    path.write_text(
        "[pipeline]\n"
        "group_threshold = 0.8\n"
        "parallelism = 2\n"
        "primary_annotator = lead\n"
        "\n"
        "[generation]\n"
        "backend_id = gen:custom\n"
        "endpoint = http://example.test/gen\n"
        "auth_env_var = GEN_KEY\n"
        "temperature = 0.3\n"
        "max_tokens = 128\n"
    )
    config = load_config(path)
    assert config.group_threshold == 0.8
    assert config.parallelism == 2
    assert config.primary_annotator == "lead"
    assert config.generation.backend_id == "gen:custom"
    assert config.generation.endpoint == "http://example.test/gen"
    assert config.generation.auth_env_var == "GEN_KEY"
    assert config.generation.params.temperature == 0.3
    assert config.generation.params.max_tokens == 128


def test_missing_config_file_is_an_error(tmp_path):
    with pytest.raises(Exception, match="not found"):
        load_config(tmp_path / "nope.ini")


def test_config_hash_sensitivity():
    config = HarnessConfig()
    base = config_hash(config, "data.jsonl", "nli", mock=True)
    assert base == config_hash(HarnessConfig(), "data.jsonl", "nli", mock=True)
    assert base != config_hash(config, "data.jsonl", "nli", mock=False)
    assert base != config_hash(config, "data.jsonl", "defeasible", mock=True)
    from dataclasses import replace

    changed = replace(config, group_threshold=0.6)
    assert base != config_hash(changed, "data.jsonl", "nli", mock=True)


def test_create_and_reopen_run(tmp_path):
    config = HarnessConfig()
    run = runs.create_run(tmp_path / "r", config, DNLI20, "defeasible", mock=True)
    assert run.manifest.run_id.startswith("defeasible-dnli20-")
    again = runs.create_run(tmp_path / "r", config, DNLI20, "defeasible", mock=True)
    assert again.manifest.run_id == run.manifest.run_id

    reopened = runs.open_run_for(tmp_path / "r", config, mock=True)
    assert reopened.manifest.run_id == run.manifest.run_id
    with pytest.raises(ValidationError, match="fresh directory"):
        runs.open_run_for(tmp_path / "r", config, mock=False)
    with pytest.raises(ValidationError, match="kind"):
        runs.open_run_for(tmp_path / "r", config, mock=True, expected_kind="nli")


def test_reusing_directory_for_other_dataset_is_refused(tmp_path):
    config = HarnessConfig()
    runs.create_run(tmp_path / "r", config, DNLI20, "defeasible", mock=True)
    with pytest.raises(ValidationError, match="fresh directory"):
        runs.create_run(tmp_path / "r", config, SNLI20, "nli", mock=True)


def test_stage_registry_and_missing_output_detection(tmp_path):
    config = HarnessConfig()
    run = runs.create_run(tmp_path / "r", config, DNLI20, "defeasible", mock=True)
    with pytest.raises(ValidationError, match="missing stage 'prune'"):
        run.require_stage("prune")
    with pytest.raises(ValidationError, match="do not exist"):
        run.record_stage("prune", ["pruned_atoms.jsonl"])
    run.path("pruned_atoms.jsonl").write_text("{}\n")
    run.record_stage("prune", ["pruned_atoms.jsonl"])
    run.require_stage("prune")
    # manifest round-trips through disk and carries the run id per stage
    reloaded = runs.load_run(tmp_path / "r")
    assert reloaded.manifest.stages["prune"]["run_id"] == run.manifest.run_id
    run.path("pruned_atoms.jsonl").unlink()
    with pytest.raises(ValidationError, match="missing from"):
        reloaded.require_stage("prune")


def test_every_artifact_is_tracked_and_carries_run_id(tmp_path):
    run_dir = tmp_path / "run"
    prepare_defeasible_run(str(run_dir), through_eval=True)
    assert run_cli("group", "--run-dir", run_dir, "--mock") == 0
    assert run_cli("report", "--run-dir", run_dir) == 0
    run = runs.load_run(run_dir)
    for stage, entry in run.manifest.stages.items():
        assert entry["run_id"] == run.manifest.run_id
        for name in entry["outputs"]:
            assert run.path(name).exists(), f"{stage} output {name} missing"
    meta = json.loads(run.path(runs.EVAL_DEFEASIBLE_META).read_text())
    assert meta["run_id"] == run.manifest.run_id
    report = json.loads(run.reports_path("defeasible_report.json").read_text())
    assert report["run_id"] == run.manifest.run_id


def test_mock_backends_require_no_network_and_remote_needs_endpoint(tmp_path):
    config = HarnessConfig()
    backends = build_backends(config, mock=True, cache=None)
    assert backends.mock
    remote = build_backends(config, mock=False, cache=None)
    from atomnli.errors import ConfigurationError

    with pytest.raises(ConfigurationError, match="no endpoint"):
        remote.generation.generate("hello")

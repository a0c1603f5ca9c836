"""Command-line surface of the harness.

Exit codes: 0 success, 1 validation/configuration failure, 2 backend
failure, 64 usage error.
"""
from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

import click

from . import runs, stages
from .backends import ResponseCache
from .config import build_backends, load_config
from .datasets import KIND_DEFEASIBLE, KIND_NLI
from .errors import BackendError, ConfigurationError, IntegrityError, ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_BACKEND = 2
EXIT_USAGE = 64


def _config(config_path: Optional[str], threshold: Optional[float] = None):
    config = load_config(config_path)
    if threshold is not None:
        config = replace(config, group_threshold=threshold)
    return config


def _open_run(run_dir: str, config, mock: bool, kind: Optional[str] = None) -> runs.Run:
    return runs.open_run_for(run_dir, config, mock, expected_kind=kind)


def _backends(run: runs.Run, config, mock: bool):
    return build_backends(config, mock, ResponseCache(run.cache_dir))


def _ensure_run(run_dir: str, dataset: Optional[str], kind: str, config, mock: bool) -> runs.Run:
    """Open the run; when --dataset names a file and no run exists yet,
    create it so evaluation commands can bootstrap a directory."""
    if dataset is not None and not (Path(run_dir) / runs.MANIFEST_NAME).exists():
        return runs.create_run(run_dir, config, dataset, kind, mock)
    return _open_run(run_dir, config, mock, kind)


run_dir_option = click.option(
    "--run-dir", required=True, type=click.Path(), help="Run directory (created by decompose)."
)
mock_option = click.option(
    "--mock", is_flag=True, help="Swap all model backends for deterministic fixtures."
)
config_option = click.option(
    "--config", "config_path", type=click.Path(exists=True), default=None,
    help="INI config file; credentials always come from environment variables.",
)


@click.group(name="atomnli")
def cli():
    """Decompose NLI hypotheses into atoms, evaluate models on atomic
    sub-problems, and audit their consistency."""


@cli.command()
@click.option("--dataset", required=True, type=click.Path(exists=True),
              help="Dataset file, one JSON example per line.")
@click.option("--kind", required=True, type=click.Choice([KIND_NLI, KIND_DEFEASIBLE]))
@run_dir_option
@mock_option
@config_option
def decompose(dataset, kind, run_dir, mock, config_path):
    """Generate candidate atoms for every hypothesis in the dataset."""
    config = _config(config_path)
    run = runs.create_run(run_dir, config, dataset, kind, mock)
    stages.stage_decompose(run, _backends(run, config, mock), config)
    click.echo(f"decomposed into {run.path(runs.GENERATED_ATOMS)}")


@cli.command()
@run_dir_option
@mock_option
@config_option
def prune(run_dir, mock, config_path):
    """Classifier pruning: keep atoms entailed by their hypothesis (and,
    for defeasible runs, not entailed by their premise)."""
    config = _config(config_path)
    run = _open_run(run_dir, config, mock)
    stages.stage_prune(run, _backends(run, config, mock), config)
    click.echo(f"pruned atoms written to {run.path(runs.PRUNED_ATOMS)}")


@cli.command(name="annotate-serve")
@run_dir_option
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8321, show_default=True, type=int)
@click.option("--dual", is_flag=True,
              help="Every annotator labels every atom (for agreement statistics).")
@click.option("--ui-dir", type=click.Path(), default="frontend/dist",
              show_default=True, help="Built annotation UI assets to serve.")
def annotate_serve(run_dir, host, port, dual, ui_dir):
    """Serve the annotation queue API and UI for a pruned defeasible run."""
    from .server import serve

    run = runs.load_run(run_dir)
    ui_path = Path(ui_dir) if Path(ui_dir).is_dir() else None
    serve(run, host=host, port=port, dual=dual, ui_dir=ui_path)


@cli.command(name="eval-nli")
@run_dir_option
@click.option("--dataset", type=click.Path(exists=True), default=None,
              help="Bootstrap a new run from this dataset (runs decompose and prune).")
@mock_option
@config_option
def eval_nli(run_dir, dataset, mock, config_path):
    """Evaluate the model on full examples and its admitted atoms."""
    config = _config(config_path)
    run = _ensure_run(run_dir, dataset, KIND_NLI, config, mock)
    backends = _backends(run, config, mock)
    if not run.has_stage(stages.STAGE_DECOMPOSE) and dataset is not None:
        stages.stage_decompose(run, backends, config)
    if not run.has_stage(stages.STAGE_PRUNE) and dataset is not None:
        stages.stage_prune(run, backends, config)
    stages.stage_eval_nli(run, backends, config)
    click.echo(f"evaluation records written to {run.path(runs.NLI_RECORDS)}")


@cli.command(name="eval-defeasible")
@run_dir_option
@click.option("--dataset", type=click.Path(exists=True), default=None,
              help="Bootstrap a new run from this dataset (runs decompose and prune).")
@click.option("--annotations", type=click.Path(exists=True), default=None,
              help="Annotation records to import (one JSON object per line).")
@mock_option
@config_option
def eval_defeasible(run_dir, dataset, annotations, mock, config_path):
    """Evaluate full examples (binary) and atomic sub-problems (ternary)."""
    config = _config(config_path)
    run = _ensure_run(run_dir, dataset, KIND_DEFEASIBLE, config, mock)
    backends = _backends(run, config, mock)
    if not run.has_stage(stages.STAGE_DECOMPOSE) and dataset is not None:
        stages.stage_decompose(run, backends, config)
    if not run.has_stage(stages.STAGE_PRUNE) and dataset is not None:
        stages.stage_prune(run, backends, config)
    stages.stage_eval_defeasible(
        run, backends, config,
        annotations_path=Path(annotations) if annotations else None,
    )
    click.echo(f"evaluation records written to {run.path(runs.DEFEASIBLE_RECORDS)}")


@cli.command()
@run_dir_option
@click.option("--threshold", type=float, default=None,
              help="Cosine similarity cutoff for the equivalence graph "
                   "(default 0.75 from config).")
@mock_option
@config_option
def group(run_dir, threshold, mock, config_path):
    """Group critical atoms into equivalence cliques and bucket examples."""
    config = _config(config_path, threshold=threshold)
    run = _open_run(run_dir, config, mock, KIND_DEFEASIBLE)
    stages.stage_group(run, _backends(run, config, mock), config)
    click.echo(f"buckets written to {run.path(runs.BUCKETS)}")


@cli.command()
@run_dir_option
@config_option
def report(run_dir, config_path):
    """Emit the metric reports (JSON and plain text) for a run."""
    config = _config(config_path)
    run = runs.load_run(run_dir)
    written = stages.stage_report(run, config)
    for path in written:
        click.echo(f"wrote {path}")


@cli.command()
@run_dir_option
def rugplot(run_dir):
    """Emit the per-example effect-distribution figure (SVG plus CSV)."""
    run = runs.load_run(run_dir)
    for path in stages.stage_rugplot(run):
        click.echo(f"wrote {path}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_VALIDATION
    except (ValidationError, IntegrityError, ConfigurationError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except BackendError as exc:
        click.echo(f"backend error: {exc}", err=True)
        return EXIT_BACKEND
    except click.Abort:
        return 130


if __name__ == "__main__":
    sys.exit(main())

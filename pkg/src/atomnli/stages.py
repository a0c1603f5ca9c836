"""Pipeline stages: each reads and writes only under its run directory.

Stages are idempotent: re-running against a warm response cache rewrites
byte-identical outputs. All record files are sorted by example id (atoms
keep model output order within an example), so output never depends on
worker scheduling.
"""
from __future__ import annotations

import shutil
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

from . import runs
from .config import Backends, HarnessConfig
from .core import Atom, read_jsonl, write_jsonl
from .datasets import KIND_DEFEASIBLE, KIND_NLI, load_dataset
from .decompose import PURPOSE_DECOMPOSITION, coverage_gaps, decompose, default_exemplars
from .defeasible import (
    CriticalAtomSet,
    DefeasibleEvaluationRecord,
    DefeasibleSubProblem,
    build_subproblems,
    evaluate_defeasible,
    full_prediction_correct,
    identify_critical_atoms,
    load_defeasible_context,
    table3_metrics,
)
from .agreement import cohens_kappa, kendalls_tau
from .errors import ValidationError
from .grouping import (
    CriticalAtomBucket,
    bucket_accuracies,
    build_buckets,
    build_graph,
    inferential_consistency,
    maximal_cliques,
    overlap_diagnostics,
)
from .nli_eval import (
    NliEvaluationRecord,
    consistency_report,
    evaluate_nli,
    load_nli_context,
)
from .core import TernaryEffect
from .reporting import render_report
from .rugplot import slices_from_atoms, write_rug_plot
from .validate import (
    AnnotationRecord,
    apply_annotations,
    latest_by_annotator,
    prune_by_hypothesis,
    prune_by_premise,
)

STAGE_DECOMPOSE = "decompose"
STAGE_PRUNE = "prune"
STAGE_EVAL_NLI = "eval-nli"
STAGE_EVAL_DEFEASIBLE = "eval-defeasible"
STAGE_GROUP = "group"
STAGE_REPORT = "report"
STAGE_RUGPLOT = "rugplot"


def _load_examples(run: runs.Run):
    return load_dataset(run.manifest.dataset, run.manifest.kind)


def _read_atoms(run: runs.Run, name: str) -> List[Atom]:
    return [Atom.from_record(r) for r in read_jsonl(run.path(name))]


def stage_decompose(run: runs.Run, backends: Backends, config: HarnessConfig) -> None:
    examples = sorted(_load_examples(run), key=lambda e: e.id)
    exemplars = default_exemplars(PURPOSE_DECOMPOSITION)

    def work(example):
        return decompose(example.hypothesis, backends.generation, exemplars, example.id)

    if config.parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            per_example = list(pool.map(work, examples))
    else:
        per_example = [work(example) for example in examples]

    records = []
    empty: List[str] = []
    warnings: Dict[str, List[str]] = {}
    for example, atoms in zip(examples, per_example):
        if not atoms:
            empty.append(example.id)
            continue
        gaps = coverage_gaps(example.hypothesis, [a.text for a in atoms])
        if gaps:
            warnings[example.id] = gaps
        records.extend(atom.to_record() for atom in atoms)

    write_jsonl(run.path(runs.GENERATED_ATOMS), records)
    runs.write_json(run.path(runs.DECOMPOSE_META), {
        "run_id": run.manifest.run_id,
        "examples": len(examples),
        "atoms": len(records),
        "empty_decompositions": empty,
        "coverage_warnings": warnings,
    })
    run.record_stage(STAGE_DECOMPOSE, [runs.GENERATED_ATOMS, runs.DECOMPOSE_META])


def stage_prune(run: runs.Run, backends: Backends, config: HarnessConfig) -> None:
    """Stage 1 drops atoms not entailed by their hypothesis; stage 2
    (defeasible runs only) additionally drops atoms entailed by the
    premise. Pruned atoms are kept in the output with machine_valid false
    so nothing is silently dropped."""
    run.require_stage(STAGE_DECOMPOSE)
    examples = {e.id: e for e in _load_examples(run)}
    atoms = _read_atoms(run, runs.GENERATED_ATOMS)
    defeasible = run.manifest.kind == KIND_DEFEASIBLE

    def work(atom: Atom) -> Atom:
        example = examples[atom.parent_example_id]
        keep = prune_by_hypothesis(atom, example.hypothesis, backends.entailment)
        if keep and defeasible:
            keep = prune_by_premise(atom, example.premise, backends.entailment)
        return Atom(
            atom_id=atom.atom_id, parent_example_id=atom.parent_example_id,
            text=atom.text, machine_valid=keep,
        )

    if config.parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            pruned = list(pool.map(work, atoms))
    else:
        pruned = [work(atom) for atom in atoms]

    write_jsonl(run.path(runs.PRUNED_ATOMS), [a.to_record() for a in pruned])
    survivors = sum(1 for a in pruned if a.machine_valid)
    runs.write_json(run.path(runs.PRUNE_META), {
        "run_id": run.manifest.run_id,
        "atoms": len(pruned),
        "survivors": survivors,
        "pruned": len(pruned) - survivors,
        "premise_stage_applied": defeasible,
    })
    run.record_stage(STAGE_PRUNE, [runs.PRUNED_ATOMS, runs.PRUNE_META])


def stage_eval_nli(run: runs.Run, backends: Backends, config: HarnessConfig) -> None:
    if run.manifest.kind != KIND_NLI:
        raise ValidationError("eval-nli needs an nli run")
    run.require_stage(STAGE_PRUNE)
    examples = _load_examples(run)
    atoms = [a for a in _read_atoms(run, runs.PRUNED_ATOMS) if a.machine_valid]
    by_example: Dict[str, List[Atom]] = {}
    for atom in atoms:
        by_example.setdefault(atom.parent_example_id, []).append(atom)
    context = load_nli_context()
    result = evaluate_nli(examples, by_example, backends.generation, context,
                          parallelism=config.parallelism)
    write_jsonl(run.path(runs.NLI_RECORDS), [r.to_record() for r in result.records])
    write_jsonl(run.path(runs.NLI_PREDICTIONS), [p.to_record() for p in result.predictions])
    runs.write_json(run.path(runs.EVAL_NLI_META), {
        "run_id": run.manifest.run_id,
        "parse_failures": result.parse_failures,
        "zero_atom_examples": result.zero_atom_examples,
    })
    run.record_stage(STAGE_EVAL_NLI, [runs.NLI_RECORDS, runs.NLI_PREDICTIONS,
                                      runs.EVAL_NLI_META])


def import_annotations(run: runs.Run, annotations_path: Path) -> None:
    """Copy an externally produced annotation record file into the run."""
    records = [AnnotationRecord.from_record(r) for r in read_jsonl(annotations_path)]
    if not records:
        raise ValidationError(f"no annotation records in {annotations_path}")
    target = run.path(runs.ANNOTATIONS)
    if target.exists() and annotations_path.samefile(target):
        return
    shutil.copyfile(annotations_path, target)


def _load_annotations(run: runs.Run) -> List[AnnotationRecord]:
    path = run.path(runs.ANNOTATIONS)
    if not path.exists():
        raise ValidationError(
            "no annotations found; annotate via the annotation service or "
            "pass --annotations with a record file"
        )
    return [AnnotationRecord.from_record(r) for r in read_jsonl(path)]


def stage_eval_defeasible(
    run: runs.Run,
    backends: Backends,
    config: HarnessConfig,
    annotations_path: Optional[Path] = None,
) -> None:
    if run.manifest.kind != KIND_DEFEASIBLE:
        raise ValidationError("eval-defeasible needs a defeasible run")
    run.require_stage(STAGE_PRUNE)
    if annotations_path is not None:
        import_annotations(run, annotations_path)
    annotations = _load_annotations(run)
    examples = sorted(_load_examples(run), key=lambda e: e.id)
    atoms = _read_atoms(run, runs.PRUNED_ATOMS)
    machine_valid = [a for a in atoms if a.machine_valid]
    annotated = apply_annotations(
        machine_valid,
        annotations,
        primary_annotator=config.primary_annotator,
    )
    write_jsonl(run.path(runs.ANNOTATED_ATOMS), [a.to_record() for a in annotated])

    by_example: Dict[str, List[Atom]] = {}
    for atom in annotated:
        by_example.setdefault(atom.parent_example_id, []).append(atom)

    subproblems: List[DefeasibleSubProblem] = []
    critical_sets: List[CriticalAtomSet] = []
    without_valid_atoms: List[str] = []
    for example in examples:
        problems = build_subproblems(example, by_example.get(example.id, []))
        if not problems:
            without_valid_atoms.append(example.id)
            continue
        subproblems.extend(problems)
        critical_sets.append(identify_critical_atoms(example, problems))

    evaluated_examples = [e for e in examples if e.id not in set(without_valid_atoms)]
    result = evaluate_defeasible(
        evaluated_examples,
        subproblems,
        backends.generation,
        load_defeasible_context(),
        load_defeasible_context(atoms=True),
        parallelism=config.parallelism,
        default_full=TernaryEffect(config.default_full_label),
    )
    write_jsonl(run.path(runs.SUBPROBLEMS), [p.to_record() for p in subproblems])
    write_jsonl(run.path(runs.CRITICAL_SETS), [c.to_record() for c in critical_sets])
    write_jsonl(run.path(runs.DEFEASIBLE_RECORDS), [r.to_record() for r in result.records])
    write_jsonl(run.path(runs.DEFEASIBLE_PREDICTIONS),
                [p.to_record() for p in result.predictions])
    runs.write_json(run.path(runs.EVAL_DEFEASIBLE_META), {
        "run_id": run.manifest.run_id,
        "parse_failures": result.parse_failures,
        "defaulted_full_predictions": result.defaulted_full_predictions,
        "examples_without_valid_atoms": without_valid_atoms,
        "empty_critical_sets": sorted(c.example_id for c in critical_sets if c.empty),
    })
    run.record_stage(STAGE_EVAL_DEFEASIBLE, [
        runs.ANNOTATED_ATOMS, runs.SUBPROBLEMS, runs.CRITICAL_SETS,
        runs.DEFEASIBLE_RECORDS, runs.DEFEASIBLE_PREDICTIONS,
        runs.EVAL_DEFEASIBLE_META,
    ])


def stage_group(run: runs.Run, backends: Backends, config: HarnessConfig) -> None:
    if run.manifest.kind != KIND_DEFEASIBLE:
        raise ValidationError("group needs a defeasible run")
    run.require_stage(STAGE_EVAL_DEFEASIBLE)
    critical_sets = [CriticalAtomSet.from_record(r)
                     for r in read_jsonl(run.path(runs.CRITICAL_SETS))]
    atoms = {a.atom_id: a for a in _read_atoms(run, runs.ANNOTATED_ATOMS)}
    critical_ids = sorted({aid for c in critical_sets for aid in c.atom_ids})
    critical_atoms = [atoms[aid] for aid in critical_ids]
    embeddings = {a.atom_id: backends.embedding.embed(a.text) for a in critical_atoms}
    graph = build_graph(critical_atoms, embeddings, config.group_threshold,
                        backends.entailment)
    cliques = maximal_cliques(graph)
    buckets = build_buckets(cliques, critical_sets)
    runs.write_json(run.path(runs.SIMILARITY_GRAPH), graph.to_record())
    write_jsonl(run.path(runs.BUCKETS), [b.to_record() for b in buckets])
    runs.write_json(run.path(runs.GROUP_META), {
        "run_id": run.manifest.run_id,
        "threshold": config.group_threshold,
        "critical_atoms": len(critical_atoms),
        "cliques": len(cliques),
        "buckets": len(buckets),
        **overlap_diagnostics(cliques),
    })
    run.record_stage(STAGE_GROUP, [runs.SIMILARITY_GRAPH, runs.BUCKETS, runs.GROUP_META])


def _agreement_section(run: runs.Run, config: HarnessConfig) -> Optional[dict]:
    """Cross-annotator agreement over dually annotated atoms, when a
    second annotator exists: kappa on validity, tau-b on effects."""
    path = run.path(runs.ANNOTATIONS)
    if not path.exists():
        return None
    records = [AnnotationRecord.from_record(r) for r in read_jsonl(path)]
    latest = latest_by_annotator(records)
    by_annotator: Dict[str, Dict[str, AnnotationRecord]] = {}
    for (atom_id, annotator_id), record in latest.items():
        by_annotator.setdefault(annotator_id, {})[atom_id] = record
    primary = config.primary_annotator
    others = sorted(a for a in by_annotator if a != primary)
    if primary not in by_annotator or not others:
        return None
    second = others[0]
    shared = sorted(set(by_annotator[primary]) & set(by_annotator[second]))
    if not shared:
        return None
    validity_a = [by_annotator[primary][aid].valid for aid in shared]
    validity_b = [by_annotator[second][aid].valid for aid in shared]
    kappa = cohens_kappa(validity_a, validity_b)
    scored = [
        aid for aid in shared
        if by_annotator[primary][aid].effect is not None
        and by_annotator[second][aid].effect is not None
    ]
    tau = None
    if len(scored) >= 2:
        tau = kendalls_tau(
            [by_annotator[primary][aid].effect.value for aid in scored],
            [by_annotator[second][aid].effect.value for aid in scored],
        )
    return {
        "annotators": [primary, second],
        "dual_annotated_atoms": len(shared),
        "validity_kappa": kappa,
        "effect_tau_b": tau,
    }


def stage_report(run: runs.Run, config: HarnessConfig) -> List[Path]:
    written: List[Path] = []
    if run.manifest.kind == KIND_NLI:
        run.require_stage(STAGE_EVAL_NLI)
        records = [NliEvaluationRecord.from_record(r)
                   for r in read_jsonl(run.path(runs.NLI_RECORDS))]
        gold = {e.id: e.gold for e in _load_examples(run)}
        meta = runs.read_json(run.path(runs.EVAL_NLI_META))
        report = consistency_report(records, gold, parse_failures=meta["parse_failures"])
        report["run_id"] = run.manifest.run_id
        path = run.reports_path("nli_report.json")
        runs.write_json(path, report)
        text = render_report("Logical consistency over atomic sub-problems", report)
        run.reports_path("nli_report.txt").write_text(text, encoding="utf-8")
        written += [path, run.reports_path("nli_report.txt")]
        run.record_stage(STAGE_REPORT, [f"{runs.REPORTS_DIR}/nli_report.json",
                                        f"{runs.REPORTS_DIR}/nli_report.txt"])
        return written

    run.require_stage(STAGE_EVAL_DEFEASIBLE)
    examples = _load_examples(run)
    records = [DefeasibleEvaluationRecord.from_record(r)
               for r in read_jsonl(run.path(runs.DEFEASIBLE_RECORDS))]
    subproblems = [DefeasibleSubProblem.from_record(r)
                   for r in read_jsonl(run.path(runs.SUBPROBLEMS))]
    critical_sets = [CriticalAtomSet.from_record(r)
                     for r in read_jsonl(run.path(runs.CRITICAL_SETS))]
    meta = runs.read_json(run.path(runs.EVAL_DEFEASIBLE_META))
    report = table3_metrics(records, examples, subproblems, critical_sets)
    report["run_id"] = run.manifest.run_id
    report["parse_failures"] = meta["parse_failures"]
    report["examples_without_valid_atoms"] = len(meta["examples_without_valid_atoms"])
    agreement = _agreement_section(run, config)
    if agreement is not None:
        report["agreement"] = agreement
    path = run.reports_path("defeasible_report.json")
    runs.write_json(path, report)
    run.reports_path("defeasible_report.txt").write_text(
        render_report("Defeasible evaluation over atomic sub-problems", report),
        encoding="utf-8",
    )
    written += [path, run.reports_path("defeasible_report.txt")]
    outputs = [f"{runs.REPORTS_DIR}/defeasible_report.json",
               f"{runs.REPORTS_DIR}/defeasible_report.txt"]

    if run.has_stage(STAGE_GROUP):
        buckets = [CriticalAtomBucket.from_record(r)
                   for r in read_jsonl(run.path(runs.BUCKETS))]
        gold = {e.id: e.gold for e in examples}
        correct = {
            r.example_id: full_prediction_correct(r.full_prediction, gold[r.example_id])
            for r in records
        }
        accuracies = bucket_accuracies(buckets, correct)
        group_meta = runs.read_json(run.path(runs.GROUP_META))
        grouping = {
            "run_id": run.manifest.run_id,
            "threshold": group_meta["threshold"],
            "critical_atoms": group_meta["critical_atoms"],
            "cliques": group_meta["cliques"],
            "buckets": group_meta["buckets"],
            "atoms_in_multiple_cliques": group_meta["atoms_in_multiple_cliques"],
            "inferential_consistency": 100.0 * inferential_consistency(
                accuracies, weighting=config.ic_weighting),
            "inferential_consistency_weighted": 100.0 * inferential_consistency(
                accuracies, weighting="weighted"),
        }
        grouping_path = run.reports_path("grouping_report.json")
        runs.write_json(grouping_path, grouping)
        run.reports_path("grouping_report.txt").write_text(
            render_report("Inferential consistency over critical-atom buckets", grouping),
            encoding="utf-8",
        )
        written += [grouping_path, run.reports_path("grouping_report.txt")]
        outputs += [f"{runs.REPORTS_DIR}/grouping_report.json",
                    f"{runs.REPORTS_DIR}/grouping_report.txt"]

    run.record_stage(STAGE_REPORT, outputs)
    return written


def stage_rugplot(run: runs.Run) -> List[Path]:
    if run.manifest.kind != KIND_DEFEASIBLE:
        raise ValidationError("rugplot needs a defeasible run")
    run.require_stage(STAGE_EVAL_DEFEASIBLE)
    examples = _load_examples(run)
    atoms = _read_atoms(run, runs.ANNOTATED_ATOMS)
    slices = slices_from_atoms(examples, atoms)
    if not slices:
        raise ValidationError("no scored valid atoms to plot")
    svg = run.reports_path("rugplot.svg")
    table = run.reports_path("rugplot.csv")
    write_rug_plot(slices, svg, table)
    run.record_stage(STAGE_RUGPLOT, [f"{runs.REPORTS_DIR}/rugplot.svg",
                                     f"{runs.REPORTS_DIR}/rugplot.csv"])
    return [svg, table]

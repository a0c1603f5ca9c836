"""Annotation service: a queue of machine-valid atoms awaiting human
validity/effect judgments, plus static serving of the annotation UI.

Routes (all JSON):
  GET  /api/queue/next?annotator=ID  next unlabeled atom in context
  POST /api/labels                   submit one annotation (idempotent
                                     per atom+annotator; later wins)
  GET  /api/labels                   export: latest record per pair
  GET  /api/progress                 counts

The queue leases an atom to the requesting annotator for a few minutes so
two annotators are not handed the same atom concurrently; dual mode lifts
that, letting every annotator label every atom for agreement statistics.
"""
from __future__ import annotations

import json
import threading
import time
from pathlib import Path
from typing import Dict, Optional, Tuple

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import runs
from .core import Atom, EffectScore, read_jsonl
from .datasets import KIND_DEFEASIBLE, load_dataset
from .errors import ValidationError
from .resources import data_path
from .validate import AnnotationRecord, latest_by_annotator

LEASE_SECONDS = 300

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>atomnli annotation</title></head>
<body><h1>atomnli annotation service</h1>
<p>The annotation UI bundle was not found. Build it with
<code>npm run build</code> in <code>frontend/</code> and restart with
<code>--ui-dir frontend/dist</code>, or drive the JSON API directly
(see /api/progress).</p></body></html>
"""


class AnnotationStore:
    """Annotation log + queue state for one run. Append-only persistence
    with last-write-wins per (atom, annotator) on load and submit."""

    def __init__(self, run: runs.Run, dual: bool = False):
        if run.manifest.kind != KIND_DEFEASIBLE:
            raise ValidationError("the annotation service serves defeasible runs")
        run.require_stage("prune")
        self.run = run
        self.dual = dual
        self._lock = threading.Lock()
        examples = load_dataset(run.manifest.dataset, run.manifest.kind)
        self.examples = {e.id: e for e in examples}
        atoms = [Atom.from_record(r) for r in read_jsonl(run.path(runs.PRUNED_ATOMS))]
        self.atoms: Dict[str, Atom] = {
            a.atom_id: a for a in atoms if a.machine_valid
        }
        self.queue_order = sorted(
            self.atoms.values(), key=lambda a: (a.parent_example_id, a.atom_id)
        )
        self.records: Dict[Tuple[str, str], AnnotationRecord] = {}
        self.log_path = run.path(runs.ANNOTATIONS)
        if self.log_path.exists():
            stored = [AnnotationRecord.from_record(r) for r in read_jsonl(self.log_path)]
            self.records = latest_by_annotator(stored)
        self.leases: Dict[str, Tuple[str, float]] = {}
        self.instructions = data_path("instructions", "effect_scale.txt").read_text(
            encoding="utf-8"
        )

    def _labeled_by(self, atom_id: str, annotator: str) -> bool:
        return (atom_id, annotator) in self.records

    def _labeled_by_anyone(self, atom_id: str) -> bool:
        return any(key[0] == atom_id for key in self.records)

    def _leased_to_other(self, atom_id: str, annotator: str, now: float) -> bool:
        lease = self.leases.get(atom_id)
        return lease is not None and lease[0] != annotator and lease[1] > now

    def next_for(self, annotator: str) -> Optional[dict]:
        with self._lock:
            now = time.monotonic()
            for atom in self.queue_order:
                if self.dual:
                    if self._labeled_by(atom.atom_id, annotator):
                        continue
                else:
                    if self._labeled_by_anyone(atom.atom_id):
                        continue
                    if self._leased_to_other(atom.atom_id, annotator, now):
                        continue
                self.leases[atom.atom_id] = (annotator, now + LEASE_SECONDS)
                example = self.examples[atom.parent_example_id]
                return {
                    "atom_id": atom.atom_id,
                    "atom_text": atom.text,
                    "example_id": example.id,
                    "premise": example.premise,
                    "hypothesis": example.hypothesis,
                    "update": example.update,
                    "instructions": self.instructions,
                    "remaining": self.remaining_for(annotator),
                }
            return None

    def remaining_for(self, annotator: str) -> int:
        if self.dual:
            return sum(
                1 for a in self.queue_order if not self._labeled_by(a.atom_id, annotator)
            )
        return sum(1 for a in self.queue_order if not self._labeled_by_anyone(a.atom_id))

    def submit(self, record: AnnotationRecord) -> AnnotationRecord:
        with self._lock:
            if record.atom_id not in self.atoms:
                raise KeyError(record.atom_id)
            self.records[(record.atom_id, record.annotator_id)] = record
            self.leases.pop(record.atom_id, None)
            with self.log_path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(record.to_record(), sort_keys=True) + "\n")
            return record

    def progress(self) -> dict:
        with self._lock:
            labeled_atoms = {key[0] for key in self.records}
            by_annotator: Dict[str, int] = {}
            for _, annotator in self.records:
                by_annotator[annotator] = by_annotator.get(annotator, 0) + 1
            return {
                "total_atoms": len(self.atoms),
                "labeled_atoms": len(labeled_atoms),
                "remaining_atoms": len(self.atoms) - len(labeled_atoms),
                "records": len(self.records),
                "by_annotator": dict(sorted(by_annotator.items())),
            }

    def export(self) -> list:
        with self._lock:
            ordered = sorted(self.records.items())
            return [record.to_record() for _, record in ordered]


def _parse_submission(body: dict) -> AnnotationRecord:
    problems = {}
    atom_id = body.get("atom_id")
    if not isinstance(atom_id, str) or not atom_id:
        problems["atom_id"] = "required string"
    annotator_id = body.get("annotator_id")
    if not isinstance(annotator_id, str) or not annotator_id:
        problems["annotator_id"] = "required string"
    valid = body.get("valid")
    if not isinstance(valid, bool):
        problems["valid"] = "required boolean"
    effect_raw = body.get("effect")
    effect = None
    if valid is True:
        if effect_raw is None:
            problems["effect"] = "required for valid defeasible atoms: integer in [-2, 2]"
        else:
            try:
                effect = EffectScore.parse(effect_raw)
            except ValidationError as exc:
                problems["effect"] = str(exc)
    elif valid is False and effect_raw is not None:
        problems["effect"] = "must be absent when valid is false"
    timestamp = body.get("timestamp") or time.strftime(
        "%Y-%m-%dT%H:%M:%SZ", time.gmtime()
    )
    if problems:
        raise HTTPException(status_code=400, detail={"fields": problems})
    return AnnotationRecord(
        atom_id=atom_id, annotator_id=annotator_id, valid=valid,
        effect=effect, timestamp=timestamp,
    )


def create_app(run: runs.Run, dual: bool = False,
               ui_dir: Optional[Path] = None) -> FastAPI:
    store = AnnotationStore(run, dual=dual)
    app = FastAPI(title="atomnli annotation service")
    app.state.store = store

    @app.get("/api/queue/next")
    def queue_next(annotator: str = ""):
        if not annotator:
            raise HTTPException(status_code=400,
                                detail={"fields": {"annotator": "required"}})
        item = store.next_for(annotator)
        if item is None:
            return JSONResponse({"done": True, "remaining": 0})
        return JSONResponse({"done": False, **item})

    @app.post("/api/labels")
    async def post_label(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail={"fields": {"body": "not JSON"}})
        if not isinstance(body, dict):
            raise HTTPException(status_code=400,
                                detail={"fields": {"body": "expected an object"}})
        record = _parse_submission(body)
        try:
            stored = store.submit(record)
        except KeyError:
            raise HTTPException(status_code=404,
                                detail=f"unknown atom: {record.atom_id}")
        return JSONResponse(stored.to_record())

    @app.get("/api/labels")
    def export_labels():
        return JSONResponse(store.export())

    @app.get("/api/progress")
    def progress():
        return JSONResponse(store.progress())

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:
        @app.get("/", response_class=HTMLResponse)
        def index():
            return _FALLBACK_PAGE

    return app


def serve(run: runs.Run, host: str, port: int, dual: bool = False,
          ui_dir: Optional[Path] = None) -> None:
    import uvicorn

    app = create_app(run, dual=dual, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")

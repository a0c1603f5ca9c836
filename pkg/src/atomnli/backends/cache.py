"""Persistent content-addressed response cache.

One JSON file per request hash in an append-only directory. Identical
requests to identical backends always hit. Writes go through a temp file
and atomic rename, so concurrent writers of the same key land on identical
content (last write wins, responses are identical by construction).
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from pathlib import Path
from typing import Optional, Union


def canonical_payload(payload: dict) -> str:
    """Serialize a request payload with sorted keys so semantically
    identical requests collide correctly."""
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


class ResponseCache:
    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._memory: dict = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def key_for(self, backend_cache_id: str, payload: dict) -> str:
        blob = f"{backend_cache_id}\x1f{canonical_payload(payload)}"
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> Optional[dict]:
        with self._lock:
            if key in self._memory:
                self.hits += 1
                return self._memory[key]
        path = self._path(key)
        if not path.exists():
            with self._lock:
                self.misses += 1
            return None
        entry = json.loads(path.read_text(encoding="utf-8"))
        with self._lock:
            self._memory[key] = entry
            self.hits += 1
        return entry

    def put(self, key: str, backend_cache_id: str, payload: dict, response: object) -> dict:
        entry = {
            "key": key,
            "backend_id": backend_cache_id,
            "payload": payload,
            "response": response,
            "created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
        path = self._path(key)
        if not path.exists():
            tmp = path.with_suffix(f".tmp.{os.getpid()}.{threading.get_ident()}")
            tmp.write_text(json.dumps(entry, ensure_ascii=False, sort_keys=True), encoding="utf-8")
            os.replace(tmp, path)
        with self._lock:
            self._memory[key] = entry
        return entry

    def __len__(self) -> int:
        return sum(1 for _ in self.directory.glob("*.json"))

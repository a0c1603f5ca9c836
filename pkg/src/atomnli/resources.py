"""Access to data files shipped inside the package."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path


def data_path(*parts: str) -> Path:
    """Path to a file under atomnli/data. Works for normal installs; the
    package is not zip-safe by design."""
    root = resources.files("atomnli") / "data"
    return Path(str(root.joinpath(*parts)))


@lru_cache(maxsize=None)
def prompt_template(name: str) -> str:
    """Load a prompt template by stem name, trailing newline stripped so
    rendered prompts end exactly at the template's last line."""
    return data_path("prompts", f"{name}.txt").read_text(encoding="utf-8").rstrip("\n")


def load_json(*parts: str):
    return json.loads(data_path(*parts).read_text(encoding="utf-8"))

"""Bundled synthetic assets for tests and demos (see scripts/make_fixtures.py)."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import FixtureError

DATA_DIR = Path(__file__).resolve().parent / "data"
MANIFEST_NAME = "MANIFEST.json"


@dataclass(frozen=True)
class FixtureEntry:
    name: str
    path: Path
    sha256: str
    description: str


def manifest(root=None) -> dict:
    root = Path(root) if root is not None else DATA_DIR
    with open(root / MANIFEST_NAME, encoding="utf-8") as fh:
        raw = json.load(fh)
    return {name: FixtureEntry(name, root / e["path"], e["sha256"], e["description"]) for name, e in raw.items()}


def fixture_path(name: str, root=None) -> Path:
    """Path of a verified fixture asset."""
    load_fixture(name, root)
    return manifest(root)[name].path


def load_fixture(name: str, root=None) -> bytes:
    entries = manifest(root)
    if name not in entries:
        raise FixtureError(f"unknown fixture {name!r}; available: {', '.join(sorted(entries))}")
    entry = entries[name]
    data = entry.path.read_bytes()
    digest = hashlib.sha256(data).hexdigest()
    if digest != entry.sha256:
        raise FixtureError(f"checksum mismatch for fixture {name!r}: expected {entry.sha256}, got {digest}")
    return data

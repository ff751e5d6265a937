"""
Versioned JSON model files.

Every file is a single JSON object::

    {"schema": "xfmr-aging/<kind>", "version": 1, ...model fields...}

Floats are written with Python's shortest round-trip repr, so loading a
saved model reproduces every parameter bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ModelFileError, ModelVersionError

SCHEMA_PREFIX = "xfmr-aging/"
VERSION = 1


def _plain(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def dumps(kind: str, fields: dict) -> str:
    record = {"schema": SCHEMA_PREFIX + kind, "version": VERSION}
    record.update(_plain(fields))
    return json.dumps(record, indent=1, sort_keys=True, allow_nan=False) + "\n"


def write(path, kind: str, fields: dict) -> Path:
    path = Path(path)
    path.write_text(dumps(kind, fields), encoding="utf-8")
    return path


def read(path, kind: str, required=()) -> dict:
    """Load and check a model file of the given kind; return its fields."""
    path = Path(path)
    try:
        record = json.loads(path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFileError(f"{path}: corrupt model file ({exc})") from exc
    if not isinstance(record, dict) or "schema" not in record or "version" not in record:
        raise ModelFileError(f"{path}: not an xfmr-aging model file")
    if record["schema"] != SCHEMA_PREFIX + kind:
        raise ModelFileError(f"{path}: expected schema {SCHEMA_PREFIX + kind!r}, found {record['schema']!r}")
    if record["version"] != VERSION:
        raise ModelVersionError(f"{path}: unsupported {kind} model version {record['version']!r} (expected {VERSION})")
    missing = [k for k in required if k not in record]
    if missing:
        raise ModelFileError(f"{path}: missing field(s) {missing}")
    return record

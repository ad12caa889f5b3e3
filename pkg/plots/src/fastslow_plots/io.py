"""Readers for the toolkit's schema-versioned CSV/JSON files."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

SCHEMA = 1


class SchemaError(Exception):
    """Missing input or schema-version mismatch; maps to exit code 2."""


def load_json(path):
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"missing input file: {path}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    if payload.get("schema") != SCHEMA:
        raise SchemaError(f"{path}: expected schema {SCHEMA}, got {payload.get('schema')!r}")
    return payload


def load_csv(path):
    """Read a ``# schema: 1`` CSV into a dict of named columns.

    Numeric columns become float arrays; anything unparseable (the flags
    column) stays a list of strings.
    """
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"missing input file: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "# schema: 1":
        raise SchemaError(f"{path}: expected a '# schema: 1' header line")
    if len(lines) < 2:
        raise SchemaError(f"{path}: no header row")
    names = lines[1].split(",")
    raw = {name: [] for name in names}
    for line in lines[2:]:
        if not line.strip():
            continue
        cells = line.split(",")
        for name, cell in zip(names, cells):
            raw[name].append(cell)
    out = {}
    for name, cells in raw.items():
        try:
            out[name] = np.array([float(c) if c != "" else np.nan for c in cells])
        except ValueError:
            out[name] = cells
    return out


def style_path():
    return str(Path(__file__).with_name("figures.mplstyle"))

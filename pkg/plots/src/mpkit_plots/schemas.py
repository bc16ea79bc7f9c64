"""Readers for the experiment output files consumed by the figure renderers.

Every reader validates the file against its expected schema and raises
``SchemaError`` naming the offending file and column; rendering never
mutates inputs.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """Input file does not match the expected experiment-output schema."""


def _read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaError(f"{path}:{lineno}: expected {len(header)} cells")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: non-numeric cell") from None
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return header, np.asarray(rows)


def _require(header: list[str], columns: tuple[str, ...], path) -> dict[str, int]:
    missing = [c for c in columns if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    return {c: header.index(c) for c in columns}


def read_landscape(path) -> dict[str, np.ndarray]:
    """Grid export: x1, x2, uncertainty, entropy, predicted_class (row-major)."""
    header, table = _read_csv(path)
    cols = _require(header, ("x1", "x2", "uncertainty", "entropy", "predicted_class"), path)
    out = {name: table[:, idx] for name, idx in cols.items()}
    if out["uncertainty"].min() < -1e-9 or out["uncertainty"].max() > 1 + 1e-9:
        raise SchemaError(f"{path}: uncertainty outside [0, 1]")
    return out


def read_dataset(path) -> dict[str, np.ndarray]:
    """Dataset export: feature columns x1..xd plus a (possibly soft) label."""
    header, table = _read_csv(path)
    cols = _require(header, ("x1", "x2", "label"), path)
    return {name: table[:, idx] for name, idx in cols.items()}


def read_paired(path) -> dict[str, np.ndarray]:
    """Paired-member comparison: member, de_acc, bb_acc, de_loss, bb_loss."""
    header, table = _read_csv(path)
    cols = _require(header, ("member", "de_acc", "bb_acc", "de_loss", "bb_loss"), path)
    return {name: table[:, idx] for name, idx in cols.items()}


def read_report(path) -> dict:
    """Calibration report JSON with acc/nll/ece/oe/ue scalars."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise SchemaError(f"{path}: unreadable report ({e})") from None
    missing = [k for k in ("acc", "nll", "ece", "oe", "ue") if k not in data]
    if missing:
        raise SchemaError(f"{path}: missing key(s) {', '.join(missing)}")
    return data

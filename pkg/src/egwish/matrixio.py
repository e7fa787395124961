"""Headerless numeric CSV I/O at full double precision.

Values are written with repr, the shortest decimal string that parses back
to the identical double, so a write/read round trip is lossless.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch


def write_matrix_csv(m: np.ndarray, path: str | Path) -> None:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d array, got shape {m.shape}")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in m:
            writer.writerow([repr(float(v)) for v in row])


def read_matrix_csv(path: str | Path, allow_nan: bool = False) -> np.ndarray:
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec:
                continue
            try:
                rows.append([float(v) for v in rec])
            except ValueError as exc:
                raise ValueError(f"{path}: non-numeric value on line {lineno}") from exc
    if not rows:
        raise ValueError(f"{path}: no numeric rows")
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ValueError(f"{path}: ragged row on line {lineno}")
    m = np.array(rows, dtype=np.float64)
    if not allow_nan and not np.all(np.isfinite(m)):
        raise ValueError(f"{path}: non-finite values present")
    return m

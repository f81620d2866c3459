"""CSV/JSON readers and writers used by the command line."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import InputError

FORMAT_VERSION = 1


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def _read_rows(path):
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise InputError(f"{path}: empty file")
    return rows


def read_matrix(path) -> np.ndarray:
    """Numeric CSV; a first row that does not parse as numbers is taken as a header."""
    rows = _read_rows(path)
    if not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    width = len(rows[0]) if rows else 0
    out = []
    for i, r in enumerate(rows):
        if len(r) != width:
            raise InputError(f"{path}: row {i} has {len(r)} columns, expected {width}")
        try:
            out.append([float(c) for c in r])
        except ValueError:
            raise InputError(f"{path}: non-numeric value in row {i}") from None
    if not out:
        raise InputError(f"{path}: no data rows")
    return np.array(out)


def read_series(path) -> np.ndarray:
    M = read_matrix(path)
    if M.shape[1] != 1:
        raise InputError(f"{path}: expected one column, got {M.shape[1]}")
    return M[:, 0]


def read_labelled_rows(path):
    """Rows of numbers followed by one label column; header optional."""
    rows = _read_rows(path)
    if not all(_is_number(c) for c in rows[0][:-1]):
        rows = rows[1:]
    values, labels = [], []
    for i, r in enumerate(rows):
        try:
            values.append([float(c) for c in r[:-1]])
        except ValueError:
            raise InputError(f"{path}: non-numeric value in row {i}") from None
        labels.append(r[-1].strip())
    if len({len(v) for v in values}) != 1:
        raise InputError(f"{path}: rows have differing lengths")
    return np.array(values), labels


def read_categorical(path):
    """Header row names the variables; every other row is one individual."""
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    body = [[c.strip() for c in r] for r in rows[1:]]
    for i, r in enumerate(body):
        if len(r) != len(header):
            raise InputError(f"{path}: row {i} has {len(r)} values, expected {len(header)}")
    return header, body


def read_lines(path):
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    return [ln.rstrip("\n") for ln in path.read_text().splitlines()]


def write_csv(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        if header:
            wr.writerow(header)
        for r in rows:
            wr.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps_json(obj) -> str:
    doc = {"formatVersion": FORMAT_VERSION, **_plain(obj)}
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps_json(obj))


def read_json(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise InputError(f"{path}: invalid JSON ({err})") from None

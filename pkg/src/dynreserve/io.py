"""CSV input and output for traffic records, selections, and reserve prices.

Reals are written with ``repr`` so they round-trip at full double precision.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

DOMAIN_COLUMNS = ("id", "bid", "ctr", "gpm")


class InputError(ValueError):
    pass


def _float(text: str, path, line: int, column: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise InputError(f"{path}:{line}: column {column!r}: not a number: {text!r}") from None
    if not math.isfinite(v):
        raise InputError(f"{path}:{line}: column {column!r}: value must be finite")
    return v


def read_domain_csv(path):
    """Columns ``id, bid, ctr, gpm`` as (ids, bid, ctr, gpm)."""
    ids, rows = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != DOMAIN_COLUMNS:
            raise InputError(f"{path}:1: expected header {','.join(DOMAIN_COLUMNS)}, got {header}")
        for row in reader:
            if not row:
                continue
            line = reader.line_num
            if len(row) != 4:
                raise InputError(f"{path}:{line}: expected 4 fields, got {len(row)}")
            vals = [_float(t, path, line, col) for t, col in zip(row[1:], DOMAIN_COLUMNS[1:])]
            if not vals[1] > 0.0:
                raise InputError(f"{path}:{line}: record {row[0]!r}: ctr must be positive")
            ids.append(row[0])
            rows.append(vals)
    if not rows:
        raise InputError(f"{path}: empty problem")
    arr = np.array(rows, dtype=np.float64)
    return ids, arr[:, 0], arr[:, 1], arr[:, 2]


def read_general_csv(path):
    """Columns ``id, c, b1..bL`` as (ids, c, b)."""
    ids, rows = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InputError(f"{path}:1: missing header")
        header = [h.strip() for h in header]
        L = len(header) - 2
        want = ["id", "c"] + [f"b{k}" for k in range(1, L + 1)]
        if L < 1 or header != want:
            raise InputError(f"{path}:1: expected header id,c,b1,...,bL, got {','.join(header)}")
        for row in reader:
            if not row:
                continue
            line = reader.line_num
            if len(row) != L + 2:
                raise InputError(f"{path}:{line}: expected {L + 2} fields, got {len(row)}")
            ids.append(row[0])
            rows.append([_float(t, path, line, col) for t, col in zip(row[1:], want[1:])])
    if not rows:
        raise InputError(f"{path}: empty problem")
    arr = np.array(rows, dtype=np.float64)
    return ids, arr[:, 0], arr[:, 1:]


def write_general_csv(path, ids, c, b):
    b = np.asarray(b)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "c"] + [f"b{k}" for k in range(1, b.shape[1] + 1)])
        for i, rid in enumerate(ids):
            w.writerow([rid, repr(float(c[i]))] + [repr(float(v)) for v in b[i]])


def write_domain_csv(path, ids, bid, ctr, gpm):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(DOMAIN_COLUMNS)
        for i, rid in enumerate(ids):
            w.writerow([rid, repr(float(bid[i])), repr(float(ctr[i])), repr(float(gpm[i]))])


def write_selection_csv(path, ids, x):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "x"])
        for rid, xi in zip(ids, x):
            w.writerow([rid, int(xi)])


def write_reserve_csv(path, ids, r, x):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "r", "x"])
        for rid, ri, xi in zip(ids, r, x):
            w.writerow([rid, repr(float(ri)), int(xi)])


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p

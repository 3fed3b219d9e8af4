"""CSV and JSON serialisation with 17 significant digits.

17 digits round-trip every double exactly, so re-loaded polylines coincide
with the in-memory ones.
"""
from __future__ import annotations

import json
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


@contextmanager
def _open(dest):
    if dest is None or dest == "-":
        yield sys.stdout
    elif hasattr(dest, "write"):
        yield dest
    else:
        with open(dest, "w", newline="") as fh:
            yield fh


def write_table(dest, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with _open(dest) as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_table(path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:] if ln]


def read_polyline(path) -> np.ndarray:
    """The (f, c, e) columns of a trajectory or cycle CSV."""
    header, rows = read_table(path)
    idx = [header.index(k) for k in ("f", "c", "e")]
    return np.array([[float(r[i]) for i in idx] for r in rows])


def _json_value(x) -> str:
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(v) for v in x) + "]"
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        # JSON has no NaN or infinity
        return fmt(x) if math.isfinite(float(x)) else "null"
    return json.dumps(str(x))


def dumps(obj) -> str:
    return _json_value(obj) + "\n"


def write_json(dest, obj) -> None:
    with _open(dest) as fh:
        fh.write(dumps(obj))

"""Plain-text CSV formats for constellations, rotation matrices and result tables.

Every file may open with ``#`` comment lines carrying the run manifest.
Floats are written with 17 significant digits so values round-trip exactly.
"""
from __future__ import annotations

import io
import os
import re
from pathlib import Path

import numpy as np

from .constellation import Constellation
from .lie_rotations import check_rotation

_SPLIT = re.compile(r"[,\s]+")


def fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def header_lines(manifest: dict | None) -> list[str]:
    return [f"# {k}: {v}" for k, v in (manifest or {}).items()]


def _data_lines(text: str) -> list[list[str]]:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([tok for tok in _SPLIT.split(line) if tok])
    return rows


def _write(path, text: str) -> None:
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
        return
    Path(path).write_text(text)


def _read(path) -> str:
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    return Path(path).read_text()


def dumps_constellation(X: Constellation, manifest: dict | None = None) -> str:
    buf = io.StringIO()
    for line in header_lines(manifest):
        buf.write(line + "\n")
    buf.write(f"{X.n},{X.M}\n")
    for p in X.points:
        buf.write(",".join(fmt(v) for v in p) + "\n")
    return buf.getvalue()


def loads_constellation(text: str, label: str = "") -> Constellation:
    rows = _data_lines(text)
    if not rows or len(rows[0]) != 2:
        raise ValueError("constellation file must start with a line 'n,M'")
    n, M = (int(v) for v in rows[0])
    body = rows[1:]
    if len(body) != M:
        raise ValueError(f"header declares {M} points but file has {len(body)}")
    if any(len(r) != n for r in body):
        raise ValueError(f"every point must have {n} coordinates")
    return Constellation(np.array(body, dtype=float), label)


def write_constellation(path, X: Constellation, manifest: dict | None = None) -> None:
    _write(path, dumps_constellation(X, manifest))


def read_constellation(path) -> Constellation:
    return loads_constellation(_read(path), label=Path(path).name)


def dumps_matrix(Q: np.ndarray, manifest: dict | None = None) -> str:
    Q = np.asarray(Q, dtype=float)
    lines = header_lines(manifest) + [str(Q.shape[0])]
    lines += [",".join(fmt(v) for v in row) for row in Q]
    return "\n".join(lines) + "\n"


def loads_matrix(text: str, validate: bool = True) -> np.ndarray:
    rows = _data_lines(text)
    if not rows or len(rows[0]) != 1:
        raise ValueError("matrix file must start with a line 'n'")
    n = int(rows[0][0])
    body = rows[1:]
    if len(body) != n or any(len(r) != n for r in body):
        raise ValueError(f"matrix file must contain {n} rows of {n} values")
    Q = np.array(body, dtype=float)
    return check_rotation(Q) if validate else Q


def write_matrix(path, Q: np.ndarray, manifest: dict | None = None) -> None:
    _write(path, dumps_matrix(Q, manifest))


def read_matrix(path, validate: bool = True) -> np.ndarray:
    return loads_matrix(_read(path), validate)


def dumps_table(columns: list[str], rows: list[dict], manifest: dict | None = None) -> str:
    lines = header_lines(manifest) + [",".join(columns)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in (row[c] for c in columns)))
    return "\n".join(lines) + "\n"

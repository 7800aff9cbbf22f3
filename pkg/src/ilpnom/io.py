"""File formats: dissimilarity CSV, supervision lists, key = value configs,
score tables and JSON result documents."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import PersonalDissimilarityMatrix, ingest_matrix


class InputError(ValueError):
    """A malformed input file; the message names the offending line."""


def sha256_of(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def read_dissimilarity_csv(path: str) -> Tuple[PersonalDissimilarityMatrix, List[str]]:
    """Parse ``id,d1,...,dJ`` rows. Returns the ingested matrix and the
    representation column names."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "id":
        raise InputError(f"{path}: line 1: header must be 'id,d1,...,dJ'")
    width = len(header)
    ids, values, seen = [], [], {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != width:
            raise InputError(f"{path}: line {lineno}: expected {width} fields, got {len(row)}")
        item = row[0].strip()
        if not item:
            raise InputError(f"{path}: line {lineno}: empty id")
        if item in seen:
            raise InputError(f"{path}: line {lineno}: duplicate id {item!r} (first on line {seen[item]})")
        seen[item] = lineno
        parsed = []
        for name, text in zip(header[1:], row[1:]):
            try:
                v = float(text)
            except ValueError:
                raise InputError(
                    f"{path}: line {lineno}: column {name!r}: cannot parse {text.strip()!r}") from None
            if not math.isfinite(v):
                raise InputError(f"{path}: line {lineno}: column {name!r}: non-finite value")
            parsed.append(v)
        ids.append(item)
        values.append(parsed)
    if len(ids) < 2:
        raise InputError(f"{path}: need at least 2 item rows, got {len(ids)}")
    return ingest_matrix(np.array(values), ids), header[1:]


def read_id_list(path: str, known: Sequence[str]) -> List[int]:
    """Newline-separated ids mapped to row indices of ``known``."""
    index = {k: i for i, k in enumerate(known)}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            item = line.strip()
            if not item:
                continue
            if item not in index:
                raise InputError(f"{path}: line {lineno}: unknown id {item!r}")
            if index[item] not in rows:
                rows.append(index[item])
    if not rows:
        raise InputError(f"{path}: no ids listed")
    return rows


def read_key_value(path: str) -> Dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out: Dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise InputError(f"{path}: line {lineno}: expected 'key = value'")
            key, value = (t.strip() for t in text.split("=", 1))
            if not key:
                raise InputError(f"{path}: line {lineno}: empty key")
            if key in out:
                raise InputError(f"{path}: line {lineno}: duplicate key {key!r}")
            out[key] = value
    return out


def read_scores(path: str, key_columns: Sequence[str] = ("id",), value_column: Optional[str] = None,
                where: Sequence[Tuple[str, str]] = ()) -> Dict[str, float]:
    """Per-instance scores from a CSV table, keyed by ``key_columns``.

    Without ``value_column`` the table must have exactly one non-key column.
    ``where`` keeps only rows whose columns equal the given values.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in list(key_columns) + [w[0] for w in where] if c not in header]
        if missing:
            raise InputError(f"{path}: line 1: missing columns {missing}")
        if value_column is None:
            rest = [c for c in header if c not in key_columns]
            if len(rest) != 1:
                raise InputError(f"{path}: line 1: ambiguous value column; choose one of {rest}")
            value_column = rest[0]
        elif value_column not in header:
            raise InputError(f"{path}: line 1: missing column {value_column!r}")
        out: Dict[str, float] = {}
        for lineno, row in enumerate(reader, start=2):
            if any(row.get(c) != v for c, v in where):
                continue
            key = "|".join(row[c] for c in key_columns)
            if key in out:
                raise InputError(f"{path}: line {lineno}: duplicate key {key!r}")
            try:
                out[key] = float(row[value_column])
            except (TypeError, ValueError):
                raise InputError(
                    f"{path}: line {lineno}: cannot parse {row.get(value_column)!r}") from None
    if not out:
        raise InputError(f"{path}: no score rows selected")
    return out


# ---------------------------------------------------------------------------
# JSON with 17 significant digits


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    s = "%.17g" % x
    if not any(ch in s for ch in ".e"):
        s += ".0"
    return s


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode(str(k), indent, level + 1)}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
               for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def loads(text: str):
    return json.loads(text)

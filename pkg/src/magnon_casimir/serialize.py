"""Locale-independent CSV/JSON writers and the sweep-file reader.

Every float is written with 17 significant digits, which round-trips IEEE
doubles exactly.  Non-finite values are written as ``inf``/``-inf``/``nan``
in CSV and as ``null`` in JSON.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, List, Sequence

import numpy as np

from .casimir import CasimirPoint
from .errors import ParseError

__all__ = [
    "format_number",
    "to_csv",
    "to_json",
    "SWEEP_COLUMNS",
    "DISPERSION_COLUMNS",
    "sweep_rows",
    "read_sweep_csv",
    "read_sweep_json",
]

SWEEP_COLUMNS = ("N_z", "re_Ecas_meV", "im_Ecas_meV", "re_coeff", "im_coeff", "b")
DISPERSION_COLUMNS = ("sigma", "q", "re_meV", "im_meV")


def format_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        return "0"  # no signed zero in output
    return format(x, ".17g")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return format_number(v)


def to_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _json(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_number(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_json(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _json(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj, indent: int = 2) -> str:
    """Deterministic JSON text (insertion-ordered keys, 17-digit floats)."""
    return _json(obj, indent, 0) + "\n"


def sweep_rows(points: Sequence[CasimirPoint]) -> List[tuple]:
    return [(p.N_z, p.e_cas.real, p.e_cas.imag, p.coeff.real, p.coeff.imag, p.b) for p in points]


def _point(n, re_e, im_e, re_c, im_c, b) -> CasimirPoint:
    return CasimirPoint(int(n), complex(float(re_e), float(im_e)),
                        complex(float(re_c), float(im_c)), float(b))


def read_sweep_csv(text: str) -> List[CasimirPoint]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ParseError("empty sweep file", 1)
    if tuple(rows[0]) != SWEEP_COLUMNS:
        raise ParseError(f"unexpected header {rows[0]!r}; expected {list(SWEEP_COLUMNS)}", 1)
    out = []
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(SWEEP_COLUMNS):
            raise ParseError(f"expected {len(SWEEP_COLUMNS)} fields, found {len(row)}", i)
        try:
            out.append(_point(*row))
        except ValueError as exc:
            raise ParseError(f"bad number: {exc}", i) from None
    return out


def read_sweep_json(text: str):
    """Return ``(document, [(alpha, b, points), ...])`` from a sweep JSON file."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("runs"), list):
        raise ParseError("sweep JSON must be an object with a 'runs' list", key="runs")
    runs = []
    for k, run in enumerate(doc["runs"]):
        try:
            pts = [_point(p["N_z"], p["re_Ecas_meV"], p["im_Ecas_meV"],
                          p["re_coeff"], p["im_coeff"], p["b"]) for p in run["points"]]
            runs.append((float(run["alpha"]), float(run["b"]), pts))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed run {k}: {exc}", key=f"runs[{k}]") from None
    return doc, runs

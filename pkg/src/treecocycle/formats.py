"""Text serialisation: JSON and CSV tables, kernel files and edge/vertex functions.

Reals are written with 17 significant digits in JSON (round-trip safe) and 12
in CSV.  Output is fully determined by the values, so identical inputs give
identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Sequence

import numpy as np

from .edgespace import EdgeFunction, VertexFunction
from .exceptions import AddressError, KernelParseError
from .green import ProjectionResult
from .kernels import CndReport, KernelMatrix
from .tree import RegularTree, format_vertex


def format_real(x: float, digits: int) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialise non-finite value {x}")
    if x == 0:
        return "0"
    return format(x, f".{digits}g")


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_real(obj, 17)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_json(obj: Any, indent: int = 2) -> str:
    """JSON text with reals at 17 significant digits, keys in insertion order."""
    return _encode(obj, indent, 0) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_real(v, 12)
    return str(v)


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


# -- functions -----------------------------------------------------------------------
def edge_function_to_json(xi: EdgeFunction) -> dict:
    """``edges``: canonical-orientation entries; ``tails``: per-branch generation values."""
    edges = [{"source": format_vertex(e.source), "target": format_vertex(e.target), "value": v}
             for e, v in xi.edges()]
    tails = [{"root": format_vertex(c), "values": list(vals)}
             for c, vals in sorted(xi.tails.items(), key=lambda kv: (len(kv[0]), kv[0]))]
    return {"edges": edges, "tails": tails}


def edge_function_from_json(tree: RegularTree, data: dict) -> EdgeFunction:
    values = {}
    for item in data.get("edges", []):
        values[(tree.parse(item["source"]), tree.parse(item["target"]))] = float(item["value"])
    xi = EdgeFunction.from_oriented(tree, values)
    tails = {tree.parse(t["root"]): tuple(float(v) for v in t["values"]) for t in data.get("tails", [])}
    return EdgeFunction(tree, xi.entries, tails) if tails else xi


def vertex_function_to_json(f: VertexFunction) -> list:
    return [{"vertex": format_vertex(v), "value": f(v)} for v in f.support()]


def vertex_function_from_json(tree: RegularTree, data: list) -> VertexFunction:
    return VertexFunction(tree, {tree.parse(item["vertex"]): float(item["value"]) for item in data})


def projection_to_json(res: ProjectionResult) -> dict:
    return {
        "tail_bound": res.tail_bound,
        "support_radius": res.support_radius,
        "gradient_part": edge_function_to_json(res.gradient_part),
        "harmonic_part": edge_function_to_json(res.harmonic_part),
    }


def cnd_report_to_json(report: CndReport) -> dict:
    return {
        "is_cnd": report.is_cnd,
        "min_centered_eigenvalue": report.min_centered_eigenvalue,
        "witness": None if report.witness is None else [float(a) for a in report.witness],
        "witness_value": report.witness_value,
    }


# -- kernel files ----------------------------------------------------------------------
def kernel_to_csv(K: KernelMatrix) -> str:
    return dumps_csv([format_vertex(p) for p in K.points], K.values.tolist())


def kernel_to_json(K: KernelMatrix) -> str:
    return dumps_json({"points": [format_vertex(p) for p in K.points], "values": K.values.tolist()})


def _parse_points(tree, labels, line):
    pts = []
    for col, text in enumerate(labels, start=1):
        try:
            pts.append(tree.parse(text.strip()))
        except AddressError as exc:
            raise KernelParseError(str(exc), line, col) from None
    if not pts:
        raise KernelParseError("header lists no points", line, 1)
    return pts


def read_kernel_csv(tree: RegularTree, text: str) -> KernelMatrix:
    """First row: vertex addresses; then one row of reals per point."""
    rows = [r for r in csv.reader(io.StringIO(text))]
    numbered = [(i, r) for i, r in enumerate(rows, start=1) if any(c.strip() for c in r)]
    if not numbered:
        raise KernelParseError("empty kernel file", 1, 1)
    line, header = numbered[0]
    pts = _parse_points(tree, header, line)
    n = len(pts)
    body = numbered[1:]
    if len(body) != n:
        where = body[n][0] if len(body) > n else (body[-1][0] + 1 if body else line + 1)
        raise KernelParseError(f"expected {n} matrix rows, found {len(body)}", where, 1)
    values = np.zeros((n, n))
    for i, (ln, row) in enumerate(body):
        if len(row) != n:
            raise KernelParseError(f"expected {n} columns, found {len(row)}", ln, min(len(row), n) + 1)
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise KernelParseError(f"not a number: {cell!r}", ln, j + 1) from None
            if not math.isfinite(v):
                raise KernelParseError(f"non-finite value {cell!r}", ln, j + 1)
            values[i, j] = v
    return KernelMatrix(tuple(pts), values)


def read_kernel_json(tree: RegularTree, text: str) -> KernelMatrix:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise KernelParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict) or "points" not in data or "values" not in data:
        raise KernelParseError("expected an object with 'points' and 'values'", 1, 1)
    pts = _parse_points(tree, [str(p) for p in data["points"]], None)
    try:
        values = np.array(data["values"], dtype=float)
    except (TypeError, ValueError):
        raise KernelParseError("'values' is not a numeric matrix") from None
    if values.shape != (len(pts), len(pts)):
        raise KernelParseError(f"'values' has shape {values.shape}, expected {(len(pts), len(pts))}")
    return KernelMatrix(tuple(pts), values)


def read_kernel(tree: RegularTree, text: str, fmt: str | None = None) -> KernelMatrix:
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "csv"
    return read_kernel_json(tree, text) if fmt == "json" else read_kernel_csv(tree, text)

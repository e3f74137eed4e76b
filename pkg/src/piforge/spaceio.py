"""Space files, report files and the check record shared by every subcommand."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .space import TOL, FiniteMetricMeasureSpace, SpaceError

TOOL_VERSION = "0.1.0"


class SchemaError(ValueError):
    pass


def _num(doc, key, where, positive=False):
    if key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise SchemaError(f"{where}.{key}: expected a number, got {val!r}")
    if positive and not val > 0:
        raise SchemaError(f"{where}.{key}: must be positive, got {val}")
    return float(val)


def space_from_json(doc: dict) -> FiniteMetricMeasureSpace:
    """Parse the edge form or the ``"matrix"`` form; errors name the offending field."""
    if not isinstance(doc, dict):
        raise SchemaError("space document must be a JSON object")
    verts = doc.get("vertices")
    n = None
    weights = None
    if verts is not None:
        if not isinstance(verts, list):
            raise SchemaError("vertices: expected a list")
        ids = []
        weights = []
        for i, v in enumerate(verts):
            if not isinstance(v, dict):
                raise SchemaError(f"vertices[{i}]: expected an object")
            vid = v.get("id")
            if isinstance(vid, bool) or not isinstance(vid, int):
                raise SchemaError(f"vertices[{i}].id: expected an integer, got {vid!r}")
            ids.append(vid)
            weights.append(_num(v, "weight", f"vertices[{i}]", positive=True))
        if sorted(ids) != list(range(len(ids))):
            raise SchemaError("vertices: ids must be exactly 0..n-1")
        order = np.argsort(ids)
        weights = np.array(weights)[order]
        n = len(ids)
    edges = []
    for i, e in enumerate(doc.get("edges", [])):
        if not isinstance(e, dict):
            raise SchemaError(f"edges[{i}]: expected an object")
        u, v = e.get("u"), e.get("v")
        for name, val in (("u", u), ("v", v)):
            if isinstance(val, bool) or not isinstance(val, int):
                raise SchemaError(f"edges[{i}].{name}: expected an integer, got {val!r}")
        length = _num(e, "length", f"edges[{i}]")
        if not length > 0:
            raise SchemaError(f"edges[{i}] ({u}, {v}): non-positive length {length}")
        edges.append((u, v, length))
    res = doc.get("resolution")
    cap = doc.get("scale_cap")
    if res is not None:
        res = _num(doc, "resolution", "space", positive=True)
    if cap is not None:
        cap = _num(doc, "scale_cap", "space", positive=True)
    try:
        if "matrix" in doc:
            mat = np.array(doc["matrix"], dtype=float)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise SchemaError("matrix: expected a square array")
            if n is not None and mat.shape[0] != n:
                raise SchemaError(f"matrix: size {mat.shape[0]} does not match {n} vertices")
            return FiniteMetricMeasureSpace.from_matrix(mat, weights, edges, res, cap)
        if n is None:
            raise SchemaError("space: need 'vertices' or 'matrix'")
        return FiniteMetricMeasureSpace.from_edges(n, edges, weights, res, cap)
    except SpaceError as exc:
        raise SchemaError(str(exc)) from None


def space_to_json(space: FiniteMetricMeasureSpace) -> dict:
    """Canonical form: edge form when the edges generate the metric, matrix form otherwise."""
    doc = {
        "vertices": [{"id": i, "weight": float(w)} for i, w in enumerate(space.weights)],
        "edges": [{"u": int(u), "v": int(v), "length": float(l)} for u, v, l in space.edges],
        "resolution": space.resolution,
        "scale_cap": space.scale_cap,
    }
    if space.edges:
        rebuilt = FiniteMetricMeasureSpace.from_edges(space.n, space.edges, space.weights,
                                                      validate=False).dist
        if np.array_equal(rebuilt, space.dist):
            return doc
    doc["matrix"] = space.dist.tolist()
    return doc


def load_space(path) -> FiniteMetricMeasureSpace:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    return space_from_json(doc)


def save_space(path, space) -> None:
    Path(path).write_text(json.dumps(space_to_json(space), sort_keys=True, indent=2) + "\n")


# --- reports ---------------------------------------------------------------


def to_plain(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_plain(v) for v in items]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    return obj


def check(name, lhs, rhs, witness=None, sense="<=") -> dict:
    """One inequality record; ``margin >= 0`` means the check holds."""
    lhs, rhs = float(lhs), float(rhs)
    if sense == "<=":
        margin = rhs - lhs
    elif sense == ">=":
        margin = lhs - rhs
    elif sense == "==":
        margin = -abs(lhs - rhs)
    else:
        raise ValueError(f"unknown sense {sense!r}")
    if math.isnan(margin):
        margin = math.inf if lhs == rhs else -math.inf
    return {"check": name, "lhs": lhs, "rhs": rhs, "margin": margin, "witness": witness}


def check_passed(rec: dict, tol: float = TOL) -> bool:
    m = rec["margin"]
    if isinstance(m, str):
        m = float(m)
    return m >= -tol


def build_report(space_spec, operation, params, results) -> dict:
    return to_plain({"tool_version": TOOL_VERSION, "space_spec": space_spec,
                     "operation": operation, "params": params, "results": list(results)})


def dumps_report(report) -> str:
    return json.dumps(to_plain(report), sort_keys=True, indent=2) + "\n"


def save_report(path, report) -> None:
    Path(path).write_text(dumps_report(report))


REPORT_KEYS = {"tool_version", "space_spec", "operation", "params", "results"}
RESULT_KEYS = {"check", "lhs", "rhs", "margin", "witness"}


def validate_report(report: dict) -> None:
    if set(report) != REPORT_KEYS:
        raise SchemaError(f"report keys {sorted(report)} differ from {sorted(REPORT_KEYS)}")
    for i, r in enumerate(report["results"]):
        if set(r) != RESULT_KEYS:
            raise SchemaError(f"results[{i}] keys {sorted(r)} differ from {sorted(RESULT_KEYS)}")


__all__ = ["SchemaError", "space_from_json", "space_to_json", "load_space", "save_space",
           "to_plain", "check", "check_passed", "build_report", "dumps_report",
           "save_report", "validate_report", "TOOL_VERSION"]

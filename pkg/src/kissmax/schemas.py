"""JSON file formats for measures, ball families and codes.

measure: {"dimension": d, "norm": {"lp": p} | "inf",
          "atoms": [{"point": [...], "weight": w, "value": f (optional)}]}
family:  {"dimension": d, "norm": ..., "kind": "open" | "closed",
          "balls": [{"center": [...], "radius": r}]}
code:    {"dimension": d, "norm": ..., "vectors": [[...], ...]}
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from kissmax.besicovitch import BallFamily
from kissmax.codes import SphericalCode
from kissmax.errors import InputError
from kissmax.geometry import INF, Kind, NormedSpace
from kissmax.measure import DiscreteMeasure, merge_atom_function


class SchemaError(InputError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def load_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from exc
    if not isinstance(data, dict):
        raise SchemaError(str(path), "top level must be a JSON object")
    return data


def _field(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(where, f"missing field {key!r}")
    return obj[key]


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise SchemaError(where, f"expected a finite number, got {x!r}")
    return float(x)


def _vector(x, d: int, where: str) -> list[float]:
    if d == 1 and isinstance(x, (int, float)) and not isinstance(x, bool):
        x = [x]
    if not isinstance(x, list) or len(x) != d:
        raise SchemaError(where, f"expected a list of {d} numbers")
    return [_number(v, f"{where}[{i}]") for i, v in enumerate(x)]


def parse_space(data: dict) -> NormedSpace:
    d = _field(data, "dimension", "dimension")
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise SchemaError("dimension", f"expected a positive integer, got {d!r}")
    norm = _field(data, "norm", "norm")
    if norm == "inf":
        return NormedSpace(d, INF)
    if isinstance(norm, dict) and "lp" in norm:
        p = _number(norm["lp"], "norm.lp")
        if p < 1:
            raise SchemaError("norm.lp", f"exponent must be >= 1, got {p}")
        return NormedSpace(d, p)
    raise SchemaError("norm", f'expected {{"lp": p}} or "inf", got {norm!r}')


def space_to_json(space: NormedSpace) -> dict:
    return {"dimension": space.dimension, "norm": "inf" if space.is_inf else {"lp": space.p}}


def parse_measure(data: dict) -> tuple[DiscreteMeasure, np.ndarray | None]:
    """Returns the measure and, if every atom has a "value", the aligned function."""
    space = parse_space(data)
    atoms = _field(data, "atoms", "atoms")
    if not isinstance(atoms, list) or not atoms:
        raise SchemaError("atoms", "expected a nonempty list")
    pts, wts, vals = [], [], []
    for i, a in enumerate(atoms):
        where = f"atoms[{i}]"
        pts.append(_vector(_field(a, "point", where), space.dimension, f"{where}.point"))
        w = _number(_field(a, "weight", where), f"{where}.weight")
        if w <= 0:
            raise SchemaError(f"{where}.weight", "weights must be positive")
        wts.append(w)
        if "value" in a:
            v = _number(a["value"], f"{where}.value")
            if v < 0:
                raise SchemaError(f"{where}.value", "function values must be nonnegative")
            vals.append(v)
    if vals and len(vals) != len(atoms):
        raise SchemaError("atoms", "either every atom or no atom has a 'value'")
    if vals:
        mu, f = merge_atom_function(space, pts, wts, vals)
        return mu, f
    return DiscreteMeasure.from_atoms(space, pts, wts), None


def measure_to_json(mu: DiscreteMeasure, f=None) -> dict:
    out = space_to_json(mu.space)
    out["atoms"] = []
    for i, (pt, w) in enumerate(zip(mu.points, mu.weights)):
        atom = {"point": pt.tolist(), "weight": float(w)}
        if f is not None:
            atom["value"] = float(f[i])
        out["atoms"].append(atom)
    return out


def parse_family(data: dict) -> BallFamily:
    space = parse_space(data)
    kind = _field(data, "kind", "kind")
    if kind not in ("open", "closed"):
        raise SchemaError("kind", f'expected "open" or "closed", got {kind!r}')
    balls = _field(data, "balls", "balls")
    if not isinstance(balls, list) or not balls:
        raise SchemaError("balls", "expected a nonempty list")
    centers, radii = [], []
    for i, b in enumerate(balls):
        where = f"balls[{i}]"
        centers.append(_vector(_field(b, "center", where), space.dimension, f"{where}.center"))
        r = _number(_field(b, "radius", where), f"{where}.radius")
        if r <= 0:
            raise SchemaError(f"{where}.radius", "radius must be positive")
        radii.append(r)
    return BallFamily(space, np.array(centers), np.array(radii), Kind(kind))


def family_to_json(fam: BallFamily) -> dict:
    out = space_to_json(fam.space)
    out["kind"] = fam.kind.value
    out["balls"] = [{"center": c.tolist(), "radius": float(r)} for c, r in zip(fam.centers, fam.radii)]
    return out


def parse_code(data: dict) -> SphericalCode:
    space = parse_space(data)
    vecs = _field(data, "vectors", "vectors")
    if not isinstance(vecs, list) or not vecs:
        raise SchemaError("vectors", "expected a nonempty list")
    rows = [_vector(v, space.dimension, f"vectors[{i}]") for i, v in enumerate(vecs)]
    return SphericalCode(space, np.array(rows))

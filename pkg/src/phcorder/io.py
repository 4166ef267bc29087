"""JSON file formats for measures, kernels, functions and verdicts.

Floats are written with 17 significant digits so every file re-parses to the
identical double values.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import MeasureError
from .geometry import ConvexPolyhedralFunction, PolyhedralSupportFunction, SphericalFunctionSamples
from .kernels import DiscreteKernel
from .measures import DiscreteMeasure


class FormatError(MeasureError):
    """A file does not follow the expected schema."""


# -- writing -----------------------------------------------------------------

def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x!r}")
    return format(x, ".17g")


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_, int, float, np.integer, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def measure_to_dict(m: DiscreteMeasure) -> dict:
    return {"dim": m.dim, "atoms": [{"x": x, "w": w} for x, w in zip(m.points.tolist(), m.weights.tolist())]}


def kernel_to_dict(q: DiscreteKernel) -> dict:
    return {"dim": q.dim, "source": q.source.tolist(), "targets": q.targets.tolist(), "Q": q.Q.tolist()}


def support_function_to_dict(f: PolyhedralSupportFunction) -> dict:
    return {"dim": f.dim, "gradients": f.gradients.tolist()}


def convex_function_to_dict(f: ConvexPolyhedralFunction) -> dict:
    return {
        "dim": f.dim,
        "pieces": [{"gradient": g, "offset": a} for g, a in zip(f.gradients.tolist(), f.offsets.tolist())],
    }


def samples_to_dict(f: SphericalFunctionSamples) -> dict:
    return {"dim": f.dim, "directions": f.directions.tolist(), "values": f.values.tolist()}


def to_dict(obj) -> dict:
    if isinstance(obj, DiscreteMeasure):
        return measure_to_dict(obj)
    if isinstance(obj, DiscreteKernel):
        return kernel_to_dict(obj)
    if isinstance(obj, PolyhedralSupportFunction):
        return support_function_to_dict(obj)
    if isinstance(obj, ConvexPolyhedralFunction):
        return convex_function_to_dict(obj)
    if isinstance(obj, SphericalFunctionSamples):
        return samples_to_dict(obj)
    raise TypeError(f"no file format for {type(obj).__name__}")


def verdict_to_dict(v, timing: bool = False) -> dict:
    """``{"holds", "witness", "gap", "stats": {"pivots", "runtime_ms"}}``.

    ``runtime_ms`` is ``null`` unless ``timing`` is set, keeping default output
    byte-stable across runs.
    """
    runtime = v.stats.get("runtime_ms") if timing else None
    return {
        "holds": bool(v.holds),
        "witness": to_dict(v.witness),
        "gap": v.gap,
        "stats": {"pivots": int(v.stats.get("pivots", 0)), "runtime_ms": runtime},
    }


# -- reading -----------------------------------------------------------------

def _reject_constant(name: str):
    raise FormatError(f"non-finite number {name} is not allowed")


def loads(text: str, source: str = "<string>") -> Any:
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except FormatError as exc:
        raise FormatError(f"{source}: {exc}") from None


def load_json(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror or exc}") from None
    return loads(text, str(path))


def _field(obj, key: str, where: str):
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    if key not in obj:
        raise FormatError(f"{where}: missing field {key!r}")
    return obj[key]


def _dim(obj, where: str) -> int:
    d = _field(obj, "dim", where)
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise FormatError(f"{where}.dim: expected a positive integer, got {d!r}")
    return d


def _real(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise FormatError(f"{where}: expected a number, got {x!r}")
    x = float(x)
    if not math.isfinite(x):
        raise FormatError(f"{where}: number must be finite")
    return x


def _vector(v, n: int | None, where: str) -> list[float]:
    if not isinstance(v, list):
        raise FormatError(f"{where}: expected a list of numbers")
    if n is not None and len(v) != n:
        raise FormatError(f"{where}: expected length {n}, got {len(v)}")
    return [_real(x, f"{where}[{i}]") for i, x in enumerate(v)]


def _vectors(rows, n: int, where: str) -> list[list[float]]:
    if not isinstance(rows, list):
        raise FormatError(f"{where}: expected a list")
    return [_vector(r, n, f"{where}[{i}]") for i, r in enumerate(rows)]


def measure_from_dict(obj, where: str = "measure") -> DiscreteMeasure:
    d = _dim(obj, where)
    atoms = _field(obj, "atoms", where)
    if not isinstance(atoms, list):
        raise FormatError(f"{where}.atoms: expected a list")
    pts, ws = [], []
    for i, atom in enumerate(atoms):
        at = f"{where}.atoms[{i}]"
        pts.append(_vector(_field(atom, "x", at), d, f"{at}.x"))
        w = _real(_field(atom, "w", at), f"{at}.w")
        if w < 0:
            raise FormatError(f"{at}.w: negative weight {w!r}")
        ws.append(w)
    return DiscreteMeasure(np.array(pts).reshape(len(pts), d), ws, dim=d)


def kernel_from_dict(obj, where: str = "kernel") -> DiscreteKernel:
    d = _dim(obj, where)
    src = _vectors(_field(obj, "source", where), d, f"{where}.source")
    tgt = _vectors(_field(obj, "targets", where), d, f"{where}.targets")
    Q = _vectors(_field(obj, "Q", where), len(tgt), f"{where}.Q")
    if len(Q) != len(src):
        raise FormatError(f"{where}.Q: expected {len(src)} rows, got {len(Q)}")
    for i, row in enumerate(Q):
        for j, x in enumerate(row):
            if x < 0:
                raise FormatError(f"{where}.Q[{i}][{j}]: negative kernel weight {x!r}")
    return DiscreteKernel(np.reshape(src, (len(src), d)), np.reshape(tgt, (len(tgt), d)),
                          np.reshape(Q, (len(src), len(tgt))), dim=d)


def support_function_from_dict(obj, where: str = "function") -> PolyhedralSupportFunction:
    d = _dim(obj, where)
    g = _vectors(_field(obj, "gradients", where), d, f"{where}.gradients")
    if not g:
        raise FormatError(f"{where}.gradients: need at least one gradient")
    return PolyhedralSupportFunction(g, dim=d)


def convex_function_from_dict(obj, where: str = "function") -> ConvexPolyhedralFunction:
    d = _dim(obj, where)
    pieces = _field(obj, "pieces", where)
    if not isinstance(pieces, list) or not pieces:
        raise FormatError(f"{where}.pieces: need a nonempty list")
    g = [_vector(_field(p, "gradient", f"{where}.pieces[{i}]"), d, f"{where}.pieces[{i}].gradient")
         for i, p in enumerate(pieces)]
    a = [_real(_field(p, "offset", f"{where}.pieces[{i}]"), f"{where}.pieces[{i}].offset")
         for i, p in enumerate(pieces)]
    return ConvexPolyhedralFunction(g, a, dim=d)


def samples_from_dict(obj, where: str = "samples") -> SphericalFunctionSamples:
    d = _dim(obj, where)
    u = _vectors(_field(obj, "directions", where), d, f"{where}.directions")
    f = _vector(_field(obj, "values", where), len(u), f"{where}.values")
    if not u:
        raise FormatError(f"{where}.directions: need at least one direction")
    try:
        return SphericalFunctionSamples(u, f, dim=d)
    except MeasureError as exc:
        raise FormatError(f"{where}: {exc}") from None


def read_measure(path) -> DiscreteMeasure:
    return measure_from_dict(load_json(path), str(path))


def read_kernel(path) -> DiscreteKernel:
    return kernel_from_dict(load_json(path), str(path))


def read_samples(path) -> SphericalFunctionSamples:
    return samples_from_dict(load_json(path), str(path))


def write(obj, path) -> None:
    Path(path).write_text(dumps(to_dict(obj)), encoding="utf-8")

# jsonio.py
from __future__ import annotations

import dataclasses
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from detrep import DetRep, KBlocks
from errors import DimensionMismatch, MalformedJSON, SchemaError
from pick import AglerCertificate, Kernels, PickProblemD2, PickProblemG
from poly2 import Poly2
from realize import AnyColligation, GammaColligation, GeneralColligation, SymmetricColligation

FLOAT_FORMAT = ".17g"

_COLLIGATION_KEYS = {
    "general": ("A11", "A12", "A21", "A22", "B1", "B2", "C1", "C2", "D"),
    "symmetric": ("A1", "A2", "B", "C", "D"),
    "gamma": ("alpha1", "alpha2", "beta", "gamma", "delta"),
}
_COLLIGATION_TYPES = {
    "general": GeneralColligation,
    "symmetric": SymmetricColligation,
    "gamma": GammaColligation,
}


# ========= Reading =========

def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedJSON(f"malformed JSON: {e.msg} (line {e.lineno}, column {e.colno})") from e


def load_path(path: Union[str, Path]) -> Any:
    path = Path(path)
    with path.open("r", encoding="utf8") as f:
        return loads(f.read())


def require(doc: Any, key: str, where: str) -> Any:
    if not isinstance(doc, Mapping):
        raise SchemaError(f"{where}: expected a JSON object, got {type(doc).__name__}")
    if key not in doc:
        raise SchemaError(f"{where}: missing key {key!r}")
    return doc[key]


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def decode_complex(x: Any, where: str = "value") -> complex:
    """[re, im] pair or a plain real number."""
    if _is_number(x):
        return complex(float(x), 0.0)
    if isinstance(x, list) and len(x) == 2 and all(_is_number(v) for v in x):
        return complex(float(x[0]), float(x[1]))
    raise SchemaError(f"{where}: expected [re, im] or a number, got {x!r}")


def decode_matrix(x: Any, where: str = "matrix") -> np.ndarray:
    """
    List of rows, each a list of entries ([re, im] or number).
    `[]` is the 0 x 0 matrix; a list of empty rows has zero columns.
    """
    if not isinstance(x, list):
        raise SchemaError(f"{where}: expected a list of rows, got {type(x).__name__}")
    if not x:
        return np.zeros((0, 0), dtype=np.complex128)
    rows: List[List[complex]] = []
    for i, row in enumerate(x):
        if not isinstance(row, list):
            raise SchemaError(f"{where}: row {i} is not a list")
        rows.append([decode_complex(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DimensionMismatch(f"{where}: ragged rows (widths {sorted(widths)})")
    if widths == {0}:
        return np.zeros((len(rows), 0), dtype=np.complex128)
    return np.array(rows, dtype=np.complex128)


def decode_complex_list(x: Any, where: str) -> List[complex]:
    if not isinstance(x, list):
        raise SchemaError(f"{where}: expected a list")
    return [decode_complex(v, f"{where}[{i}]") for i, v in enumerate(x)]


def decode_poly(doc: Any) -> Poly2:
    coords = require(doc, "coords", "polynomial")
    coeffs = decode_matrix(require(doc, "coeffs", "polynomial"), "coeffs")
    if coeffs.size == 0:
        raise SchemaError("polynomial: coeffs must be non-empty")
    deg = doc.get("deg")
    if deg is not None:
        if not (isinstance(deg, list) and len(deg) == 2):
            raise SchemaError("polynomial: deg must be [d1, d2]")
        if tuple(deg) != (coeffs.shape[0] - 1, coeffs.shape[1] - 1):
            raise DimensionMismatch(f"polynomial: deg {deg} does not match coeffs shape {coeffs.shape}")
    try:
        return Poly2(coords, coeffs)
    except ValueError as e:
        if isinstance(e, SchemaError):
            raise
        raise SchemaError(f"polynomial: {e}") from e


def decode_colligation(doc: Any) -> AnyColligation:
    """
    {"type": "general" | "symmetric" | "gamma", <blocks>}. A solution document
    carrying its realization under "colligation" is unwrapped.
    """
    if isinstance(doc, Mapping) and "type" not in doc and isinstance(doc.get("colligation"), Mapping):
        doc = doc["colligation"]
    kind = require(doc, "type", "colligation")
    if kind not in _COLLIGATION_KEYS:
        raise SchemaError(f"colligation: unknown type {kind!r} (expected general, symmetric or gamma)")
    blocks = {k: decode_matrix(require(doc, k, f"{kind} colligation"), k) for k in _COLLIGATION_KEYS[kind]}
    return _COLLIGATION_TYPES[kind](**blocks)


def decode_detrep(doc: Any) -> DetRep:
    form = require(doc, "form", "detrep")
    if form not in ("d2", "g"):
        raise SchemaError(f"detrep: form must be 'd2' or 'g', got {form!r}")
    constant = decode_complex(doc.get("constant", 1.0), "constant")
    return DetRep(
        form,
        decode_matrix(require(doc, "A1", "detrep"), "A1"),
        decode_matrix(require(doc, "A2", "detrep"), "A2"),
        constant,
    )


def decode_kblocks(doc: Any) -> KBlocks:
    n = require(doc, "n", "K blocks")
    m = require(doc, "m", "K blocks")
    if not (isinstance(n, int) and isinstance(m, int)):
        raise SchemaError("K blocks: n and m must be integers")
    return KBlocks(decode_matrix(require(doc, "K", "K blocks"), "K"), n, m)


def is_kblocks(doc: Any) -> bool:
    return isinstance(doc, Mapping) and "K" in doc and "n" in doc


def _nodes(doc: Any, keys: Tuple[str, str]) -> List[Tuple[complex, complex]]:
    raw = require(doc, "nodes", "problem")
    if not isinstance(raw, list):
        raise SchemaError("problem: nodes must be a list")
    a, b = keys
    return [
        (decode_complex(require(n, a, f"node {i}"), f"node {i}.{a}"),
         decode_complex(require(n, b, f"node {i}"), f"node {i}.{b}"))
        for i, n in enumerate(raw)
    ]


def is_d2_problem(doc: Any) -> bool:
    nodes = doc.get("nodes") if isinstance(doc, Mapping) else None
    if not isinstance(nodes, list) or not nodes:
        return False
    return isinstance(nodes[0], Mapping) and "z" in nodes[0]


def decode_problem_g(doc: Any) -> PickProblemG:
    nodes = _nodes(doc, ("s", "p"))
    values = decode_complex_list(require(doc, "values", "problem"), "values")
    return PickProblemG(tuple(nodes), tuple(values))


def decode_problem_d2(doc: Any) -> PickProblemD2:
    nodes = _nodes(doc, ("z", "zeta"))
    values = decode_complex_list(require(doc, "values", "problem"), "values")
    orbits = doc.get("orbits") or ()
    if not isinstance(orbits, (list, tuple)) or not all(isinstance(o, list) for o in orbits):
        raise SchemaError("problem: orbits must be a list of index lists")
    return PickProblemD2(tuple(nodes), tuple(values), tuple(tuple(o) for o in orbits))


def decode_kernels(doc: Any) -> Kernels:
    if isinstance(doc, Mapping) and "W" not in doc and isinstance(doc.get("kernels"), Mapping):
        doc = doc["kernels"]
    return Kernels(
        W=decode_matrix(require(doc, "W", "kernels"), "W"),
        Pz=decode_matrix(require(doc, "Pz", "kernels"), "Pz"),
        Pzeta=decode_matrix(require(doc, "Pzeta", "kernels"), "Pzeta"),
    )


def decode_certificate_pair(doc: Any) -> Tuple[np.ndarray, np.ndarray]:
    """(K1, K2) from a certificate object or a document holding one under "certificate"."""
    if isinstance(doc, Mapping) and "K1" not in doc and "certificate" in doc:
        doc = doc["certificate"]
        if doc is None:
            raise SchemaError("document carries no certificate (status was not feasible)")
    return (
        decode_matrix(require(doc, "K1", "certificate"), "K1"),
        decode_matrix(require(doc, "K2", "certificate"), "K2"),
    )


# ========= Writing =========

def encode_complex(z: Any) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def encode_matrix(M: np.ndarray) -> List[List[List[float]]]:
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim < 2:
        M = M.reshape(1, -1)
    if M.shape[0] == 0:
        return []
    return [[encode_complex(v) for v in row] for row in M]


def encode_poly(f: Poly2) -> Dict[str, Any]:
    return {"coords": f.coords.value, "deg": list(f.deg), "coeffs": encode_matrix(f.coeffs)}


def encode_colligation(c: AnyColligation) -> Dict[str, Any]:
    for kind, cls in _COLLIGATION_TYPES.items():
        if type(c) is cls:
            out: Dict[str, Any] = {"type": kind}
            out.update({k: encode_matrix(getattr(c, k)) for k in _COLLIGATION_KEYS[kind]})
            return out
    raise TypeError(f"not a colligation: {type(c).__name__}")


def encode_detrep(r: DetRep) -> Dict[str, Any]:
    return {
        "form": r.form.value,
        "A1": encode_matrix(r.A1),
        "A2": encode_matrix(r.A2),
        "constant": encode_complex(r.constant),
    }


def encode_problem_g(g: PickProblemG) -> Dict[str, Any]:
    return {
        "nodes": [{"s": encode_complex(s), "p": encode_complex(p)} for s, p in g.nodes],
        "values": [encode_complex(w) for w in g.values],
    }


def encode_problem_d2(d: PickProblemD2) -> Dict[str, Any]:
    return {
        "nodes": [{"z": encode_complex(z), "zeta": encode_complex(zeta)} for z, zeta in d.nodes],
        "values": [encode_complex(w) for w in d.values],
        "orbits": [list(o) for o in d.orbits],
    }


def encode_kernels(k: Kernels) -> Dict[str, Any]:
    return {"W": encode_matrix(k.W), "Pz": encode_matrix(k.Pz), "Pzeta": encode_matrix(k.Pzeta)}


def encode_certificate(cert: Optional[AglerCertificate]) -> Optional[Dict[str, Any]]:
    if cert is None:
        return None
    return {
        "K1": encode_matrix(cert.K1),
        "K2": encode_matrix(cert.K2),
        "residual": cert.residual,
        "eig_min": cert.eig_min,
    }


def to_jsonable(obj: Any) -> Any:
    """
    Generic conversion for report dataclasses: complex -> [re, im],
    2-D arrays -> matrices, enums -> values, tuples -> lists.
    """
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_complex(obj)
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2:
            return encode_matrix(obj)
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Poly2):
        return encode_poly(obj)
    if isinstance(obj, (GeneralColligation, SymmetricColligation, GammaColligation)):
        return encode_colligation(obj)
    if isinstance(obj, DetRep):
        return encode_detrep(obj)
    if isinstance(obj, AglerCertificate):
        return encode_certificate(obj)
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, FLOAT_FORMAT)
    if text == "-0":
        text = "0"
    return text


def _emit(obj: Any, level: int, indent: int, out: List[str]) -> None:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(pad + json.dumps(str(k), ensure_ascii=False) + ": ")
            _emit(v, level + 1, indent, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        # numeric leaves ([re, im] pairs, degree pairs) stay on one line
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            out.append("[")
            for i, v in enumerate(obj):
                _emit(v, level, indent, out)
                if i < len(obj) - 1:
                    out.append(", ")
            out.append("]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, level + 1, indent, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot emit {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """
    Deterministic JSON: key order preserved, floats with 17 significant digits,
    non-finite floats as null.
    """
    out: List[str] = []
    _emit(to_jsonable(obj), 0, indent, out)
    return "".join(out)


def save_path(obj: Any, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf8") as f:
        f.write(dumps(obj) + "\n")

"""JSON files for instruments and observables (schema ``qnd/1``).

Complex numbers are written as ``[re, im]`` pairs and matrices as lists of
rows.  An instrument file looks like::

    {"schema": "qnd/1", "dim_in": 2, "dim_out": 2,
     "outcomes": [{"label": "0", "kraus": [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]]]}, ...]}

An observable file gives ``eigenvalues`` plus either ``projectors`` (one
matrix per eigenvalue) or, for nondegenerate observables, ``vectors`` (one
eigenvector per eigenvalue).  ``labels`` is optional in both.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import CompletenessError, CpMap, DimensionError, Observable, QuantumInstrument

SCHEMA = "qnd/1"


class SchemaError(ValueError):
    """A file does not follow the qnd/1 layout."""

    def __init__(self, message: str, source: str = "<data>", field: str | None = None, line: int | None = None):
        self.source, self.field, self.line = source, field, line
        where = source if line is None else f"{source}:{line}"
        if field is not None:
            where += f": field '{field}'"
        super().__init__(f"{where}: {message}")


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def encode_vector(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).reshape(-1)]


def _complex(value, source, field) -> complex:
    if (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
    ):
        return complex(value[0], value[1])
    raise SchemaError("expected a [re, im] pair", source, field)


def decode_vector(data, source="<data>", field="vector") -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise SchemaError("expected a non-empty list of [re, im] pairs", source, field)
    return np.array([_complex(z, source, f"{field}[{i}]") for i, z in enumerate(data)])


def decode_matrix(data, source="<data>", field="matrix") -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise SchemaError("expected a non-empty list of rows", source, field)
    rows = [decode_vector(r, source, f"{field}[{i}]") for i, r in enumerate(data)]
    if len({len(r) for r in rows}) != 1:
        raise SchemaError("rows have different lengths", source, field)
    return np.array(rows)


def _read_json(path) -> tuple[dict, str]:
    source = str(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read file ({exc.strerror})", source) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg} (column {exc.colno})", source, line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise SchemaError("top level must be an object", source)
    if data.get("schema", SCHEMA) != SCHEMA:
        raise SchemaError(f"unsupported schema {data['schema']!r}, expected {SCHEMA!r}", source, "schema")
    return data, source


def _int_field(data, key, source) -> int:
    value = data.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise SchemaError("expected a positive integer", source, key)
    return value


def instrument_to_dict(inst: QuantumInstrument) -> dict:
    return {
        "schema": SCHEMA,
        "dim_in": inst.dim_in,
        "dim_out": inst.dim_out,
        "outcomes": [
            {"label": lab, "kraus": [encode_matrix(k) for k in b.kraus]}
            for lab, b in zip(inst.labels, inst.branches)
        ],
    }


def instrument_from_dict(data: dict, source: str = "<data>") -> QuantumInstrument:
    din = _int_field(data, "dim_in", source)
    dout = _int_field(data, "dim_out", source)
    outcomes = data.get("outcomes")
    if not isinstance(outcomes, list) or not outcomes:
        raise SchemaError("expected a non-empty list", source, "outcomes")
    labels, branches = [], []
    for m, entry in enumerate(outcomes):
        where = f"outcomes[{m}]"
        if not isinstance(entry, dict):
            raise SchemaError("expected an object", source, where)
        label = entry.get("label", str(m))
        if not isinstance(label, str):
            raise SchemaError("label must be a string", source, f"{where}.label")
        kraus = entry.get("kraus")
        if not isinstance(kraus, list) or not kraus:
            raise SchemaError("expected a non-empty list of matrices", source, f"{where}.kraus")
        ks = []
        for k, mat in enumerate(kraus):
            field = f"{where}.kraus[{k}]"
            op = decode_matrix(mat, source, field)
            if op.shape != (dout, din):
                raise SchemaError(f"Kraus operator has shape {op.shape}, expected ({dout}, {din})", source, field)
            ks.append(op)
        labels.append(label)
        try:
            branches.append(CpMap(np.array(ks)))
        except CompletenessError as exc:
            raise SchemaError(str(exc), source, where) from exc
    try:
        return QuantumInstrument(tuple(labels), tuple(branches))
    except CompletenessError as exc:
        raise CompletenessError(exc.residual, f"{source}: {exc}") from exc
    except (ValueError, DimensionError) as exc:
        raise SchemaError(str(exc), source, "outcomes") from exc


def load_instrument(path) -> QuantumInstrument:
    data, source = _read_json(path)
    return instrument_from_dict(data, source)


def save_instrument(inst: QuantumInstrument, path) -> None:
    Path(path).write_text(json.dumps(instrument_to_dict(inst), indent=1))


def observable_to_dict(obs: Observable, vectors: bool | None = None) -> dict:
    """Encode with eigenvectors when nondegenerate (unless ``vectors=False``), else projectors."""
    use_vectors = obs.is_nondegenerate if vectors is None else vectors
    out = {"schema": SCHEMA, "eigenvalues": [float(e) for e in obs.eigenvalues], "labels": list(obs.labels)}
    if use_vectors:
        out["vectors"] = [encode_vector(v) for v in obs.eigenstates()]
    else:
        out["projectors"] = [encode_matrix(p) for p in obs.projectors]
    return out


def observable_from_dict(data: dict, source: str = "<data>") -> Observable:
    ev = data.get("eigenvalues")
    if (
        not isinstance(ev, list)
        or not ev
        or not all(isinstance(e, (int, float)) and not isinstance(e, bool) for e in ev)
    ):
        raise SchemaError("expected a non-empty list of numbers", source, "eigenvalues")
    labels = data.get("labels", [])
    if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
        raise SchemaError("expected a list of strings", source, "labels")
    has_p, has_v = "projectors" in data, "vectors" in data
    if has_p == has_v:
        raise SchemaError("give exactly one of 'projectors' and 'vectors'", source)
    try:
        if has_v:
            vs = data["vectors"]
            if not isinstance(vs, list):
                raise SchemaError("expected a list of vectors", source, "vectors")
            vecs = [decode_vector(v, source, f"vectors[{i}]") for i, v in enumerate(vs)]
            if len({v.size for v in vecs}) != 1:
                raise SchemaError("vectors have different lengths", source, "vectors")
            return Observable.from_vectors(ev, np.array(vecs), tuple(labels))
        ps = data["projectors"]
        if not isinstance(ps, list):
            raise SchemaError("expected a list of matrices", source, "projectors")
        mats = [decode_matrix(p, source, f"projectors[{i}]") for i, p in enumerate(ps)]
        if len({m.shape for m in mats}) != 1:
            raise SchemaError("projectors have different shapes", source, "projectors")
        return Observable(ev, np.array(mats), tuple(labels))
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(str(exc), source, "vectors" if has_v else "projectors") from exc


def load_observable(path) -> Observable:
    data, source = _read_json(path)
    return observable_from_dict(data, source)


def save_observable(obs: Observable, path, vectors: bool | None = None) -> None:
    Path(path).write_text(json.dumps(observable_to_dict(obs, vectors), indent=1))

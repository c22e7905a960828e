"""JSON encoding of matrices, states, measures and scenario files.

Matrices are ``{"rows", "cols", "data"}`` with ``data`` a row-major list of
``[re, im]`` pairs; dimensions are explicit and checked against the data
length. Python's float repr round-trips exactly, so encode/decode is
bit-exact. Structural problems raise :class:`ParseError`; well-formed input
that violates a physical invariant raises the constructor's own error.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ParseError
from .linalg import DEFAULT_TOL, FactorLayout, Tolerance
from .outcomes import Event, OutcomeSpace
from .povm import OperatorValuedMeasure
from .states import DensityOperator, UnitaryOperator

__all__ = [
    "VERSION",
    "KINDS",
    "encode_matrix",
    "decode_matrix",
    "encode_layout",
    "decode_layout",
    "encode_density",
    "decode_density",
    "encode_unitary",
    "decode_unitary",
    "encode_povm",
    "decode_povm",
    "decode_povm_atoms",
    "encode_event",
    "decode_event",
    "encode_dilation",
    "Scenario",
    "load_scenario",
    "parse_scenario",
    "dump_scenario",
    "digest",
]

VERSION = "1"
KINDS = ("povm_check", "conditioning", "neumark", "probe_chain", "bb84")

_MATRIX = {
    "type": "object",
    "required": ["rows", "cols", "data"],
    "properties": {
        "rows": {"type": "integer", "minimum": 1},
        "cols": {"type": "integer", "minimum": 1},
        "data": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        },
    },
}
_LAYOUT = {
    "type": "array",
    "items": {"type": "array", "prefixItems": [{"type": "string"}, {"type": "integer", "minimum": 1}], "minItems": 2, "maxItems": 2},
    "minItems": 1,
}
_DENSITY = {"type": "object", "required": ["matrix"], "properties": {"matrix": _MATRIX, "layout": _LAYOUT}}
_POVM = {
    "type": "object",
    "required": ["dim", "atoms"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "atoms": {"type": "array", "items": _MATRIX, "minItems": 1},
        "space": {
            "type": "object",
            "required": ["label"],
            "properties": {"label": {"type": "string"}, "names": {"type": "array", "items": {"type": "string"}}},
        },
    },
}
_EVENT = {"type": "array", "items": {"type": "integer", "minimum": 0}}

PAYLOAD_SCHEMAS = {
    "povm_check": {
        "type": "object",
        "required": ["povms"],
        "properties": {
            "povms": {"type": "array", "items": _POVM, "minItems": 1},
            "require_projective": {"type": "boolean"},
        },
    },
    "conditioning": {
        "type": "object",
        "required": ["state", "measure_a", "measure_b", "condition"],
        "properties": {
            "state": _DENSITY,
            "measure_a": _POVM,
            "measure_b": _POVM,
            "condition": _EVENT,
        },
    },
    "neumark": {
        "type": "object",
        "required": ["povm"],
        "properties": {
            "povm": _POVM,
            "states": {"type": "array", "items": _DENSITY},
            "random_states": {"type": "integer", "minimum": 0},
            "obstacle": {"type": "object", "required": ["x", "y"], "properties": {"x": _EVENT, "y": _EVENT}},
        },
    },
    "probe_chain": {
        "type": "object",
        "required": ["particle", "steps"],
        "properties": {
            "particle": _DENSITY,
            "steps": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "required": ["probe", "interaction", "measure"],
                    "properties": {"probe": _DENSITY, "interaction": _MATRIX, "measure": _POVM},
                },
            },
            "events": {"type": "array", "items": _EVENT},
        },
    },
    "bb84": {
        "type": "object",
        "required": ["eve_probe", "alice_state", "attack", "eve_measure", "bob_measure", "alice_measure", "key_events"],
        "properties": {
            "eve_probe": _DENSITY,
            "alice_state": _DENSITY,
            "attack": _MATRIX,
            "eve_measure": _POVM,
            "bob_measure": _POVM,
            "alice_measure": _POVM,
            "key_events": {"type": "array", "items": _EVENT, "minItems": 4, "maxItems": 4},
            "random_attacks": {
                "type": "object",
                "required": ["count", "eve_dims"],
                "properties": {
                    "count": {"type": "integer", "minimum": 0},
                    "eve_dims": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                },
            },
        },
    },
}

ENVELOPE_SCHEMA = {
    "type": "object",
    "required": ["version", "kind", "payload"],
    "properties": {"version": {"const": VERSION}, "kind": {"enum": list(KINDS)}, "payload": {"type": "object"}},
}


def _check(obj, schema, where: str) -> None:
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise ParseError(f"{where}{'/' + path if path else ''}: {exc.message}") from None


# -- matrices and layouts ---------------------------------------------------

def encode_matrix(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ParseError(f"expected a 2-d matrix, got shape {m.shape}")
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def decode_matrix(obj) -> np.ndarray:
    _check(obj, _MATRIX, "matrix")
    rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    if len(data) != rows * cols:
        raise ParseError(f"matrix declares {rows}x{cols} but carries {len(data)} entries")
    flat = np.array([complex(re, im) for re, im in data], dtype=complex)
    return flat.reshape(rows, cols)


def encode_layout(layout: FactorLayout) -> list:
    return [[label, dim] for label, dim in layout.factors]


def decode_layout(obj) -> FactorLayout:
    _check(obj, _LAYOUT, "layout")
    return FactorLayout(tuple((str(label), int(dim)) for label, dim in obj))


# -- states, unitaries, measures ----------------------------------------------

def encode_density(rho: DensityOperator) -> dict:
    return {"matrix": encode_matrix(rho.matrix), "layout": encode_layout(rho.layout)}


def decode_density(obj, tol: Tolerance = DEFAULT_TOL) -> DensityOperator:
    _check(obj, _DENSITY, "density")
    layout = decode_layout(obj["layout"]) if "layout" in obj else None
    return DensityOperator(decode_matrix(obj["matrix"]), layout, tol)


def encode_unitary(u: UnitaryOperator) -> dict:
    return {"matrix": encode_matrix(u.matrix), "layout": encode_layout(u.layout)}


def decode_unitary(obj, layout: FactorLayout | None = None, tol: Tolerance = DEFAULT_TOL) -> UnitaryOperator:
    return UnitaryOperator(decode_matrix(obj), layout, tol)


def encode_povm(m: OperatorValuedMeasure) -> dict:
    space = {"label": m.space.label}
    if m.space.atom_names is not None:
        space["names"] = list(m.space.atom_names)
    return {"space": space, "dim": m.dim, "atoms": [encode_matrix(a) for a in m.atoms]}


def decode_povm_atoms(obj) -> tuple[OutcomeSpace, list[np.ndarray]]:
    """Structural decode only; physical validation is left to the caller."""
    _check(obj, _POVM, "povm")
    atoms = [decode_matrix(a) for a in obj["atoms"]]
    dim = obj["dim"]
    for j, a in enumerate(atoms):
        if a.shape != (dim, dim):
            raise ParseError(f"povm atom {j} has shape {a.shape}, declared dim {dim}")
    space_obj = obj.get("space", {"label": "Ω"})
    names = space_obj.get("names")
    if names is not None and len(names) != len(atoms):
        raise ParseError(f"{len(names)} atom names for {len(atoms)} atoms")
    return OutcomeSpace(space_obj["label"], len(atoms), names), atoms


def decode_povm(obj, tol: Tolerance = DEFAULT_TOL) -> OperatorValuedMeasure:
    space, atoms = decode_povm_atoms(obj)
    return OperatorValuedMeasure(atoms, space, tol)


def encode_event(x: Event) -> list[int]:
    return [int(i) for i in x.members]


def decode_event(obj, space: OutcomeSpace) -> Event:
    _check(obj, _EVENT, "event")
    bad = [i for i in obj if i >= space.atoms]
    if bad:
        raise ParseError(f"event indices {bad} outside outcome space {space.label!r} of size {space.atoms}")
    return Event(space, obj)


def encode_dilation(dil) -> dict:
    """``{D, Q, atoms}`` for a :class:`NeumarkDilation` or :class:`FamilyMember`."""
    pvm = dil.extended_pvm
    return {
        "D": int(pvm.dim),
        "Q": encode_matrix(dil.q_projection),
        "atoms": [encode_matrix(a) for a in pvm.atoms],
    }


# -- scenario envelope --------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """A parsed scenario file: ``kind``, raw ``payload`` and the input ``digest``."""

    kind: str
    payload: dict
    digest: str


def digest(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def parse_scenario(raw: bytes | str) -> Scenario:
    if isinstance(raw, str):
        raw = raw.encode("utf-8")
    try:
        obj = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"not valid JSON: {exc}") from None
    _check(obj, ENVELOPE_SCHEMA, "scenario")
    _check(obj["payload"], PAYLOAD_SCHEMAS[obj["kind"]], f"payload[{obj['kind']}]")
    return Scenario(obj["kind"], obj["payload"], digest(raw))


def load_scenario(path: str | Path) -> Scenario:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from None
    return parse_scenario(raw)


def dump_scenario(kind: str, payload: dict) -> str:
    if kind not in KINDS:
        raise ParseError(f"unknown scenario kind {kind!r}")
    return json.dumps({"version": VERSION, "kind": kind, "payload": payload}, indent=1, ensure_ascii=False) + "\n"

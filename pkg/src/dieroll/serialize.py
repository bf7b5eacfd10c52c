"""JSON encodings (schema ``dieroll/1``) for protocols, certificates, ensembles and reports.

Complex numbers are written as ``[re, im]`` pairs; matrices as lists of rows
of such pairs.  Readers also accept plain real numbers.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .cheating import AliceCertificate, BobCertificate
from .matlin import BipartiteDims
from .protocol import DricProtocol

SCHEMA = "dieroll/1"


class SchemaError(ValueError):
    pass


def _check_schema(obj: dict, kind: str):
    if obj.get("schema") != SCHEMA:
        raise SchemaError(f"{kind}: expected schema {SCHEMA!r}, got {obj.get('schema')!r}")


def encode_array(A) -> list:
    A = np.asarray(A)
    pairs = np.stack([A.real, np.imag(A)], axis=-1)
    return pairs.tolist()


def decode_array(data, ndim: int) -> np.ndarray:
    """Decode an ``ndim``-dimensional array; an extra trailing axis of 2 means ``[re, im]``."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == ndim + 1 and arr.shape[-1] == 2:
        out = arr[..., 0] + 1j * arr[..., 1]
    elif arr.ndim == ndim:
        out = arr.astype(complex)
    else:
        raise SchemaError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if not np.any(out.imag):
        return out.real.copy()
    return out


def protocol_to_json(p: DricProtocol) -> dict:
    return {
        "schema": SCHEMA,
        "D": p.D,
        "dimA": p.dims.dimA,
        "dimB": p.dims.dimB,
        "states": [encode_array(s) for s in p.states],
        "label": p.label,
    }


def protocol_from_json(obj: dict) -> DricProtocol:
    _check_schema(obj, "protocol")
    dims = BipartiteDims(int(obj["dimA"]), int(obj["dimB"]))
    states = []
    for s in obj["states"]:
        v = decode_array(s, 1)
        states.append(v)
    return DricProtocol(int(obj["D"]), dims, tuple(states), obj.get("label", ""))


def certificate_to_json(cert) -> dict:
    if isinstance(cert, BobCertificate):
        return {"schema": SCHEMA, "party": "bob", "form": "trace", "matrices": [encode_array(cert.X)]}
    if isinstance(cert, AliceCertificate):
        out = {"schema": SCHEMA, "party": "alice", "form": cert.form, "s": cert.s}
        if cert.eps is not None:
            out["eps"] = cert.eps
        out["matrices"] = [encode_array(Z) for Z in cert.Z]
        return out
    raise TypeError(f"not a certificate: {type(cert).__name__}")


def certificate_from_json(obj: dict):
    _check_schema(obj, "certificate")
    mats = [decode_array(M, 2) for M in obj["matrices"]]
    party = obj.get("party")
    if party == "bob":
        if len(mats) != 1:
            raise SchemaError("a Bob certificate holds exactly one matrix")
        return BobCertificate(mats[0])
    if party == "alice":
        return AliceCertificate(float(obj["s"]), mats, form=obj.get("form", "inverse"), eps=obj.get("eps"))
    raise SchemaError(f"unknown party {party!r}")


def ensemble_to_json(e, witnesses=None) -> dict:
    out = {
        "schema": SCHEMA,
        "states": [encode_array(r) for r in e.states],
        "priors": [float(x) for x in e.priors],
    }
    if witnesses is not None:
        out["witnesses"] = [encode_array(W) for W in witnesses]
    return out


def ensemble_from_json(obj: dict):
    """Returns ``(ensemble, witnesses or None)``."""
    from .bounds import QsdEnsemble

    _check_schema(obj, "ensemble")
    states = tuple(decode_array(r, 2) for r in obj["states"])
    e = QsdEnsemble(states, tuple(float(x) for x in obj["priors"]))
    W = obj.get("witnesses")
    return e, (None if W is None else [decode_array(w, 2) for w in W])


def solution_to_json(sol) -> dict:
    return {
        "schema": SCHEMA,
        "status": sol.status,
        "iterations": sol.iterations,
        "primal_value": sol.primal_value,
        "dual_value": sol.dual_value,
        "gap": sol.gap,
        "primal_residual": sol.primal_residual,
        "dual_residual": sol.dual_residual,
        "y": [float(v) for v in sol.y],
    }


def dump(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1), encoding="utf-8")


def load(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))

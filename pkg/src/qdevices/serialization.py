"""JSON (de)serialization for matrices, Kraus sets, Choi operators and POVMs.

Matrices are encoded as nested arrays of ``[re, im]`` pairs, row-major.
"""

from __future__ import annotations

import json

import numpy as np

from .channels import ChoiOperator, KrausSet
from .exceptions import ShapeError
from .povm import Povm

__all__ = [
    "matrix_to_json",
    "matrix_from_json",
    "kraus_to_json",
    "kraus_from_json",
    "choi_to_json",
    "choi_from_json",
    "povm_to_json",
    "povm_from_json",
    "dump",
    "load",
]


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2:  # plain real matrix is accepted too
        return arr.astype(complex)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ShapeError(f"matrix JSON must be nested [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def kraus_to_json(k: KrausSet) -> dict:
    return {
        "in_dim": k.in_dim,
        "out_dim": k.out_dim,
        "operators": [matrix_to_json(op) for op in k.operators],
    }


def kraus_from_json(data: dict) -> KrausSet:
    ops = tuple(matrix_from_json(op) for op in data["operators"])
    k = KrausSet(operators=ops)
    for key in ("in_dim", "out_dim"):
        if key in data and int(data[key]) != getattr(k, key):
            raise ShapeError(f"declared {key}={data[key]} contradicts operator shapes")
    return k


def choi_to_json(r: ChoiOperator) -> dict:
    return {"in_dim": r.in_dim, "out_dim": r.out_dim, "mat": matrix_to_json(r.mat)}


def choi_from_json(data: dict) -> ChoiOperator:
    return ChoiOperator(
        mat=matrix_from_json(data["mat"]),
        in_dim=int(data["in_dim"]),
        out_dim=int(data["out_dim"]),
    )


def povm_to_json(p: Povm) -> dict:
    return {
        "d": p.dim,
        "labels": list(p.labels),
        "effects": [matrix_to_json(e) for e in p.effects],
    }


def povm_from_json(data: dict) -> Povm:
    effects = tuple(matrix_from_json(e) for e in data["effects"])
    labels = tuple(data.get("labels") or ())
    p = Povm(effects=effects, labels=labels)
    if "d" in data and int(data["d"]) != p.dim:
        raise ShapeError(f"declared d={data['d']} contradicts effect shapes")
    return p


def dump(obj: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def load(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)

"""JSON encodings for matrices, ensembles, setups and transvection lists.

Matrix:   {"rows": n, "cols": n, "entries": [[re, im], ...]}   (row-major)
Ensemble: {"m": m, "n": n, "mats": [Matrix, ...]}
Floats are written with ``repr`` precision, so reading back is exact.
"""
import json

import numpy as np

from .ensemble import DiagonalSet, PerturbationSetup, Transvection
from .linalg import as_mat


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _unpair(p):
    return complex(p[0], p[1])


def matrix_to_json(A):
    A = as_mat(A)
    return {
        "rows": A.shape[0],
        "cols": A.shape[1],
        "entries": [_pair(z) for z in A.ravel()],
    }


def matrix_from_json(obj):
    rows, cols = int(obj["rows"]), int(obj["cols"])
    entries = obj["entries"]
    if len(entries) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
    return as_mat(np.array([_unpair(p) for p in entries]).reshape(rows, cols))


def ensemble_to_json(M):
    M = np.asarray(M)
    return {"m": M.shape[0], "n": M.shape[1], "mats": [matrix_to_json(X) for X in M]}


def ensemble_from_json(obj):
    mats = np.stack([matrix_from_json(x) for x in obj["mats"]])
    if mats.shape[0] != obj["m"] or mats.shape[1] != obj["n"]:
        raise ValueError("ensemble header disagrees with its matrices")
    return mats


def setup_to_json(setup):
    return {
        "n": setup.n,
        "m": setup.m,
        "seed": setup.seed,
        "lambda": setup.lam,
        "a": _pair(setup.a),
        "tpos": list(setup.tpos),
        "real_only": setup.real_only,
        "U": matrix_to_json(setup.U),
        "diag": {"m": setup.m, "n": setup.n, "d": [[_pair(z) for z in row] for row in setup.diag.d]},
        "R": [matrix_to_json(X) for X in setup.R],
    }


def setup_from_json(obj):
    d = np.array([[_unpair(p) for p in row] for row in obj["diag"]["d"]])
    return PerturbationSetup(
        U=matrix_from_json(obj["U"]),
        diag=DiagonalSet(d),
        R=np.stack([matrix_from_json(x) for x in obj["R"]]),
        lam=obj.get("lambda", 0.0),
        a=_unpair(obj.get("a", [0.0, 0.0])),
        tpos=tuple(obj.get("tpos", (1, 2))),
        seed=obj.get("seed"),
        real_only=bool(obj.get("real_only", False)),
    )


def transvections_to_json(factors):
    return {"factors": [{"i": t.i, "j": t.j, "a": _pair(t.a)} for t in factors]}


def transvections_from_json(obj):
    return [Transvection(f["i"], f["j"], _unpair(f["a"])) for f in obj["factors"]]


def dump(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load(path):
    with open(path) as fh:
        return json.load(fh)

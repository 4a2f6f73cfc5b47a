"""CSV and JSON serialization for samples, embeddings and experiment records.

Floats are written with 17 significant digits so files round-trip exactly and
identical inputs produce byte-identical outputs.
"""

from __future__ import annotations

import json
import os
from typing import Optional

import numpy as np

from . import __version__
from .core import EmbeddingPair
from .data import SampleSet
from .errors import ValidationError

FMT = "%.17g"


def write_matrix(path, X, header: Optional[list] = None) -> None:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    with open(path, "w", newline="") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        np.savetxt(fh, X, fmt=FMT, delimiter=",")


def write_row(path, x) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(FMT % v for v in np.asarray(x, dtype=float).ravel()) + "\n")


def write_ints(path, idx) -> None:
    with open(path, "w") as fh:
        for v in np.asarray(idx, dtype=np.int64).ravel():
            fh.write(f"{v}\n")


def read_matrix(path, header: bool = False) -> np.ndarray:
    try:
        X = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    return X


def read_vector(path, header: bool = False) -> np.ndarray:
    X = read_matrix(path, header)
    if X.shape[1] != 1:
        X = X.reshape(1, -1) if X.shape[0] == 1 else X
        if X.shape[0] != 1:
            raise ValidationError(f"{path}: expected a single column or a single row")
    return X.ravel()


def read_samples(a_path, b_path, y_path, header: bool = False) -> SampleSet:
    return SampleSet(read_matrix(a_path, header), read_matrix(b_path, header), read_vector(y_path, header))


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _list(x):
    return None if x is None else [float(v) for v in np.asarray(x).ravel()]


def save_embedding(out_dir, emb: EmbeddingPair, extra: Optional[dict] = None) -> None:
    """U.csv, V.csv, sigma.csv and meta.json.

    The feature means go in the metadata: for every normalization mode the
    whitened projection of x equals (x - mu) @ U, so U, mu and sigma are all a
    predictor needs to embed new entities.
    """
    os.makedirs(out_dir, exist_ok=True)
    write_matrix(os.path.join(out_dir, "U.csv"), emb.U)
    write_matrix(os.path.join(out_dir, "V.csv"), emb.V)
    write_row(os.path.join(out_dir, "sigma.csv"), emb.sigma)
    st = emb.state
    meta = {
        "r": emb.r,
        "m": int(emb.m),
        "normalize": emb.normalize,
        "jitter": float(st.jitter) if st is not None else 0.0,
        "seed": emb.seed,
        "version": __version__,
        "mu_a": _list(st.mu_a) if st is not None else None,
        "mu_b": _list(st.mu_b) if st is not None else None,
    }
    meta.update(extra or {})
    write_json(os.path.join(out_dir, "meta.json"), meta)


def save_factors(out_dir, factors: dict, meta: dict) -> None:
    """Plain orthonormal factors (baselines, tensor modes): one CSV per name plus meta.json."""
    os.makedirs(out_dir, exist_ok=True)
    for name, F in factors.items():
        write_matrix(os.path.join(out_dir, f"{name}.csv"), F)
    write_json(os.path.join(out_dir, "meta.json"), dict(meta, version=__version__))


def load_projection(in_dir):
    """(U, V, mu_a, mu_b, scale) such that entity features embed as ((x - mu) @ U) * scale."""
    meta = read_json(os.path.join(in_dir, "meta.json"))
    U = read_matrix(os.path.join(in_dir, "U.csv"))
    V = read_matrix(os.path.join(in_dir, "V.csv"))
    sig_path = os.path.join(in_dir, "sigma.csv")
    scale = np.sqrt(read_vector(sig_path)) if os.path.exists(sig_path) else np.ones(U.shape[1])
    mu_a = np.asarray(meta["mu_a"]) if meta.get("mu_a") is not None else np.zeros(U.shape[0])
    mu_b = np.asarray(meta["mu_b"]) if meta.get("mu_b") is not None else np.zeros(V.shape[0])
    return U, V, mu_a, mu_b, scale


def load_embedding_meta(in_dir) -> dict:
    return read_json(os.path.join(in_dir, "meta.json"))

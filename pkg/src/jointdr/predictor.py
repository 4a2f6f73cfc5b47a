"""Nadaraya-Watson prediction of dyadic scores on embedded entity features.

For a query pair (i, j) the prediction is a weighted mean of the observed
scores y_pq, with weight K_hD(a_i - a_p) * K_hG(b_j - b_q) and the Gaussian
kernel K_h(u) = exp(-||u||^2 / (2 h^2)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .core import EmbeddingPair
from .data import SampleSet
from .errors import DimensionMismatch, IndexOutOfRange, ValidationError

MIN_WEIGHT = 1e-300
QUERY_CHUNK = 64


def embed_scaled(emb: EmbeddingPair, X, side: str = "a") -> np.ndarray:
    """Whiten raw features with the fit's normalization, project on the whitened
    embedding and scale coordinate k by sqrt(sigma[k])."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if side == "a":
        W, xf = emb.whitened_U, (emb.state.transform_a if emb.state is not None else None)
    elif side == "b":
        W, xf = emb.whitened_V, (emb.state.transform_b if emb.state is not None else None)
    else:
        raise ValidationError("side must be 'a' or 'b'")
    if X.shape[1] != W.shape[0]:
        raise DimensionMismatch(f"features have {X.shape[1]} columns, embedding expects {W.shape[0]}")
    Xw = X if xf is None else xf(X)
    return (Xw @ W) * np.sqrt(emb.sigma)


def median_heuristic_bandwidth(features, seed: int = 0, max_rows: int = 1000) -> float:
    """Median pairwise Euclidean distance over at most ``max_rows`` sampled rows; 1.0 if that is zero."""
    X = np.atleast_2d(np.asarray(features, dtype=float))
    if X.shape[0] < 2:
        raise ValidationError("need at least two rows")
    if X.shape[0] > max_rows:
        idx = np.random.default_rng(seed).choice(X.shape[0], size=max_rows, replace=False)
        X = X[np.sort(idx)]
    h = float(np.median(pdist(X)))
    return h if h > 0 else 1.0


def _as_triples(obs):
    obs = np.asarray(obs, dtype=float)
    if obs.ndim != 2 or obs.shape[1] != 3:
        raise DimensionMismatch("observed triples must be an (k, 3) array of (i, j, y)")
    return obs[:, 0].astype(np.int64), obs[:, 1].astype(np.int64), obs[:, 2].copy()


@dataclass(frozen=True)
class KernelPredictor:
    A_emb: np.ndarray
    B_emb: np.ndarray
    obs_i: np.ndarray
    obs_j: np.ndarray
    obs_y: np.ndarray
    h_D: float
    h_G: float
    fallback: float

    def __post_init__(self):
        if not (self.h_D > 0 and self.h_G > 0):
            raise ValidationError("bandwidths must be positive")
        if self.obs_y.size == 0:
            raise ValidationError("need at least one observed score")
        _check_index(self.obs_i, self.A_emb.shape[0], "row")
        _check_index(self.obs_j, self.B_emb.shape[0], "column")


def _check_index(idx, n, what):
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexOutOfRange(f"{what} index outside [0, {n})")


def make_predictor(A_emb, B_emb, observed, h_D=None, h_G=None, seed: int = 0) -> KernelPredictor:
    """Build a predictor; missing bandwidths come from the median heuristic."""
    A_emb = np.atleast_2d(np.asarray(A_emb, dtype=float))
    B_emb = np.atleast_2d(np.asarray(B_emb, dtype=float))
    oi, oj, oy = _as_triples(observed)
    if h_D is None:
        h_D = median_heuristic_bandwidth(A_emb, seed)
    if h_G is None:
        h_G = median_heuristic_bandwidth(B_emb, seed)
    fallback = float(oy.mean()) if oy.size else 0.0
    return KernelPredictor(A_emb, B_emb, oi, oj, oy, float(h_D), float(h_G), fallback)


def predict_all(kp: KernelPredictor, queries) -> np.ndarray:
    """Predicted scores for an (k, 2) array of (i, j) query pairs.

    Each query is reduced independently over the observed triples in their
    stored order, so the result for a pair does not depend on the batch it
    arrives in.
    """
    q = np.asarray(queries, dtype=np.int64).reshape(-1, 2)
    out = np.empty(q.shape[0])
    if q.shape[0] == 0:
        return out
    _check_index(q[:, 0], kp.A_emb.shape[0], "row")
    _check_index(q[:, 1], kp.B_emb.shape[0], "column")
    sD = -0.5 / kp.h_D**2
    sG = -0.5 / kp.h_G**2
    # responses relative to the first one, so a constant response is reproduced exactly
    base = kp.obs_y[0]
    resid = kp.obs_y - base
    for start in range(0, q.shape[0], QUERY_CHUNK):
        qi = q[start : start + QUERY_CHUNK, 0]
        qj = q[start : start + QUERY_CHUNK, 1]
        dD = sD * cdist(kp.A_emb[qi], kp.A_emb, "sqeuclidean")
        dG = sG * cdist(kp.B_emb[qj], kp.B_emb, "sqeuclidean")
        for t in range(qi.size):
            # 1-D per-query reductions keep results independent of the batch shape
            w = np.exp(dD[t])[kp.obs_i] * np.exp(dG[t])[kp.obs_j]
            den = np.sum(w)
            out[start + t] = base + np.sum(w * resid) / den if den >= MIN_WEIGHT else kp.fallback
    return out


def predict(kp: KernelPredictor, i: int, j: int) -> float:
    return float(predict_all(kp, [(i, j)])[0])


def fill_zeros(observed, n_cols: int) -> np.ndarray:
    """Complete every observed row index with zero scores for the missing columns."""
    oi, oj, oy = _as_triples(observed)
    _check_index(oj, n_cols, "column")
    rows = np.unique(oi)
    full = np.zeros((rows.size, n_cols))
    pos = np.searchsorted(rows, oi)
    full[pos, oj] = oy
    ii, jj = np.meshgrid(rows, np.arange(n_cols), indexing="ij")
    return np.column_stack([ii.ravel(), jj.ravel(), full.ravel()])


def expand_dyadic(A_ent, B_ent, observed) -> SampleSet:
    """One sample per observed triple: (a_i, b_j, y_ij)."""
    A_ent = np.atleast_2d(np.asarray(A_ent, dtype=float))
    B_ent = np.atleast_2d(np.asarray(B_ent, dtype=float))
    oi, oj, oy = _as_triples(observed)
    _check_index(oi, A_ent.shape[0], "row")
    _check_index(oj, B_ent.shape[0], "column")
    return SampleSet(A_ent[oi], B_ent[oj], oy)

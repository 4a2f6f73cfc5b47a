"""Subspace error, NSEE, log-log slope fits and recall@k."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy import linalg

from .errors import (
    DimensionMismatch,
    EmptyPositives,
    NonPositiveValue,
    NotOrthonormal,
    ValidationError,
)

ORTHO_TOL = 1e-6


def _gram_dev(X):
    return np.abs(X.T @ X - np.eye(X.shape[1])).max() if X.shape[1] else 0.0


def orthonormalize(X):
    """Return ``X`` unchanged if its columns are orthonormal, else its economy-QR factor."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if _gram_dev(X) <= ORTHO_TOL:
        return X
    Q, _ = linalg.qr(X, mode="economic", check_finite=False)
    return Q


def subspace_distance(U_true, U_hat) -> float:
    """||U_hat - P_U U_hat||_F with U_hat orthonormalized first; lies in [0, sqrt(r)]."""
    U_true = np.atleast_2d(np.asarray(U_true, dtype=float))
    U_hat = np.atleast_2d(np.asarray(U_hat, dtype=float))
    if U_true.shape[0] != U_hat.shape[0]:
        raise DimensionMismatch(f"ambient dimensions differ: {U_true.shape[0]} vs {U_hat.shape[0]}")
    if _gram_dev(U_true) > ORTHO_TOL:
        raise NotOrthonormal("reference basis does not have orthonormal columns")
    Uh = orthonormalize(U_hat)
    resid = Uh - U_true @ (U_true.T @ Uh)
    return float(np.linalg.norm(resid))


def nsee(U, U_hat, V, V_hat) -> float:
    """Normalized subspace estimation error: max of both distances over sqrt(r)."""
    r = np.atleast_2d(U).shape[1]
    d = max(subspace_distance(U, U_hat), subspace_distance(V, V_hat))
    return d / np.sqrt(r)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    points: List[Tuple[float, float]]


def fit_loglog_slope(xs, ys) -> SlopeFit:
    """Ordinary least squares of ln(y) on ln(x)."""
    xs = np.asarray(xs, dtype=float).reshape(-1)
    ys = np.asarray(ys, dtype=float).reshape(-1)
    if xs.shape != ys.shape:
        raise DimensionMismatch("xs and ys differ in length")
    if xs.size < 2:
        raise ValidationError("need at least two points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise NonPositiveValue("log-log fit needs strictly positive values")
    if np.any(np.diff(xs) <= 0):
        raise ValidationError("xs must be strictly increasing")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    return SlopeFit(float(slope), float(intercept), list(zip(lx.tolist(), ly.tolist())))


def top_k(scores, k):
    """Indices of the k largest scores, ties broken toward the smaller index."""
    scores = np.asarray(scores, dtype=float).reshape(-1)
    return np.argsort(-scores, kind="stable")[:k]


def recall_at_k(scores, positives, k: int) -> float:
    positives = set(int(p) for p in positives)
    if not positives:
        raise EmptyPositives("recall is undefined without positives")
    if k < 1:
        raise ValidationError("k must be at least 1")
    hits = positives.intersection(top_k(scores, k).tolist())
    return len(hits) / len(positives)

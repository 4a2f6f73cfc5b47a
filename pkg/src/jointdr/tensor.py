"""Third-order proxy tensors and truncated HOSVD factors.

Used when there are three feature types, or two feature types with a vector
response. Embeddings for a feature type are the leading left singular vectors
of the corresponding mode unfolding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import truncated_svd
from .errors import DimensionMismatch, RankTooLarge, ValidationError

FEATURE_A, FEATURE_B, FEATURE_C, RESPONSE = "FeatureA", "FeatureB", "FeatureC", "Response"
MAX_ENTRIES = 10**8
CHUNK = 16384


@dataclass(frozen=True)
class ProxyTensor3:
    T: np.ndarray
    mode_roles: Tuple[str, str, str]


def _mat(X, name):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D")
    return X


def _check_budget(shape, max_entries):
    if int(np.prod(shape)) > max_entries:
        raise ValidationError(f"tensor of shape {shape} exceeds the {max_entries}-entry budget")


def _accumulate(a, y, b, c, chunk=CHUNK):
    # sum_i y_i a_i (x) b_i (x) c_i as a mode-0 unfolding, over row chunks in sample order
    acc = np.zeros((a.shape[1], b.shape[1] * c.shape[1]))
    for start in range(0, a.shape[0], chunk):
        sl = slice(start, start + chunk)
        kr = (b[sl, :, None] * c[sl, None, :]).reshape(b[sl].shape[0], -1)
        acc += (a[sl] * y[sl, None]).T @ kr
    return acc.reshape(a.shape[1], b.shape[1], c.shape[1])


def build_proxy3(a, b, c, y, max_entries: int = MAX_ENTRIES) -> ProxyTensor3:
    """T = (1/m) sum_i y_i a_i (x) b_i (x) c_i."""
    a, b, c = _mat(a, "a"), _mat(b, "b"), _mat(c, "c")
    y = np.asarray(y, dtype=float).reshape(-1)
    m = y.shape[0]
    if not (a.shape[0] == b.shape[0] == c.shape[0] == m) or m < 1:
        raise DimensionMismatch("a, b, c and y must share a positive row count")
    _check_budget((a.shape[1], b.shape[1], c.shape[1]), max_entries)
    T = _accumulate(a, y, b, c) / m
    return ProxyTensor3(T, (FEATURE_A, FEATURE_B, FEATURE_C))


def build_proxy_multiresponse(a, b, Y, max_entries: int = MAX_ENTRIES) -> ProxyTensor3:
    """T = (1/m) sum_i y_i (x) a_i (x) b_i for vector responses; mode 0 is the response."""
    a, b = _mat(a, "a"), _mat(b, "b")
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    m = Y.shape[0]
    if not (a.shape[0] == b.shape[0] == m) or m < 1:
        raise DimensionMismatch("a, b and Y must share a positive row count")
    _check_budget((Y.shape[1], a.shape[1], b.shape[1]), max_entries)
    T = _accumulate(Y, np.ones(m), a, b) / m
    return ProxyTensor3(T, (RESPONSE, FEATURE_A, FEATURE_B))


def unfold(T, mode: int) -> np.ndarray:
    """Mode-k unfolding: n_k rows, remaining axes flattened in order."""
    return np.moveaxis(np.asarray(T), mode, 0).reshape(T.shape[mode], -1)


def fold(M, mode: int, shape) -> np.ndarray:
    rest = [s for k, s in enumerate(shape) if k != mode]
    return np.moveaxis(np.asarray(M).reshape([shape[mode]] + rest), 0, mode)


def hosvd_factors(t: ProxyTensor3, ranks: Sequence[Optional[int]]):
    """Per-mode orthonormal factors; a rank of None skips that mode (returns None)."""
    T = t.T
    if len(ranks) != T.ndim:
        raise DimensionMismatch(f"need one rank per mode ({T.ndim})")
    out = []
    for k, rk in enumerate(ranks):
        if rk is None:
            out.append(None)
            continue
        if not 1 <= rk <= T.shape[k]:
            raise RankTooLarge(f"mode {k}: rank {rk} outside [1, {T.shape[k]}]")
        Uk, _, _ = truncated_svd(unfold(T, k), rk)
        out.append(Uk)
    return out

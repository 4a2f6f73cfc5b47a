"""Sparse projections, the feature-selecting estimator, and rank/sparsity estimation.

All selections are deterministic: among equal magnitudes the smaller index
wins, which picks one element of the otherwise set-valued projection.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .core import EmbeddingPair, ProxyMatrix, build_proxy, spectrum, truncated_svd
from .data import NONE, SampleSet, normalize as _normalize, unwhiten_embeddings
from .errors import BudgetOutOfRange, RankTooLarge


@dataclass(frozen=True)
class SparsityBudget:
    r: int
    s1: int
    s2: int

    def check(self, n1: int, n2: int) -> None:
        if not 1 <= self.s1 <= n1 or not 1 <= self.s2 <= n2:
            raise BudgetOutOfRange(f"budget (s1={self.s1}, s2={self.s2}) outside [1, n] for n=({n1}, {n2})")
        if self.r < 1 or self.r >= min(n1, n2):
            raise RankTooLarge(f"rank {self.r} must lie in [1, min(n1, n2) - 1]")
        if self.r > self.s1 or self.r > self.s2:
            raise BudgetOutOfRange(f"rank {self.r} exceeds a support budget ({self.s1}, {self.s2})")


@dataclass(frozen=True)
class SparseEmbeddingPair:
    base: EmbeddingPair
    row_support_U: np.ndarray
    row_support_V: np.ndarray


def _largest(values, k):
    return np.sort(np.argsort(-values, kind="stable")[:k])


def _check_budget(s, n, name):
    if not 1 <= s <= n:
        raise BudgetOutOfRange(f"{name}={s} outside [1, {n}]")


def omega1_mask(X, s1):
    X = np.asarray(X, dtype=float)
    _check_budget(s1, X.shape[0], "s1")
    order = np.argsort(-np.abs(X), axis=0, kind="stable")[:s1]
    mask = np.zeros(X.shape, dtype=bool)
    np.put_along_axis(mask, order, True, axis=0)
    return mask


def project_omega1(X, s1: int):
    """Keep the s1 largest-magnitude entries of every column."""
    X = np.asarray(X, dtype=float)
    return np.where(omega1_mask(X, s1), X, 0.0)


def column_support(X, s2):
    X = np.asarray(X, dtype=float)
    _check_budget(s2, X.shape[1], "s2")
    return _largest(np.linalg.norm(X, axis=0), s2)


def row_support(X, s1):
    X = np.asarray(X, dtype=float)
    _check_budget(s1, X.shape[0], "s1")
    return _largest(np.linalg.norm(X, axis=1), s1)


def project_omega2(X, s2: int):
    """Keep the s2 columns of largest Euclidean norm."""
    X = np.asarray(X, dtype=float)
    out = np.zeros_like(X)
    cols = column_support(X, s2)
    out[:, cols] = X[:, cols]
    return out


def project_omega3(X, s1: int):
    """Keep the s1 rows of largest Euclidean norm."""
    X = np.asarray(X, dtype=float)
    out = np.zeros_like(X)
    rows = row_support(X, s1)
    out[rows] = X[rows]
    return out


def fit_sparse_jdr(s: SampleSet, budget: SparsityBudget, normalize: str = NONE) -> SparseEmbeddingPair:
    """Proxy -> column-wise, column and row hard thresholding -> rank-r SVD.

    The default consumes raw features. ``normalize="featurewise"`` (or
    ``"full"``) whitens first, for real data whose scales differ.
    """
    budget.check(s.A.shape[1], s.B.shape[1])
    w = _normalize(s, normalize)
    p = build_proxy(w)
    X1 = project_omega1(p.X0, budget.s1)
    cols = column_support(X1, budget.s2)
    X2 = np.zeros_like(X1)
    X2[:, cols] = X1[:, cols]
    rows = row_support(X2, budget.s1)
    # the SVD runs on the kept block so rows outside the supports stay exactly zero
    Ub, sig, Vb = truncated_svd(X2[np.ix_(rows, cols)], budget.r)
    Uw = np.zeros((p.X0.shape[0], budget.r))
    Vw = np.zeros((p.X0.shape[1], budget.r))
    Uw[rows] = Ub
    Vw[cols] = Vb
    U, V = unwhiten_embeddings(Uw, Vw, w.state)
    base = EmbeddingPair(U, V, sig, Uw, Vw, w.state, p.m_used)
    return SparseEmbeddingPair(base, rows, cols)


def estimate_rank_sparsity(p: ProxyMatrix, eta: float):
    """Threshold singular values and entries of the proxy at eta/2.

    Returns ``(r_hat, s1_hat, s2_hat, support)`` where ``support`` is a sorted
    list of (row, col) index pairs.
    """
    if not eta > 0:
        raise BudgetOutOfRange("eta must be positive")
    half = eta / 2.0
    r_hat = int(np.sum(spectrum(p) > half))
    big = np.abs(p.X0) > half
    support = [tuple(int(i) for i in ij) for ij in np.argwhere(big)]
    return r_hat, int(big.any(axis=1).sum()), int(big.any(axis=0).sum()), support


# exhaustive oracles, only meant for tiny matrices in tests


def _masked_residual(X, mask):
    return float(np.linalg.norm(X - np.where(mask, X, 0.0)))


def oracle_omega1(X, s1):
    """Best column-wise s1-sparse approximation by enumerating every support."""
    X = np.asarray(X, dtype=float)
    n1, n2 = X.shape
    best = None
    for supports in product(combinations(range(n1), s1), repeat=n2):
        mask = np.zeros(X.shape, dtype=bool)
        for k, rows in enumerate(supports):
            mask[list(rows), k] = True
        res = _masked_residual(X, mask)
        if best is None or res < best[0]:
            best = (res, mask)
    return best


def oracle_lines(X, s, axis):
    """Best approximation keeping s columns (axis=1) or s rows (axis=0)."""
    X = np.asarray(X, dtype=float)
    n = X.shape[axis]
    best = None
    for keep in combinations(range(n), s):
        mask = np.zeros(X.shape, dtype=bool)
        if axis == 1:
            mask[:, list(keep)] = True
        else:
            mask[list(keep)] = True
        res = _masked_residual(X, mask)
        if best is None or res < best[0]:
            best = (res, mask)
    return best


def oracle_omega12(X, s1, s2):
    """Best approximation with at most s2 nonzero columns, each s1-sparse."""
    X = np.asarray(X, dtype=float)
    n1, n2 = X.shape
    best = None
    for cols in combinations(range(n2), s2):
        for supports in product(combinations(range(n1), s1), repeat=s2):
            mask = np.zeros(X.shape, dtype=bool)
            for k, rows in zip(cols, supports):
                mask[list(rows), k] = True
            res = _masked_residual(X, mask)
            if best is None or res < best[0]:
                best = (res, mask)
    return best

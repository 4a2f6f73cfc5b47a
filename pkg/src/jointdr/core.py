"""Embedding proxy construction and the exact / randomized JDR estimators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from .data import (
    FEATUREWISE,
    FULL,
    NONE,
    NormalizationState,
    SampleSet,
    WhitenedSampleSet,
    fit_normalization_featurewise,
    normalize as _normalize,
    unwhiten_embeddings,
    validate,
)
from .errors import RankTooLarge, ValidationError

DEFAULT_CHUNK = 65536


@dataclass(frozen=True)
class ProxyMatrix:
    X0: np.ndarray
    m_used: int


@dataclass(frozen=True)
class EmbeddingPair:
    """Estimated embeddings.

    ``whitened_U``/``whitened_V`` live in the normalized feature space and have
    orthonormal columns; ``U``/``V`` are mapped back to raw feature
    coordinates. ``state`` is the normalization used (None when disabled).
    """

    U: np.ndarray
    V: np.ndarray
    sigma: np.ndarray
    whitened_U: np.ndarray
    whitened_V: np.ndarray
    state: Optional[NormalizationState] = None
    m: int = 0
    seed: Optional[int] = None

    @property
    def r(self) -> int:
        return self.sigma.shape[0]

    @property
    def normalize(self) -> str:
        return NONE if self.state is None else self.state.mode


def fix_signs(L, R=None):
    """Flip singular-vector pairs so each column of ``L`` has its largest-magnitude entry positive."""
    L = np.array(L, dtype=float)
    if L.size == 0:
        return L if R is None else (L, np.array(R, dtype=float))
    idx = np.argmax(np.abs(L), axis=0)
    s = np.sign(L[idx, np.arange(L.shape[1])])
    s[s == 0] = 1.0
    L *= s
    if R is None:
        return L
    return L, np.array(R, dtype=float) * s


def truncated_svd(X, r):
    """Top-``r`` singular triplets of ``X`` with the sign convention of :func:`fix_signs`."""
    Uf, s, Vt = linalg.svd(X, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    U, V = fix_signs(Uf[:, :r], Vt[:r].T)
    return U, s[:r].copy(), V


def _weighted_cross(A, y, B, chunk_size):
    # sum_i a_i y_i b_i^T accumulated over fixed-size row chunks in sample order
    out = np.zeros((A.shape[1], B.shape[1]))
    for start in range(0, A.shape[0], chunk_size):
        sl = slice(start, start + chunk_size)
        out += A[sl].T @ (y[sl, None] * B[sl])
    return out


def build_proxy(w: WhitenedSampleSet, chunk_size: int = DEFAULT_CHUNK) -> ProxyMatrix:
    """X0 = (1/m) sum_i a_i' y_i' b_i'^T."""
    m = w.A_prime.shape[0]
    if m < 1:
        raise ValidationError("need at least one sample")
    X0 = _weighted_cross(w.A_prime, w.y_prime, w.B_prime, chunk_size) / m
    return ProxyMatrix(X0, m)


def proxy_from_arrays(A, B, y, chunk_size: int = DEFAULT_CHUNK) -> ProxyMatrix:
    """Proxy on raw arrays, no normalization."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    return build_proxy(WhitenedSampleSet(A, B, y, None), chunk_size)


def spectrum(p: ProxyMatrix) -> np.ndarray:
    return linalg.svd(p.X0, compute_uv=False, check_finite=False)


def _check_rank(r, n1, n2):
    if not 1 <= r <= min(n1, n2):
        raise RankTooLarge(f"rank {r} must lie in [1, min(n1, n2) = {min(n1, n2)}]")


def fit_jdr(
    s: SampleSet,
    r: int,
    normalize: str = FULL,
    jitter_floor: float = 1e-10,
    chunk_size: int = DEFAULT_CHUNK,
) -> EmbeddingPair:
    """Exact joint dimensionality reduction: compact SVD of the full proxy."""
    _check_rank(r, s.A.shape[1], s.B.shape[1])
    w = _normalize(s, normalize, jitter_floor)
    p = build_proxy(w, chunk_size)
    Uw, sig, Vw = truncated_svd(p.X0, r)
    U, V = unwhiten_embeddings(Uw, Vw, w.state)
    return EmbeddingPair(U, V, sig, Uw, Vw, w.state, p.m_used)


def fit_fast_jdr(
    s: SampleSet,
    r: int,
    seed: int = 0,
    normalize: str = FEATUREWISE,
    chunk_size: int = DEFAULT_CHUNK,
) -> EmbeddingPair:
    """Randomized JDR with a Gaussian sketch of width 2r; the proxy is never formed.

    Both sketch products carry the 1/m factor so ``sigma`` is on the same
    scale as the exact path.
    """
    n1, n2 = s.A.shape[1], s.B.shape[1]
    if r < 1 or 2 * r > n2:
        raise RankTooLarge(f"fast path needs 1 <= 2r <= n2; got r={r}, n2={n2}")
    if r > n1:
        raise RankTooLarge(f"rank {r} exceeds n1 = {n1}")
    S = np.random.default_rng(seed).standard_normal((n2, 2 * r))
    if normalize == FULL:
        w = _normalize(s, normalize)
        state, m = w.state, w.m
        Z = _weighted_cross(w.A_prime, w.y_prime, w.B_prime @ S, chunk_size) / m
        Q, _ = linalg.qr(Z, mode="economic", check_finite=False)
        W = _weighted_cross(w.A_prime @ Q, w.y_prime, w.B_prime, chunk_size) / m
    else:
        state, (mu_a, sd_a, mu_b, sd_b, yp) = _affine(s, normalize)
        m = s.m
        # x' = (x - mu) / sd is folded into the thin products, so no whitened copy is formed
        Sb = S / sd_b[:, None]
        BS = s.B @ Sb - mu_b @ Sb
        Z = _centered_cross(s.A, yp, BS, mu_a, chunk_size) / sd_a[:, None] / m
        Q, _ = linalg.qr(Z, mode="economic", check_finite=False)
        Qa = Q / sd_a[:, None]
        AQ = s.A @ Qa - mu_a @ Qa
        W = _centered_cross(s.B, yp, AQ, mu_b, chunk_size).T / sd_b / m
    Ut, sig, Vw = truncated_svd(W, r)
    Uw, Vw = fix_signs(Q @ Ut, Vw)
    U, V = unwhiten_embeddings(Uw, Vw, state)
    return EmbeddingPair(U, V, sig, Uw, Vw, state, m, seed)


def _affine(s, normalize):
    if normalize == FEATUREWISE:
        st = fit_normalization_featurewise(s)
        return st, (st.mu_a, st.sigma_a, st.mu_b, st.sigma_b, st.transform_y(s.y))
    if normalize == NONE:
        validate(s)
        n1, n2 = s.A.shape[1], s.B.shape[1]
        return None, (np.zeros(n1), np.ones(n1), np.zeros(n2), np.ones(n2), s.y)
    raise ValidationError(f"unknown normalization mode {normalize!r}")


def _centered_cross(X, y, T, mu, chunk_size):
    # sum_i (x_i - mu) y_i t_i^T without forming the centered X
    v = y[:, None] * T
    acc = np.zeros((X.shape[1], T.shape[1]))
    for start in range(0, X.shape[0], chunk_size):
        sl = slice(start, start + chunk_size)
        acc += X[sl].T @ v[sl]
    return acc - np.outer(mu, v.sum(axis=0))

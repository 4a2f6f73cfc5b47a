"""Reference dimensionality-reduction methods: PCA, pHd and concatenated pHd."""

import numpy as np
from scipy import linalg

from .core import fix_signs
from .data import SampleSet, validate
from .errors import RankTooLarge, ValidationError


def _prep(X, r):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m, n = X.shape
    if m < 2:
        raise ValidationError("need at least two samples")
    if not 1 <= r <= n:
        raise RankTooLarge(f"rank {r} must lie in [1, {n}]")
    return X


def _top_eigvecs(M, r, key):
    w, E = linalg.eigh((M + M.T) / 2.0, check_finite=False)
    order = np.argsort(-key(w), kind="stable")[:r]
    return fix_signs(E[:, order])


def fit_pca(X, r: int) -> np.ndarray:
    """Top-r eigenvectors of the 1/m sample covariance."""
    X = _prep(X, r)
    Xc = X - X.mean(axis=0)
    return _top_eigvecs(Xc.T @ Xc / X.shape[0], r, key=lambda w: w)


def phd_matrix(X, y) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != X.shape[0]:
        raise ValidationError("X and y differ in length")
    yc = y - y.mean()
    return X.T @ (yc[:, None] * X) / X.shape[0]


def fit_phd(X, y, r: int) -> np.ndarray:
    """Principal Hessian directions: eigenvectors of (1/m) sum (y_i - ybar) x_i x_i^T
    with the r largest |eigenvalues|. ``X`` is expected to be whitened already."""
    X = _prep(X, r)
    return _top_eigvecs(phd_matrix(X, y), r, key=np.abs)


def fit_cphd(s: SampleSet, r: int) -> np.ndarray:
    """pHd on the concatenated features [a; b] with 2r directions."""
    validate(s)
    return fit_phd(np.hstack([s.A, s.B]), s.y, 2 * r)

"""Sample storage, validation, whitening and de-whitening.

Two whitening modes are supported: ``full`` (sample covariance + Cholesky
factor) and ``featurewise`` (per-coordinate standard deviation). Both use the
1/m moment convention. Inverses are never formed; everything goes through
triangular solves or elementwise division.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from .errors import DegenerateData, DimensionMismatch, NonFiniteValue, ValidationError

FULL = "full"
FEATUREWISE = "featurewise"
NONE = "none"
MODES = (FULL, FEATUREWISE, NONE)

SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class SampleSet:
    """Paired features ``A`` (m x n1), ``B`` (m x n2) and responses ``y`` (m,).

    Row i of ``A``, ``B`` and entry i of ``y`` form sample i. Construction
    only coerces to float arrays; call :func:`validate` to check invariants.
    """

    A: np.ndarray
    B: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", np.atleast_2d(np.asarray(self.A, dtype=float)))
        object.__setattr__(self, "B", np.atleast_2d(np.asarray(self.B, dtype=float)))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).reshape(-1))

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n1(self) -> int:
        return self.A.shape[1]

    @property
    def n2(self) -> int:
        return self.B.shape[1]

    def concat(self, other: "SampleSet") -> "SampleSet":
        return SampleSet(
            np.vstack([self.A, other.A]),
            np.vstack([self.B, other.B]),
            np.concatenate([self.y, other.y]),
        )


def _check_finite(name, X):
    bad = ~np.isfinite(X)
    if bad.any():
        raise NonFiniteValue(name, np.argwhere(bad)[0])


def validate(s: SampleSet) -> None:
    """Raise if ``s`` breaks the SampleSet invariants; return None otherwise."""
    if s.A.ndim != 2 or s.B.ndim != 2:
        raise DimensionMismatch("A and B must be 2-D")
    m = s.A.shape[0]
    if m < 1:
        raise DimensionMismatch("need at least one sample")
    if s.B.shape[0] != m or s.y.shape[0] != m:
        raise DimensionMismatch(
            f"row counts differ: A has {m}, B has {s.B.shape[0]}, y has {s.y.shape[0]}"
        )
    _check_finite("A", s.A)
    _check_finite("B", s.B)
    _check_finite("y", s.y)


@dataclass(frozen=True)
class NormalizationState:
    """Statistics needed to whiten features and to map embeddings back.

    In ``full`` mode ``C_a``/``C_b`` are lower Cholesky factors of the
    (possibly jittered) covariances; in ``featurewise`` mode ``sigma_a``/
    ``sigma_b`` hold per-feature standard deviations, with ``const_a``/
    ``const_b`` flagging columns whose deviation was replaced by 1.
    """

    mode: str
    mu_a: np.ndarray
    mu_b: np.ndarray
    mu_y: float
    C_a: Optional[np.ndarray] = None
    C_b: Optional[np.ndarray] = None
    sigma_a: Optional[np.ndarray] = None
    sigma_b: Optional[np.ndarray] = None
    jitter_a: float = 0.0
    jitter_b: float = 0.0
    const_a: Optional[np.ndarray] = field(default=None, repr=False)
    const_b: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def jitter(self) -> float:
        return max(self.jitter_a, self.jitter_b)

    @property
    def n1(self) -> int:
        return self.mu_a.shape[0]

    @property
    def n2(self) -> int:
        return self.mu_b.shape[0]

    def _transform(self, X, mu, C, sigma, name):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != mu.shape[0]:
            raise DimensionMismatch(
                f"{name} has {X.shape[1]} columns, normalization expects {mu.shape[0]}"
            )
        Xc = X - mu
        if self.mode == FULL:
            return linalg.solve_triangular(C, Xc.T, lower=True, check_finite=False).T
        return Xc / sigma

    def transform_a(self, A):
        return self._transform(A, self.mu_a, self.C_a, self.sigma_a, "A")

    def transform_b(self, B):
        return self._transform(B, self.mu_b, self.C_b, self.sigma_b, "B")

    def transform_y(self, y):
        return np.asarray(y, dtype=float).reshape(-1) - self.mu_y


@dataclass(frozen=True)
class WhitenedSampleSet:
    A_prime: np.ndarray
    B_prime: np.ndarray
    y_prime: np.ndarray
    state: Optional[NormalizationState]

    @property
    def m(self) -> int:
        return self.A_prime.shape[0]


def _cholesky_with_jitter(S, jitter_floor):
    n = S.shape[0]
    try:
        return linalg.cholesky(S, lower=True, check_finite=False), 0.0
    except linalg.LinAlgError:
        pass
    tr = float(np.trace(S))
    if not tr > 0:
        raise DegenerateData("covariance has zero trace; the features carry no variance")
    lam = jitter_floor * tr / n
    eye = np.eye(n)
    while lam <= tr:
        try:
            return linalg.cholesky(S + lam * eye, lower=True, check_finite=False), lam
        except linalg.LinAlgError:
            lam *= 2.0
    raise DegenerateData(f"Cholesky failed even with jitter {lam:g} > trace {tr:g}")


def _mean(X):
    # corrected two-pass mean: a constant column centers to exactly zero
    mu = X.mean(axis=0)
    return mu + (X - mu).mean(axis=0)


def _need_two(s):
    validate(s)
    if s.m < 2:
        raise ValidationError("normalization needs at least two samples")


def fit_normalization_full(s: SampleSet, jitter_floor: float = 1e-10) -> NormalizationState:
    _need_two(s)
    mu_a = _mean(s.A)
    mu_b = _mean(s.B)
    Ac = s.A - mu_a
    Bc = s.B - mu_b
    C_a, jit_a = _cholesky_with_jitter(Ac.T @ Ac / s.m, jitter_floor)
    C_b, jit_b = _cholesky_with_jitter(Bc.T @ Bc / s.m, jitter_floor)
    return NormalizationState(
        mode=FULL,
        mu_a=mu_a,
        mu_b=mu_b,
        mu_y=float(s.y.mean()),
        C_a=C_a,
        C_b=C_b,
        jitter_a=jit_a,
        jitter_b=jit_b,
    )


def fit_normalization_featurewise(s: SampleSet) -> NormalizationState:
    _need_two(s)
    mu_a = _mean(s.A)
    mu_b = _mean(s.B)
    sd_a = np.sqrt(((s.A - mu_a) ** 2).mean(axis=0))
    sd_b = np.sqrt(((s.B - mu_b) ** 2).mean(axis=0))
    const_a = sd_a < SIGMA_FLOOR
    const_b = sd_b < SIGMA_FLOOR
    sd_a[const_a] = 1.0
    sd_b[const_b] = 1.0
    return NormalizationState(
        mode=FEATUREWISE,
        mu_a=mu_a,
        mu_b=mu_b,
        mu_y=float(s.y.mean()),
        sigma_a=sd_a,
        sigma_b=sd_b,
        const_a=const_a,
        const_b=const_b,
    )


def _whiten(s, state):
    validate(s)
    return WhitenedSampleSet(
        state.transform_a(s.A), state.transform_b(s.B), state.transform_y(s.y), state
    )


def whiten_full(s: SampleSet, state: NormalizationState) -> WhitenedSampleSet:
    if state.mode != FULL:
        raise ValidationError(f"expected a full normalization state, got {state.mode!r}")
    return _whiten(s, state)


def whiten_featurewise(s: SampleSet, state: NormalizationState) -> WhitenedSampleSet:
    if state.mode != FEATUREWISE:
        raise ValidationError(f"expected a featurewise normalization state, got {state.mode!r}")
    return _whiten(s, state)


def normalize(s: SampleSet, mode: str = FULL, jitter_floor: float = 1e-10) -> WhitenedSampleSet:
    """Fit and apply normalization in one step.

    ``mode="none"`` passes the raw data through unchanged (responses are not
    centered either) and leaves ``state`` as None.
    """
    if mode == FULL:
        return whiten_full(s, fit_normalization_full(s, jitter_floor))
    if mode == FEATUREWISE:
        return whiten_featurewise(s, fit_normalization_featurewise(s))
    if mode == NONE:
        validate(s)
        return WhitenedSampleSet(s.A, s.B, s.y, None)
    raise ValidationError(f"unknown normalization mode {mode!r}; expected one of {MODES}")


def unwhiten_embeddings(U_prime, V_prime, state: Optional[NormalizationState]):
    """Map whitened-space embeddings back to the original feature coordinates."""
    U_prime = np.atleast_2d(np.asarray(U_prime, dtype=float))
    V_prime = np.atleast_2d(np.asarray(V_prime, dtype=float))
    if state is None:
        return U_prime.copy(), V_prime.copy()
    if U_prime.shape[0] != state.n1 or V_prime.shape[0] != state.n2:
        raise DimensionMismatch(
            f"embeddings have {U_prime.shape[0]}/{V_prime.shape[0]} rows, "
            f"normalization expects {state.n1}/{state.n2}"
        )
    if state.mode == FULL:
        U = linalg.solve_triangular(state.C_a, U_prime, lower=True, trans="T", check_finite=False)
        V = linalg.solve_triangular(state.C_b, V_prime, lower=True, trans="T", check_finite=False)
        return U, V
    return U_prime / state.sigma_a[:, None], V_prime / state.sigma_b[:, None]

"""Synthetic data for the scaling, robustness and pathology experiments."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from .data import SampleSet
from .errors import ValidationError

MODELS = ("bilinear", "rbf", "even")
DISTS = ("gaussian", "uniform", "poisson", "corr")
POISSON_LAM = 4.0


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator configuration.

    ``model`` picks the link: ``bilinear`` (a'UV'b plus N(0, noise_sd^2)),
    ``rbf`` (Bernoulli with mean exp(-||U'a - V'b||^2)) or ``even``
    (sum_j (U'a)_j^2 (V'b)_j^2 plus noise, a link even in both arguments).
    ``sparsity=(s1, s2)`` plants row-sparse U and V.
    """

    model: str = "bilinear"
    n1: int = 50
    n2: int = 50
    r: int = 5
    m: int = 1000
    feature_dist: str = "gaussian"
    rho: float = 0.2
    sparsity: Optional[Tuple[int, int]] = None
    seed: int = 0
    noise_sd: float = 1.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValidationError(f"unknown model {self.model!r}")
        if self.feature_dist not in DISTS:
            raise ValidationError(f"unknown feature distribution {self.feature_dist!r}")
        if not 1 <= self.r <= min(self.n1, self.n2):
            raise ValidationError(f"r={self.r} must lie in [1, min(n1, n2)]")
        if self.m < 1:
            raise ValidationError("m must be positive")
        if not 0.0 <= self.rho < 1.0:
            raise ValidationError("rho must lie in [0, 1)")
        if self.sparsity is not None:
            s1, s2 = self.sparsity
            if not (self.r <= s1 <= self.n1 and self.r <= s2 <= self.n2):
                raise ValidationError(f"sparsity {self.sparsity} incompatible with r and n")

    def with_(self, **kw) -> "SyntheticSpec":
        return replace(self, **kw)


@dataclass(frozen=True)
class GroundTruth:
    U: np.ndarray
    V: np.ndarray
    support_U: Optional[np.ndarray] = None
    support_V: Optional[np.ndarray] = None


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic child seed for (seed, keys); distinct keys give independent streams."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _orthonormal(rng, n, r, support=None):
    rows = n if support is None else len(support)
    Q, _ = linalg.qr(rng.standard_normal((rows, r)), mode="economic")
    if support is None:
        return Q
    out = np.zeros((n, r))
    out[support] = Q
    return out


def make_ground_truth(spec: SyntheticSpec) -> GroundTruth:
    rng = np.random.default_rng([spec.seed, 0])
    if spec.sparsity is None:
        return GroundTruth(_orthonormal(rng, spec.n1, spec.r), _orthonormal(rng, spec.n2, spec.r))
    s1, s2 = spec.sparsity
    sup_u = np.sort(rng.choice(spec.n1, size=s1, replace=False))
    sup_v = np.sort(rng.choice(spec.n2, size=s2, replace=False))
    return GroundTruth(
        _orthonormal(rng, spec.n1, spec.r, sup_u),
        _orthonormal(rng, spec.n2, spec.r, sup_v),
        sup_u,
        sup_v,
    )


def _features(rng, spec):
    m, n1, n2 = spec.m, spec.n1, spec.n2
    dist = spec.feature_dist
    if dist in ("gaussian", "corr"):
        A = rng.standard_normal((m, n1))
        B = rng.standard_normal((m, n2))
        if dist == "corr":
            k = min(n1, n2)
            B[:, :k] = spec.rho * A[:, :k] + np.sqrt(1.0 - spec.rho**2) * B[:, :k]
        return A, B
    if dist == "uniform":
        h = np.sqrt(3.0)
        return rng.uniform(-h, h, (m, n1)), rng.uniform(-h, h, (m, n2))
    lam = POISSON_LAM
    A = (rng.poisson(lam, (m, n1)) - lam) / np.sqrt(lam)
    B = (rng.poisson(lam, (m, n2)) - lam) / np.sqrt(lam)
    return A, B


def generate(spec: SyntheticSpec, truth: GroundTruth) -> SampleSet:
    rng = np.random.default_rng([spec.seed, 1])
    A, B = _features(rng, spec)
    abar = A @ truth.U
    bbar = B @ truth.V
    if spec.model == "rbf":
        mu = np.exp(-np.sum((abar - bbar) ** 2, axis=1))
        assert np.all((mu > 0) & (mu <= 1)), "Bernoulli mean outside (0, 1]"
        y = (rng.random(spec.m) < mu).astype(float)
    else:
        if spec.model == "bilinear":
            f = np.sum(abar * bbar, axis=1)
        else:
            f = np.sum(abar**2 * bbar**2, axis=1)
        y = f + spec.noise_sd * rng.standard_normal(spec.m)
    return SampleSet(A, B, y)


def make_dataset(spec: SyntheticSpec):
    truth = make_ground_truth(spec)
    return truth, generate(spec, truth)

"""Monte-Carlo harnesses: scaling sweeps, robustness, pathological links and
the synthetic dyadic retrieval benchmark."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from .baselines import fit_cphd, fit_pca, fit_phd
from .core import fit_fast_jdr, fit_jdr
from .data import FEATUREWISE, NONE, SampleSet
from .errors import ValidationError
from .metrics import SlopeFit, fit_loglog_slope, nsee, recall_at_k, subspace_distance
from .predictor import embed_scaled, expand_dyadic, median_heuristic_bandwidth, MIN_WEIGHT
from .sparse import SparsityBudget, fit_sparse_jdr
from .synth import GroundTruth, SyntheticSpec, derive_seed, make_dataset

SWEEPS = ("m", "n", "s")
ESTIMATORS = ("jdr", "fast", "sparse", "phd", "cphd", "pca")


@dataclass(frozen=True)
class ExperimentPlan:
    sweep: str
    grid: Tuple[int, ...]
    base: SyntheticSpec = field(default_factory=SyntheticSpec)
    trials: int = 20
    seed: int = 0
    estimator: str = "jdr"
    normalize: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(int(g) for g in self.grid))
        if self.sweep not in SWEEPS:
            raise ValidationError(f"unknown sweep variable {self.sweep!r}")
        if self.estimator not in ESTIMATORS:
            raise ValidationError(f"unknown estimator {self.estimator!r}")
        if len(self.grid) < 2 or any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValidationError("grid must be strictly increasing with at least two values")
        if self.trials < 1:
            raise ValidationError("trials must be at least 1")

    def spec_for(self, value: int, grid_index: int, trial: int) -> SyntheticSpec:
        seed = derive_seed(self.seed, grid_index, trial)
        if self.sweep == "m":
            return self.base.with_(m=value, seed=seed)
        if self.sweep == "n":
            return self.base.with_(n1=value, n2=value, seed=seed)
        return self.base.with_(sparsity=(value, value), seed=seed)


@dataclass
class ExperimentResult:
    plan: ExperimentPlan
    rows: List[Tuple[int, int, float]]
    means: List[float]
    fit: SlopeFit


def estimate_nsee(estimator: str, s: SampleSet, truth: GroundTruth, spec: SyntheticSpec,
                  normalize: Optional[str] = None) -> float:
    """Fit one estimator on ``s`` and score it against ``truth``."""
    r = spec.r
    if estimator == "jdr":
        e = fit_jdr(s, r, normalize=normalize or NONE)
        return nsee(truth.U, e.U, truth.V, e.V)
    if estimator == "fast":
        e = fit_fast_jdr(s, r, seed=spec.seed, normalize=normalize or FEATUREWISE)
        return nsee(truth.U, e.U, truth.V, e.V)
    if estimator == "sparse":
        s1, s2 = spec.sparsity if spec.sparsity is not None else (spec.n1, spec.n2)
        e = fit_sparse_jdr(s, SparsityBudget(r, s1, s2), normalize=normalize or NONE).base
        return nsee(truth.U, e.U, truth.V, e.V)
    if estimator == "phd":
        return nsee(truth.U, fit_phd(s.A, s.y, r), truth.V, fit_phd(s.B, s.y, r))
    if estimator == "pca":
        return nsee(truth.U, fit_pca(s.A, r), truth.V, fit_pca(s.B, r))
    if estimator == "cphd":
        W_true = np.zeros((spec.n1 + spec.n2, 2 * r))
        W_true[: spec.n1, :r] = truth.U
        W_true[spec.n1 :, r:] = truth.V
        return subspace_distance(W_true, fit_cphd(s, r)) / np.sqrt(2 * r)
    raise ValidationError(f"unknown estimator {estimator!r}")


def run_experiment(plan: ExperimentPlan) -> ExperimentResult:
    rows = []
    means = []
    for gi, value in enumerate(plan.grid):
        vals = []
        for t in range(plan.trials):
            spec = plan.spec_for(value, gi, t)
            truth, s = make_dataset(spec)
            e = estimate_nsee(plan.estimator, s, truth, spec, plan.normalize)
            rows.append((value, t, e))
            vals.append(e)
        means.append(float(np.mean(vals)))
    return ExperimentResult(plan, rows, means, fit_loglog_slope(plan.grid, means))


def write_experiment_csv(path, result: ExperimentResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["parameter", "trial", "nsee"])
        for value, t, e in result.rows:
            w.writerow([value, t, repr(float(e))])
        for value, mean in zip(result.plan.grid, result.means):
            w.writerow([value, "mean", repr(mean)])
        w.writerow(["slope", "", repr(result.fit.slope)])


def plan_metadata(plan: ExperimentPlan) -> Dict:
    d = asdict(plan)
    d["grid"] = list(plan.grid)
    return d


# --- robustness -------------------------------------------------------------


def run_robustness(plan: ExperimentPlan, variants: Sequence[str] = ("uniform", "poisson", "corr")):
    """The same sweep under Gaussian features and each violated assumption.

    Returns ``{dist: ExperimentResult}`` with ``"gaussian"`` as the reference.
    """
    out = {}
    for dist in ("gaussian",) + tuple(variants):
        p = ExperimentPlan(plan.sweep, plan.grid, plan.base.with_(feature_dist=dist), plan.trials,
                           plan.seed, plan.estimator, plan.normalize)
        out[dist] = run_experiment(p)
    return out


# --- pathological links -----------------------------------------------------


@dataclass(frozen=True)
class PathologyConfig:
    grid: Tuple[int, ...] = (1000, 2000, 5000, 10000)
    n: int = 10
    r: int = 2
    trials: int = 20
    seed: int = 0


def run_pathology(cfg: PathologyConfig = PathologyConfig()):
    """JDR and pHd on an odd link (bilinear) and an even link (sum of squares products).

    Returns a list of ``(method, link, m, mean_nsee)`` rows.
    """
    rows = []
    for link, model in (("odd", "bilinear"), ("even", "even")):
        base = SyntheticSpec(model=model, n1=cfg.n, n2=cfg.n, r=cfg.r)
        for method in ("jdr", "phd"):
            plan = ExperimentPlan("m", cfg.grid, base, cfg.trials, cfg.seed, method, NONE)
            res = run_experiment(plan)
            for m, mean in zip(cfg.grid, res.means):
                rows.append((method, link, m, mean))
    return rows


def final_nsee(rows) -> Dict[Tuple[str, str], float]:
    last = {}
    for method, link, m, v in rows:
        if (method, link) not in last or m > last[(method, link)][0]:
            last[(method, link)] = (m, v)
    return {k: v for k, (_, v) in last.items()}


# --- dyadic benchmark -------------------------------------------------------


@dataclass(frozen=True)
class DyadicConfig:
    m_D: int = 300
    m_G: int = 300
    n: int = 40
    r: int = 5
    partitions: int = 5
    test_fraction: float = 0.1
    k: int = 10
    positive_fraction: float = 0.05
    noise_sd: float = 0.5
    methods: Tuple[str, ...] = ("jdr", "pca", "random")
    bandwidth_scales: Tuple[float, ...] = (0.125, 0.25, 0.5, 1.0)
    seed: int = 0


@dataclass(frozen=True)
class DyadicData:
    A: np.ndarray
    B: np.ndarray
    scores: np.ndarray
    U: np.ndarray
    V: np.ndarray


def make_dyadic(cfg: DyadicConfig) -> DyadicData:
    """Entity features with bilinear latent affinities; only the top
    ``positive_fraction`` of affinities become nonzero scores (shifted to start at 0)."""
    rng = np.random.default_rng([cfg.seed, 2])
    A = rng.standard_normal((cfg.m_D, cfg.n))
    B = rng.standard_normal((cfg.m_G, cfg.n))
    U, _ = np.linalg.qr(rng.standard_normal((cfg.n, cfg.r)))
    V, _ = np.linalg.qr(rng.standard_normal((cfg.n, cfg.r)))
    mu = (A @ U) @ (B @ V).T + cfg.noise_sd * rng.standard_normal((cfg.m_D, cfg.m_G))
    tau = np.quantile(mu, 1.0 - cfg.positive_fraction)
    return DyadicData(A, B, np.maximum(mu - tau, 0.0), U, V)


def predict_grid(A_emb, B_emb, train_rows, Y_train, query_rows, h_D, h_G) -> np.ndarray:
    """Nadaraya-Watson scores for every (query row, column) when all columns of
    the training rows are observed; the product kernel then factorizes."""
    kd = np.exp(-cdist(A_emb[query_rows], A_emb[train_rows], "sqeuclidean") / (2 * h_D**2))
    kg = np.exp(-cdist(B_emb, B_emb, "sqeuclidean") / (2 * h_G**2))
    num = kd @ Y_train @ kg.T
    den = np.outer(kd.sum(axis=1), kg.sum(axis=1))
    ok = den >= MIN_WEIGHT
    return np.where(ok, num / np.where(ok, den, 1.0), Y_train.mean())


def _mean_recall(pred, scores, query_rows, k):
    vals = []
    for row, qi in zip(pred, query_rows):
        pos = np.flatnonzero(scores[qi] > 0)
        if pos.size:
            vals.append(recall_at_k(row, pos, k))
    return float(np.mean(vals)) if vals else float("nan")


def _nanmean(vals):
    vals = [v for v in vals if not np.isnan(v)]
    return float(np.mean(vals)) if vals else float("nan")


def _embed(method, data, train_rows, cfg):
    if method == "jdr":
        obs = np.array([(i, j, data.scores[i, j]) for i in train_rows for j in range(cfg.m_G)])
        emb = fit_jdr(expand_dyadic(data.A, data.B, obs), cfg.r, normalize="full")
        return embed_scaled(emb, data.A, "a"), embed_scaled(emb, data.B, "b")
    if method == "pca":
        A_tr = data.A[train_rows]
        Wa = fit_pca(A_tr, cfg.r)
        Wb = fit_pca(data.B, cfg.r)
        return (data.A - A_tr.mean(axis=0)) @ Wa, (data.B - data.B.mean(axis=0)) @ Wb
    if method == "phd":
        obs_i = np.repeat(train_rows, cfg.m_G)
        obs_j = np.tile(np.arange(cfg.m_G), train_rows.size)
        y = data.scores[obs_i, obs_j]
        s = expand_dyadic(data.A, data.B, np.column_stack([obs_i, obs_j, y]))
        mu_a, sd_a = s.A.mean(axis=0), s.A.std(axis=0)
        mu_b, sd_b = s.B.mean(axis=0), s.B.std(axis=0)
        Wa = fit_phd((s.A - mu_a) / sd_a, y, cfg.r)
        Wb = fit_phd((s.B - mu_b) / sd_b, y, cfg.r)
        return ((data.A - mu_a) / sd_a) @ Wa, ((data.B - mu_b) / sd_b) @ Wb
    raise ValidationError(f"unknown dyadic method {method!r}")


TUNING_PARTITION = 2**31


def _partition(cfg, p):
    rng = np.random.default_rng([cfg.seed, 3, p])
    perm = rng.permutation(cfg.m_D)
    n_test = max(1, int(round(cfg.test_fraction * cfg.m_D)))
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def _kr_recall(method, data, cfg, train, test, scale, k):
    Ae, Be = _embed(method, data, train, cfg)
    hD = scale * median_heuristic_bandwidth(Ae, cfg.seed)
    hG = scale * median_heuristic_bandwidth(Be, cfg.seed)
    pred = predict_grid(Ae, Be, train, data.scores[train], test, hD, hG)
    return _mean_recall(pred, data.scores, test, k)


def run_dyadic_benchmark(cfg: DyadicConfig = DyadicConfig(), ks: Optional[Sequence[int]] = None):
    """Disease-wise train/test splits on synthetic dyadic data.

    A separate tuning partition picks each method's bandwidth scale and
    partitions 0..P-1 are scored. Returns ``{"recall": {method: {k: mean
    recall}}, "per_partition": [(method, partition, k, recall)],
    "bandwidth_scale": {method: scale}}``.
    """
    ks = tuple(ks) if ks is not None else (cfg.k,)
    data = make_dyadic(cfg)
    chosen = {}
    tr, te = _partition(cfg, TUNING_PARTITION)
    for method in cfg.methods:
        if method == "random":
            continue
        score = lambda sc: np.nan_to_num(_kr_recall(method, data, cfg, tr, te, sc, cfg.k), nan=-1.0)
        best = max(cfg.bandwidth_scales, key=score)
        chosen[method] = best
    per = []
    for p in range(cfg.partitions):
        train, test = _partition(cfg, p)
        for method in cfg.methods:
            if method == "random":
                rng = np.random.default_rng([cfg.seed, 4, p])
                pred = rng.random((test.size, cfg.m_G))
            else:
                Ae, Be = _embed(method, data, train, cfg)
                sc = chosen[method]
                hD = sc * median_heuristic_bandwidth(Ae, cfg.seed)
                hG = sc * median_heuristic_bandwidth(Be, cfg.seed)
                pred = predict_grid(Ae, Be, train, data.scores[train], test, hD, hG)
            for k in ks:
                per.append((method, p, k, _mean_recall(pred, data.scores, test, k)))
    # partitions whose test entities have no positives at all are skipped
    recall = {
        method: {k: _nanmean([v for mm, _, kk, v in per if mm == method and kk == k]) for k in ks}
        for method in cfg.methods
    }
    return {"recall": recall, "per_partition": per, "bandwidth_scale": chosen}

"""Supervised joint dimensionality reduction for paired feature vectors."""

__version__ = "0.1.0"

from .baselines import fit_cphd, fit_pca, fit_phd
from .core import EmbeddingPair, ProxyMatrix, build_proxy, fit_fast_jdr, fit_jdr, proxy_from_arrays
from .data import SampleSet, normalize, validate
from .errors import JDRError, NumericalError, ValidationError
from .metrics import fit_loglog_slope, nsee, recall_at_k, subspace_distance
from .predictor import embed_scaled, make_predictor, predict, predict_all
from .sparse import SparsityBudget, estimate_rank_sparsity, fit_sparse_jdr
from .synth import SyntheticSpec, generate, make_dataset, make_ground_truth
from .tensor import build_proxy3, build_proxy_multiresponse, hosvd_factors

__all__ = [
    "EmbeddingPair", "JDRError", "NumericalError", "ProxyMatrix", "SampleSet", "SparsityBudget",
    "SyntheticSpec", "ValidationError", "build_proxy", "build_proxy3", "build_proxy_multiresponse",
    "embed_scaled", "estimate_rank_sparsity", "fit_cphd", "fit_fast_jdr", "fit_jdr", "fit_loglog_slope",
    "fit_pca", "fit_phd", "fit_sparse_jdr", "generate", "hosvd_factors", "make_dataset",
    "make_ground_truth", "make_predictor", "normalize", "nsee", "predict", "predict_all",
    "proxy_from_arrays", "recall_at_k", "subspace_distance", "validate",
]

"""Command-line entry point: ``jointdr <subcommand> ...``.

Exit status is 0 on success, 2 for invalid input and 3 for numerical
failure; failures also print one JSON line to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from . import io as jio
from .baselines import fit_cphd, fit_pca, fit_phd
from .core import fit_fast_jdr, fit_jdr
from .data import FEATUREWISE, FULL, NONE, SampleSet, normalize, unwhiten_embeddings
from .errors import NumericalError, ValidationError
from .experiments import (
    DyadicConfig,
    ExperimentPlan,
    PathologyConfig,
    final_nsee,
    plan_metadata,
    run_dyadic_benchmark,
    run_experiment,
    run_pathology,
    write_experiment_csv,
)
from .predictor import expand_dyadic, fill_zeros, make_predictor, predict_all
from .sparse import SparsityBudget, fit_sparse_jdr
from .synth import DISTS, MODELS, SyntheticSpec, make_dataset

NORMALIZE_DEFAULT = {"jdr": FULL, "fast": FEATUREWISE, "sparse": NONE, "phd": FEATUREWISE}


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


# --- subcommands ------------------------------------------------------------


def cmd_synth(args):
    spec = SyntheticSpec(
        model=args.model, n1=args.n1, n2=args.n2, r=args.rank, m=args.m, feature_dist=args.dist,
        rho=args.rho, sparsity=tuple(args.sparsity) if args.sparsity else None, seed=args.seed,
        noise_sd=args.noise_sd,
    )
    truth, s = make_dataset(spec)
    os.makedirs(args.out, exist_ok=True)
    for name, X in (("A", s.A), ("B", s.B), ("y", s.y), ("U", truth.U), ("V", truth.V)):
        jio.write_matrix(os.path.join(args.out, f"{name}.csv"), X)
    meta = dict(asdict(spec), sparsity=list(spec.sparsity) if spec.sparsity else None, version=__version__)
    jio.write_json(os.path.join(args.out, "meta.json"), meta)


def _load_training(args) -> SampleSet:
    if args.observed:
        if not (args.entities_a and args.entities_b):
            raise ValidationError("--observed needs --entities-a and --entities-b")
        A_ent = jio.read_matrix(args.entities_a, args.header)
        B_ent = jio.read_matrix(args.entities_b, args.header)
        obs = jio.read_matrix(args.observed, args.header)
        if args.fill_zeros:
            obs = fill_zeros(obs, B_ent.shape[0])
        return expand_dyadic(A_ent, B_ent, obs)
    if not (args.a and args.b and args.y):
        raise ValidationError("give --a, --b and --y, or --entities-a, --entities-b and --observed")
    return jio.read_samples(args.a, args.b, args.y, args.header)


def cmd_fit(args):
    s = _load_training(args)
    algo = args.algo
    mode = args.normalize or NORMALIZE_DEFAULT.get(algo, NONE)
    extra = {"algo": algo, "chunk_size": args.chunk_size}
    if algo == "jdr":
        jio.save_embedding(args.out, fit_jdr(s, args.rank, normalize=mode, chunk_size=args.chunk_size), extra)
    elif algo == "fast":
        emb = fit_fast_jdr(s, args.rank, seed=args.seed, normalize=mode, chunk_size=args.chunk_size)
        jio.save_embedding(args.out, emb, extra)
    elif algo == "sparse":
        if args.s1 is None or args.s2 is None:
            raise ValidationError("--algo sparse needs --s1 and --s2")
        sp = fit_sparse_jdr(s, SparsityBudget(args.rank, args.s1, args.s2), normalize=mode)
        jio.save_embedding(args.out, sp.base, dict(extra, s1=args.s1, s2=args.s2))
        jio.write_ints(os.path.join(args.out, "support_U.csv"), sp.row_support_U)
        jio.write_ints(os.path.join(args.out, "support_V.csv"), sp.row_support_V)
    elif algo == "pca":
        meta = dict(extra, r=args.rank, m=s.m, normalize=NONE, seed=args.seed,
                    mu_a=s.A.mean(axis=0).tolist(), mu_b=s.B.mean(axis=0).tolist())
        jio.save_factors(args.out, {"U": fit_pca(s.A, args.rank), "V": fit_pca(s.B, args.rank)}, meta)
    elif algo == "phd":
        w = normalize(s, mode)
        Wa = fit_phd(w.A_prime, w.y_prime, args.rank)
        Wb = fit_phd(w.B_prime, w.y_prime, args.rank)
        U, V = unwhiten_embeddings(Wa, Wb, w.state)
        mu_a = w.state.mu_a.tolist() if w.state is not None else None
        mu_b = w.state.mu_b.tolist() if w.state is not None else None
        meta = dict(extra, r=args.rank, m=s.m, normalize=mode, seed=args.seed, mu_a=mu_a, mu_b=mu_b)
        jio.save_factors(args.out, {"U": U, "V": V}, meta)
    elif algo == "cphd":
        meta = dict(extra, r=args.rank, m=s.m, normalize=NONE, seed=args.seed, n1=s.n1, n2=s.n2)
        jio.save_factors(args.out, {"W": fit_cphd(s, args.rank)}, meta)


def cmd_predict(args):
    meta = jio.load_embedding_meta(args.emb)
    if meta.get("algo") == "cphd":
        raise ValidationError("concatenated embeddings do not factor into entity embeddings")
    U, V, mu_a, mu_b, scale = jio.load_projection(args.emb)
    A_ent = jio.read_matrix(args.entities_a, args.header)
    B_ent = jio.read_matrix(args.entities_b, args.header)
    if A_ent.shape[1] != U.shape[0] or B_ent.shape[1] != V.shape[0]:
        raise ValidationError("entity feature widths do not match the embedding")
    obs = jio.read_matrix(args.observed, args.header)
    if args.fill_zeros:
        obs = fill_zeros(obs, B_ent.shape[0])
    queries = jio.read_matrix(args.queries, args.header).astype(np.int64)
    kp = make_predictor(((A_ent - mu_a) @ U) * scale, ((B_ent - mu_b) @ V) * scale, obs,
                        h_D=args.hd, h_G=args.hg, seed=args.seed)
    yhat = predict_all(kp, queries)
    _write_rows(args.out, ["i", "j", "yhat"], [(int(i), int(j), float(v)) for (i, j), v in zip(queries, yhat)])


def cmd_experiment(args):
    base = SyntheticSpec(
        model=args.model, n1=args.n, n2=args.n, r=args.rank, m=args.m, feature_dist=args.dist, rho=args.rho,
        sparsity=(args.s, args.s) if args.s else None, noise_sd=args.noise_sd,
    )
    plan = ExperimentPlan(args.sweep, tuple(args.grid), base, args.trials, args.seed, args.estimator,
                          args.normalize)
    res = run_experiment(plan)
    os.makedirs(args.out, exist_ok=True)
    write_experiment_csv(os.path.join(args.out, "results.csv"), res)
    meta = {"plan": plan_metadata(plan), "slope": res.fit.slope, "intercept": res.fit.intercept,
            "means": res.means, "version": __version__}
    jio.write_json(os.path.join(args.out, "meta.json"), meta)
    print(json.dumps({"slope": res.fit.slope, "means": res.means}))


def cmd_pathology(args):
    cfg = PathologyConfig(tuple(args.grid), args.n, args.rank, args.trials, args.seed)
    rows = run_pathology(cfg)
    os.makedirs(args.out, exist_ok=True)
    _write_rows(os.path.join(args.out, "pathology.csv"), ["method", "link", "m", "mean_nsee"], rows)
    final = {f"{k[0]}/{k[1]}": v for k, v in sorted(final_nsee(rows).items())}
    jio.write_json(os.path.join(args.out, "meta.json"),
                   {"config": dict(asdict(cfg), grid=list(cfg.grid)), "final_nsee": final, "version": __version__})
    print(json.dumps(final))


def cmd_dyadic(args):
    cfg = DyadicConfig(m_D=args.m_d, m_G=args.m_g, n=args.n, r=args.rank, partitions=args.partitions,
                       k=args.k[0], methods=tuple(args.methods.split(",")), seed=args.seed)
    res = run_dyadic_benchmark(cfg, ks=args.k)
    os.makedirs(args.out, exist_ok=True)
    table = [(m, k, v) for m, byk in res["recall"].items() for k, v in byk.items()]
    _write_rows(os.path.join(args.out, "recall.csv"), ["method", "k", "recall"], table)
    _write_rows(os.path.join(args.out, "per_partition.csv"), ["method", "partition", "k", "recall"],
                res["per_partition"])
    cfg_d = dict(asdict(cfg), methods=list(cfg.methods), bandwidth_scales=list(cfg.bandwidth_scales))
    jio.write_json(os.path.join(args.out, "meta.json"),
                   {"config": cfg_d, "ks": list(args.k), "bandwidth_scale": res["bandwidth_scale"],
                    "version": __version__})
    print(json.dumps(res["recall"]))


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jointdr", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("synth", help="generate a synthetic data set with its ground truth")
    q.add_argument("--out", required=True)
    q.add_argument("--model", choices=MODELS, default="bilinear")
    q.add_argument("--dist", choices=DISTS, default="gaussian")
    q.add_argument("--n1", type=int, default=50)
    q.add_argument("--n2", type=int, default=50)
    q.add_argument("--rank", type=int, default=5)
    q.add_argument("--m", type=int, default=1000)
    q.add_argument("--rho", type=float, default=0.2)
    q.add_argument("--sparsity", type=int, nargs=2, metavar=("S1", "S2"))
    q.add_argument("--noise-sd", type=float, default=1.0)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_synth)

    q = sub.add_parser("fit", help="estimate embeddings from samples")
    q.add_argument("--out", required=True)
    q.add_argument("--a")
    q.add_argument("--b")
    q.add_argument("--y")
    q.add_argument("--entities-a")
    q.add_argument("--entities-b")
    q.add_argument("--observed", help="CSV of (i, j, y) triples")
    q.add_argument("--fill-zeros", action="store_true")
    q.add_argument("--header", action="store_true", help="input CSVs start with a header row")
    q.add_argument("--algo", choices=("jdr", "fast", "sparse", "pca", "phd", "cphd"), default="jdr")
    q.add_argument("--rank", type=int, required=True)
    q.add_argument("--s1", type=int)
    q.add_argument("--s2", type=int)
    q.add_argument("--normalize", choices=(FULL, FEATUREWISE, NONE))
    q.add_argument("--chunk-size", type=int, default=65536)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_fit)

    q = sub.add_parser("predict", help="kernel-regression scores for query pairs")
    q.add_argument("--emb", required=True, help="directory written by fit")
    q.add_argument("--entities-a", required=True)
    q.add_argument("--entities-b", required=True)
    q.add_argument("--observed", required=True)
    q.add_argument("--queries", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--hd", type=float)
    q.add_argument("--hg", type=float)
    q.add_argument("--fill-zeros", action="store_true")
    q.add_argument("--header", action="store_true")
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_predict)

    q = sub.add_parser("experiment", help="Monte-Carlo scaling sweep")
    q.add_argument("--out", required=True)
    q.add_argument("--sweep", choices=("m", "n", "s"), required=True)
    q.add_argument("--grid", type=_ints, required=True)
    q.add_argument("--trials", type=int, default=20)
    q.add_argument("--model", choices=MODELS, default="bilinear")
    q.add_argument("--dist", choices=DISTS, default="gaussian")
    q.add_argument("--estimator", choices=("jdr", "fast", "sparse", "phd", "cphd", "pca"), default="jdr")
    q.add_argument("--normalize", choices=(FULL, FEATUREWISE, NONE))
    q.add_argument("--n", type=int, default=50)
    q.add_argument("--m", type=int, default=20000)
    q.add_argument("--s", type=int, help="planted sparsity for m or n sweeps")
    q.add_argument("--rank", type=int, default=5)
    q.add_argument("--rho", type=float, default=0.2)
    q.add_argument("--noise-sd", type=float, default=1.0)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_experiment)

    q = sub.add_parser("pathology", help="JDR vs pHd on odd and even links")
    q.add_argument("--out", required=True)
    q.add_argument("--grid", type=_ints, default=[1000, 2000, 5000, 10000])
    q.add_argument("--n", type=int, default=10)
    q.add_argument("--rank", type=int, default=2)
    q.add_argument("--trials", type=int, default=20)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_pathology)

    q = sub.add_parser("dyadic", help="synthetic dyadic retrieval benchmark")
    q.add_argument("--out", required=True)
    q.add_argument("--m-d", type=int, default=300)
    q.add_argument("--m-g", type=int, default=300)
    q.add_argument("--n", type=int, default=40)
    q.add_argument("--rank", type=int, default=5)
    q.add_argument("--partitions", type=int, default=5)
    q.add_argument("--k", type=_ints, default=[10])
    q.add_argument("--methods", default="jdr,pca,random")
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_dyadic)
    return p


def _fail(exc, code):
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail(exc, 3)
    except (ValidationError, ValueError, OSError) as exc:
        return _fail(exc, 2)
    return 0


if __name__ == "__main__":
    sys.exit(main())

import numpy as np
import pytest

from jointdr.errors import ValidationError
from jointdr.experiments import (
    DyadicConfig,
    ExperimentPlan,
    PathologyConfig,
    final_nsee,
    make_dyadic,
    run_dyadic_benchmark,
    run_experiment,
    run_pathology,
    run_robustness,
    write_experiment_csv,
)
from jointdr.synth import SyntheticSpec

SMALL = SyntheticSpec(n1=8, n2=8, r=2)


class TestPlan:
    @pytest.mark.parametrize(
        "kw", [dict(sweep="r"), dict(grid=(100,)), dict(grid=(200, 100)), dict(trials=0), dict(estimator="sir")]
    )
    def test_invalid(self, kw):
        args = dict(sweep="m", grid=(100, 200))
        args.update(kw)
        with pytest.raises(ValidationError):
            ExperimentPlan(**args)

    def test_spec_for_each_sweep(self):
        assert ExperimentPlan("m", (10, 20), SMALL).spec_for(20, 1, 0).m == 20
        spec = ExperimentPlan("n", (10, 20), SMALL).spec_for(20, 1, 0)
        assert (spec.n1, spec.n2) == (20, 20)
        assert ExperimentPlan("s", (3, 4), SMALL).spec_for(4, 1, 0).sparsity == (4, 4)

    def test_trial_seeds_distinct(self):
        plan = ExperimentPlan("m", (10, 20), SMALL)
        seeds = {plan.spec_for(10, g, t).seed for g in range(2) for t in range(10)}
        assert len(seeds) == 20


class TestRunExperiment:
    @pytest.mark.parametrize("estimator", ["jdr", "fast", "sparse", "phd", "cphd", "pca"])
    def test_every_estimator(self, estimator):
        base = SMALL.with_(sparsity=(4, 4)) if estimator == "sparse" else SMALL
        res = run_experiment(ExperimentPlan("m", (200, 400), base, trials=2, estimator=estimator))
        assert len(res.rows) == 4
        assert [r[:2] for r in res.rows] == [(200, 0), (200, 1), (400, 0), (400, 1)]
        assert all(0 <= r[2] <= 1 for r in res.rows)
        assert res.means[0] == pytest.approx(np.mean([r[2] for r in res.rows[:2]]))

    def test_deterministic(self):
        plan = ExperimentPlan("m", (200, 400), SMALL, trials=3, seed=5)
        assert run_experiment(plan).rows == run_experiment(plan).rows

    def test_csv(self, tmp_path):
        res = run_experiment(ExperimentPlan("n", (6, 8), SMALL.with_(m=300), trials=2))
        write_experiment_csv(tmp_path / "r.csv", res)
        lines = (tmp_path / "r.csv").read_text().splitlines()
        assert lines[1].startswith("6,0,")
        assert lines[5].startswith("6,mean,")
        assert float(lines[-1].split(",")[2]) == res.fit.slope

    def test_robustness_pairs(self):
        out = run_robustness(ExperimentPlan("m", (200, 400), SMALL, trials=2), variants=("uniform",))
        assert set(out) == {"gaussian", "uniform"}
        assert out["uniform"].plan.base.feature_dist == "uniform"


class TestPathology:
    def test_table_and_orthonormal_outputs(self):
        rows = run_pathology(PathologyConfig(grid=(300, 600), trials=2))
        assert len(rows) == 8
        final = final_nsee(rows)
        assert set(final) == {("jdr", "odd"), ("jdr", "even"), ("phd", "odd"), ("phd", "even")}
        assert all(0 <= v <= 1 for v in final.values())


class TestDyadic:
    def test_positive_fraction(self):
        d = make_dyadic(DyadicConfig(m_D=100, m_G=80, n=10, r=2))
        assert d.scores.shape == (100, 80)
        assert np.mean(d.scores > 0) == pytest.approx(0.05, abs=0.01)
        assert d.scores.min() == 0.0

    def test_small_benchmark(self):
        cfg = DyadicConfig(m_D=60, m_G=50, n=10, r=2, partitions=2, methods=("jdr", "pca", "phd", "random"))
        res = run_dyadic_benchmark(cfg, ks=(5, 10, 20))
        for method, byk in res["recall"].items():
            vals = [byk[k] for k in (5, 10, 20)]
            assert all(b >= a for a, b in zip(vals, vals[1:])), method
        assert set(res["bandwidth_scale"]) == {"jdr", "pca", "phd"}
        assert len(res["per_partition"]) == 4 * 2 * 3

"""
Tests for the synthetic models and the experiment runner.
"""
import csv
import json
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from pcr.errors import DataError, DomainError
from pcr.randkit import RngStream
from pcr.schemas import ExperimentSpec, ModelSpec
from pcr.simlab import (
    FULL_REPLICATES,
    build_model,
    draw_coefficients,
    expand_experiment,
    gen_dataset,
    load_experiments,
    run_experiment,
    run_experiments,
)

CONFIG_DIR = Path(__file__).parent.parent / "configs"


@pytest.mark.unit
class TestGenDataset:
    def test_same_stream_same_data(self, quadratic_null_spec):
        a, _, _ = gen_dataset(quadratic_null_spec, RngStream.derive(1, "data", 0))
        b, _, _ = gen_dataset(quadratic_null_spec, RngStream.derive(1, "data", 0))
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.z, b.z)

    def test_quadratic_shape(self, quadratic_null_spec):
        data, sampler, approx = gen_dataset(quadratic_null_spec, RngStream.derive(1, "data", 0))
        assert (data.n, data.q) == (100, 20)
        assert approx is None
        assert sampler.v.size == 20

    def test_x_follows_v(self):
        spec = ModelSpec(model_id="quadratic_null", n=5000, p_dim=2)
        coefficients = (np.array([1.0, 0.0]), np.array([2.0, -1.0]))
        data, _, _ = gen_dataset(spec, RngStream.derive(2), coefficients)
        residual = data.x - data.z @ coefficients[1]
        assert residual.std() == pytest.approx(1.0, abs=0.05)

    def test_shift_model_correlates_x_and_y(self):
        spec = ModelSpec(model_id="quadratic_shift", n=3000, p_dim=1)
        coefficients = (np.zeros(1), np.zeros(1))
        data, _, _ = gen_dataset(spec, RngStream.derive(3), coefficients)
        # Y = 2X + noise when u = 0
        assert np.corrcoef(data.x, data.y)[0, 1] > 0.8

    def test_crt_failure_is_dependent_but_uncorrelated(self):
        spec = ModelSpec(model_id="crt_failure_example", n=20_000)
        data, _, _ = gen_dataset(spec, RngStream.derive(4))
        assert data.q == 0
        assert abs(stats.spearmanr(data.x, data.y).statistic) < 0.05
        # |X| small goes with large Y
        assert stats.spearmanr(np.abs(data.x), data.y).statistic < -0.2

    def test_mismatch_model_has_approximate_sampler(self):
        spec = ModelSpec(model_id="robust_mismatch", n=50, p_dim=3, eta=0.04)
        _, sampler, approx = gen_dataset(spec, RngStream.derive(5))
        assert approx.sd == pytest.approx(1.04)
        np.testing.assert_array_equal(approx.v, sampler.v)

    def test_quadratic_needs_coefficients(self, quadratic_null_spec):
        with pytest.raises(DomainError):
            build_model(quadratic_null_spec)

    def test_coefficients_deterministic(self, quadratic_null_spec):
        u1, v1 = draw_coefficients(quadratic_null_spec, 8)
        u2, v2 = draw_coefficients(quadratic_null_spec, 8)
        np.testing.assert_array_equal(u1, u2)
        np.testing.assert_array_equal(v1, v2)


@pytest.mark.unit
class TestExperimentFiles:
    def test_expand_sweeps(self):
        raw = {"name": "x", "test": "pcr", "L": [2, 3], "K": [1, 4, 10], "model": {"model_id": "quadratic_null",
                                                                             "n": [10, 20]}}
        items = expand_experiment(raw)
        assert len(items) == 12
        assert {(i["L"], i["K"], i["model"]["n"]) for i in items} == {
            (L, K, n) for L in (2, 3) for K in (1, 4, 10) for n in (10, 20)
        }

    def test_expand_without_lists(self):
        raw = {"name": "x", "test": "crt", "model": {"model_id": "crt_failure_example", "n": 10}}
        assert expand_experiment(raw) == [raw]

    @pytest.mark.parametrize("name, count", [
        ("table1.toml", 8),
        ("size_tables.toml", 96),
        ("figure3.toml", 48),
        ("table4_robust.toml", 6),
        ("figure1_crt.toml", 1),
        ("parameter_free.toml", 4),
    ])
    def test_shipped_configs_load(self, name, count):
        specs = load_experiments(CONFIG_DIR / name)
        assert len(specs) == count

    def test_full_replicates(self):
        specs = load_experiments(CONFIG_DIR / "table1.toml", full=True)
        assert {s.replicates for s in specs} == {FULL_REPLICATES}

    def test_json_file(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(json.dumps({"name": "j", "test": "crt", "M": 9, "replicates": 2,
                                    "model": {"model_id": "crt_failure_example", "n": 20}}))
        [spec] = load_experiments(path)
        assert spec.M == 9

    def test_malformed_toml(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[[experiment]\nname = ")
        with pytest.raises(DataError):
            load_experiments(path)

    def test_invalid_experiment(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text('[[experiment]]\nname = "x"\ntest = "pcr"\nL = 1\n[experiment.model]\n'
                        'model_id = "quadratic_null"\nn = 10\n')
        with pytest.raises(DomainError):
            load_experiments(path)

    def test_robust_on_exact_sampler_needs_delta(self):
        with pytest.raises(ValueError):
            ExperimentSpec(name="r", test="robust_pcr", model=ModelSpec(model_id="quadratic_null", n=10))


@pytest.mark.integration
class TestRunExperiment:
    def _spec(self, **overrides):
        fields = dict(name="small", test="pcr", replicates=20, seed=3, L=3, K=4, alpha=0.1,
                      model=ModelSpec(model_id="quadratic_null", n=60, p_dim=4))
        fields.update(overrides)
        return ExperimentSpec(**fields)

    def test_report_fields(self):
        report = run_experiment(self._spec())
        assert report.replicates == 20
        assert 0.0 <= report.rate <= 1.0
        assert report.se == pytest.approx(np.sqrt(report.rate * (1 - report.rate) / 20))
        assert report.seconds is None
        assert len(report.u) == 4

    def test_timing_only_on_request(self):
        assert run_experiment(self._spec(replicates=2), record_timing=True).seconds is not None

    def test_independent_of_thread_count(self):
        spec = self._spec(per_replicate=True)
        assert run_experiment(spec, n_jobs=1) == run_experiment(spec, n_jobs=2)

    @pytest.mark.parametrize("test, extra", [
        ("crt", {"M": 19}),
        ("pf_pcr", {"grid": [2, 4]}),
        ("robust_pcr", {"delta": 0.05}),
    ])
    def test_every_procedure_runs(self, test, extra):
        report = run_experiment(self._spec(test=test, replicates=3, per_replicate=True, **extra))
        assert len(report.per_replicate) == 3

    def test_crt_report_has_no_labels(self):
        report = run_experiment(self._spec(test="crt", M=19, replicates=2))
        assert report.L is None and report.K is None
        assert report.threshold == "two"

    def test_csv_rows(self, tmp_path):
        path = tmp_path / "out.csv"
        run_experiments([self._spec(replicates=2), self._spec(name="second", replicates=2)], csv_path=path)
        with open(path, newline="") as f:
            rows = list(csv.DictReader(f))
        assert [r["experiment"] for r in rows] == ["small", "second"]
        assert rows[0]["seconds"] == ""


@pytest.mark.slow
@pytest.mark.statistical
class TestReferenceRates:
    """Smaller reruns of the experiments in configs/; bands allow for the lower replicate counts."""

    @staticmethod
    def _run(test, model, replicates, **fields):
        return run_experiment(ExperimentSpec(name=f"{model.model_id}-{test}", test=test, replicates=replicates,
                                             model=model, **fields))

    def test_crt_failure_table(self):
        model = ModelSpec(model_id="crt_failure_example", n=1000, theta=1e-3)
        common = dict(L=5, alpha=0.1, score="sq_loss_xy")
        finite_k1 = self._run("pcr", model, 200, K=1, threshold_kind="finite", **common)
        asym_k1 = self._run("pcr", model, 200, K=1, threshold_kind="asym", **common)
        asym_k4 = self._run("pcr", model, 200, K=4, threshold_kind="asym", **common)
        assert abs(finite_k1.rate - 0.886) <= 0.03 + 3 * finite_k1.se
        assert asym_k1.rate >= 0.965
        assert asym_k4.rate >= 0.97

    def test_pcr_beats_crt_on_failure_model(self):
        model = ModelSpec(model_id="crt_failure_example", n=1000)
        pcr = self._run("pcr", model, 200, L=5, K=20, alpha=0.1, threshold_kind="asym", score="sq_loss_xy")
        crt = self._run("crt", model, 200, M=200, alpha=0.1, score="sq_loss_xy")
        assert pcr.rate > crt.rate + 0.2
        assert crt.rate < 0.25

    @pytest.mark.parametrize("L", [5, 10])
    def test_finite_size_on_quadratic_null(self, L):
        report = self._run("pcr", ModelSpec(model_id="quadratic_null", n=100), 300, L=L, K=4, alpha=0.1,
                           threshold_kind="finite")
        assert report.rate <= 0.1

    def test_robust_size_under_mismatch(self):
        model = ModelSpec(model_id="robust_mismatch", n=5000, a=0.0, eta=0.04)
        common = dict(L=4, K=10, alpha=0.1, threshold_kind="asym")
        robust = self._run("robust_pcr", model, 150, **common)
        plain = self._run("pcr", model, 200, **common)
        assert robust.rate <= 0.02
        # the plain statistic loses size control under the same sampler
        assert plain.rate > 0.1
        assert plain.rate > robust.rate

    def test_robust_power(self):
        model = ModelSpec(model_id="robust_mismatch", n=5000, a=4.0, eta=0.02)
        report = self._run("robust_pcr", model, 150, L=4, K=10, alpha=0.1, threshold_kind="asym")
        assert report.rate >= 0.97 - 3 * report.se

    def test_power_grows_with_n(self):
        common = dict(L=5, K=100, alpha=0.1, threshold_kind="asym")
        small = self._run("pcr", ModelSpec(model_id="quadratic_shift", n=1000), 150, **common)
        large = self._run("pcr", ModelSpec(model_id="quadratic_shift", n=2000), 150, **common)
        assert large.rate >= small.rate
        assert large.rate > small.rate or small.rate >= 0.98

    def test_parameter_free_power(self):
        model = ModelSpec(model_id="quadratic_shift", n=1000)
        common = dict(K=100, grid=[2, 4, 8, 16, 32], alpha=0.1)
        finite = self._run("pf_pcr", model, 100, threshold_kind="finite", **common)
        asym = self._run("pf_pcr", model, 100, threshold_kind="asym", **common)
        assert asym.rate >= finite.rate
        assert asym.rate >= 0.5

    def test_parameter_free_size(self):
        reps = 200
        report = self._run("pf_pcr", ModelSpec(model_id="quadratic_null", n=1000), reps, K=20,
                           grid=[2, 4, 8, 16, 32], alpha=0.1, threshold_kind="asym", per_replicate=True)
        p_stars = np.array([d.p for d in report.per_replicate])
        for t in (0.05, 0.1, 0.2):
            assert np.mean(p_stars <= t) <= t + 3 * np.sqrt(t * (1 - t) / reps)

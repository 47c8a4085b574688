import numpy as np
import pytest

from pcr.errors import DataError, DomainError
from pcr.samplers import CallableSampler, GaussianLinearSampler, StandardNormalSampler, parse_sampler_spec


@pytest.mark.unit
class TestGaussianLinearSampler:
    def test_conditional_moments(self, rng):
        sampler = GaussianLinearSampler([1.0, -2.0], sd=0.5, intercept=1.0)
        draws = sampler.draw_many(np.array([1.0, 1.0]), rng, 200_000)
        assert draws.mean() == pytest.approx(0.0, abs=0.01)
        assert draws.std() == pytest.approx(0.5, abs=0.01)

    def test_draw_rows_one_per_row(self, rng):
        sampler = GaussianLinearSampler([1.0])
        out = sampler.draw_rows(np.array([[0.0], [100.0]]), rng)
        assert out.shape == (2,)
        assert out[1] > 90

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DataError):
            GaussianLinearSampler([1.0, 2.0]).draw_many(np.array([1.0]), rng, 3)

    def test_rejects_non_positive_sd(self):
        with pytest.raises(DomainError):
            GaussianLinearSampler([1.0], sd=0.0)

    def test_same_generator_state_same_draws(self):
        from pcr.randkit import RngStream

        sampler = StandardNormalSampler()
        a = sampler.draw_many(np.empty(0), RngStream.derive(1, 0).generator(), 10)
        b = sampler.draw_many(np.empty(0), RngStream.derive(1, 0).generator(), 10)
        np.testing.assert_array_equal(a, b)


@pytest.mark.unit
class TestCallableSampler:
    def test_wraps_function(self, rng):
        sampler = CallableSampler(lambda z, g, size: np.full(size, z[0] * 2), "double")
        np.testing.assert_array_equal(sampler.draw_many(np.array([3.0]), rng, 4), [6.0] * 4)
        assert sampler.draw(np.array([1.0]), rng) == 2.0


@pytest.mark.unit
class TestParseSamplerSpec:
    def test_standard_normal(self):
        assert isinstance(parse_sampler_spec("standard-normal"), StandardNormalSampler)
        assert parse_sampler_spec("standard-normal:2").sd == 2.0

    def test_gaussian_linear_from_file(self, tmp_path):
        path = tmp_path / "v.csv"
        path.write_text("0.5\n-1.0\n")
        sampler = parse_sampler_spec(f"gaussian-linear:{path}:1.5")
        np.testing.assert_array_equal(sampler.v, [0.5, -1.0])
        assert sampler.sd == 1.5

    def test_kernel_model(self, tmp_path):
        import pandas as pd

        from pcr.pipeline.kernel import KernelSampler, kernel_fit

        train = pd.DataFrame({"start_loc": ["A", "A"], "end_loc": ["B", "B"], "hour": [8.0, 9.0],
                              "duration_min": [10.0, 12.0]})
        path = kernel_fit(train).save(tmp_path / "model.json")
        assert isinstance(parse_sampler_spec(f"kernel:{path}"), KernelSampler)

    def test_unknown(self):
        with pytest.raises(DomainError):
            parse_sampler_spec("uniform")

    def test_gaussian_linear_needs_file(self):
        with pytest.raises(DomainError):
            parse_sampler_spec("gaussian-linear:")

import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from pcr.errors import DomainError
from pcr.randkit import (
    Chi2Params,
    RngStream,
    chi2_cdf,
    chi2_quantile,
    chi2_sf,
    gaussian_sample,
    normal_cdf,
    normal_quantile,
    reg_lower_gamma,
    reg_upper_gamma,
)


@pytest.mark.unit
class TestRngStream:
    def test_same_key_same_sequence(self):
        a = RngStream.derive(42, "data", 3).generator().standard_normal(100)
        b = RngStream.derive(42, "data", 3).generator().standard_normal(100)
        np.testing.assert_array_equal(a, b)

    def test_distinct_paths_differ(self):
        a = RngStream.derive(42, 0).generator().standard_normal(50)
        b = RngStream.derive(42, 1).generator().standard_normal(50)
        assert not np.array_equal(a, b)

    def test_distinct_paths_are_uncorrelated(self):
        a = RngStream.derive(5, "x").generator().standard_normal(20000)
        b = RngStream.derive(5, "y").generator().standard_normal(20000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 4 / math.sqrt(20000)

    def test_child_is_deterministic(self):
        parent = RngStream.derive(1, "root")
        assert parent.child(2) == parent.child(2)
        assert parent.child(2) != parent.child(3)

    def test_rejects_out_of_range_seed(self):
        with pytest.raises(DomainError):
            RngStream(-1, 0)


@pytest.mark.unit
class TestNormal:
    def test_symmetry(self):
        assert normal_cdf(0.0) == 0.5

    def test_saturation(self):
        assert normal_cdf(40.0) == 1.0

    def test_quantile_point(self):
        assert normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)

    def test_quantile_inverts_cdf(self):
        assert normal_cdf(normal_quantile(0.3)) == pytest.approx(0.3, abs=1e-12)


@pytest.mark.unit
class TestIncompleteGamma:
    def test_exponential_case(self):
        assert reg_lower_gamma(1.0, 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-12)

    def test_zero(self):
        assert reg_lower_gamma(3.0, 0.0) == 0.0
        assert reg_upper_gamma(3.0, 0.0) == 1.0

    def test_matches_quadrature(self):
        s, x = 2.5, 3.0
        integral, _ = integrate.quad(lambda t: t ** (s - 1) * math.exp(-t), 0, x, epsabs=1e-14, epsrel=1e-14)
        assert reg_lower_gamma(s, x) == pytest.approx(integral / math.gamma(s), abs=1e-12)

    @pytest.mark.parametrize("s,x", [(0.5, 0.1), (2.0, 30.0), (10.0, 9.0), (40.0, 60.0)])
    def test_both_branches_agree_with_scipy(self, s, x):
        assert reg_lower_gamma(s, x) == pytest.approx(special.gammainc(s, x), abs=1e-12)
        assert reg_upper_gamma(s, x) == pytest.approx(special.gammaincc(s, x), rel=1e-10, abs=1e-300)

    def test_upper_tail_keeps_precision(self):
        # 1 - P would round to zero here
        assert reg_upper_gamma(2.0, 80.0) == pytest.approx(special.gammaincc(2.0, 80.0), rel=1e-10)
        assert reg_upper_gamma(2.0, 80.0) > 0

    def test_domain(self):
        with pytest.raises(DomainError):
            reg_lower_gamma(0.0, 1.0)
        with pytest.raises(DomainError):
            reg_upper_gamma(1.0, -1.0)


@pytest.mark.unit
class TestChiSquared:
    def test_zero(self):
        assert chi2_cdf(0.0, 3) == 0.0

    def test_two_dof_median(self):
        assert chi2_cdf(2 * math.log(2), 2) == pytest.approx(0.5, abs=1e-14)

    def test_noncentral_against_scipy(self):
        assert chi2_cdf(7.0, Chi2Params(4, 3.0)) == pytest.approx(stats.ncx2.cdf(7.0, 4, 3.0), abs=1e-8)

    def test_noncentral_sf_complements_cdf(self):
        params = Chi2Params(3, 10.0)
        assert chi2_cdf(12.0, params) + chi2_sf(12.0, params) == pytest.approx(1.0, abs=1e-12)

    def test_noncentral_large_lambda(self):
        assert chi2_sf(300.0, Chi2Params(4, 250.0)) == pytest.approx(stats.ncx2.sf(300.0, 4, 250.0), abs=1e-8)

    def test_quantile_exponential_median(self):
        assert chi2_quantile(0.5, 2) == pytest.approx(2 * math.log(2), abs=1e-12)

    def test_quantile_four_dof(self):
        assert chi2_quantile(0.9, 4) == pytest.approx(7.7794, abs=1e-4)

    @pytest.mark.parametrize("dof", [1, 2, 5, 17, 64])
    def test_quantile_round_trip(self, dof):
        for p in np.linspace(0.01, 0.99, 15):
            assert chi2_cdf(chi2_quantile(p, dof), dof) == pytest.approx(p, abs=1e-8)

    def test_quantile_rejects_noncentral(self):
        with pytest.raises(DomainError):
            chi2_quantile(0.5, Chi2Params(2, 1.0))

    def test_params_validation(self):
        with pytest.raises(DomainError):
            Chi2Params(0)
        with pytest.raises(DomainError):
            Chi2Params(2, -1.0)


@pytest.mark.statistical
class TestGaussianSample:
    def test_mean_band(self):
        draws = gaussian_sample(RngStream.derive(3, "mean"), 2.5, 1.5, size=1_000_000)
        assert abs(draws.mean() - 2.5) < 4 * 1.5 / 1000

    def test_symmetry(self):
        draws = gaussian_sample(RngStream.derive(3, "sym"), 0.0, 1.0, size=1_000_000)
        assert np.mean(draws <= 0) == pytest.approx(0.5, abs=0.002)

    def test_determinism(self):
        stream = RngStream.derive(11, "repeat")
        np.testing.assert_array_equal(gaussian_sample(stream, 0, 1, 100), gaussian_sample(stream, 0, 1, 100))

    def test_rejects_non_positive_sd(self):
        with pytest.raises(DomainError):
            gaussian_sample(RngStream.derive(0), 0.0, 0.0)

import math

import numpy as np
import pytest
from scipy import stats

from umedopt.asymptotics import (
    LawCase,
    LimitLaw,
    asymptotic_efficiency,
    boundary_cell,
    efficiency_table,
    estimator_limit_law,
    g_lateral,
    g_prime,
    sigma2_umed,
    umed_covariance,
    umed_gradient,
    umed_limit_law,
)
from umedopt.errors import DomainError
from umedopt.estimator import g
from umedopt.families import PoissonDistribution, empirical_from_sample, make_generator, sample_distribution
from umedopt.umedian import umed


class TestSigma2:
    def test_poisson_five(self, poisson5):
        assert sigma2_umed(poisson5) == pytest.approx(6.8394, rel=2e-3)

    def test_poisson_ten(self):
        assert sigma2_umed(PoissonDistribution(10.0)) == pytest.approx(14.177, rel=2e-3)

    def test_delta_method_form(self):
        for lam in (0.4, 1.0, 5.0, 10.0, 20.0):
            dist = PoissonDistribution(lam)
            grad = umed_gradient(dist)
            quad = float(grad @ umed_covariance(dist) @ grad)
            assert quad == pytest.approx(sigma2_umed(dist), rel=1e-12)

    def test_boundary_rejected(self, boundary_lambda):
        with pytest.raises(DomainError, match="use boundary law"):
            sigma2_umed(PoissonDistribution(boundary_lambda))


class TestLimitLaw:
    def test_interior_cdf(self):
        law = LimitLaw(case=LawCase.INTERIOR, sigma2=4.0)
        assert law.cdf(0.0) == 0.5
        assert law.cdf(2.0) == pytest.approx(stats.norm.cdf(1.0))
        assert law.variance == 4.0

    def test_boundary_cdf_two_halves(self):
        law = LimitLaw(case=LawCase.BOUNDARY, left_scale=1.0, right_scale=2.0)
        assert law.cdf(0.0) == 0.5
        assert law.cdf(-1.0) == pytest.approx(stats.norm.cdf(-1.0))
        assert law.cdf(2.0) == pytest.approx(stats.norm.cdf(1.0))
        values = law.cdf(np.linspace(-6.0, 6.0, 101))
        assert (np.diff(values) >= 0).all()

    def test_boundary_equal_scales_is_normal(self):
        law = LimitLaw(case=LawCase.BOUNDARY, left_scale=1.5, right_scale=1.5)
        assert law.variance == pytest.approx(2.25)

    def test_validation(self):
        with pytest.raises(DomainError):
            LimitLaw(case=LawCase.INTERIOR, sigma2=0.0)
        with pytest.raises(DomainError):
            LimitLaw(case=LawCase.BOUNDARY, left_scale=1.0)

    def test_as_dict(self):
        assert LimitLaw(case=LawCase.INTERIOR, sigma2=2.0).as_dict()["case"] == "interior"


class TestUmedLimitLaw:
    def test_interior(self, poisson5):
        law = umed_limit_law(poisson5)
        assert law.case is LawCase.INTERIOR
        assert law.sigma2 == pytest.approx(sigma2_umed(poisson5))

    def test_boundary_scales(self, boundary_lambda):
        dist = PoissonDistribution(boundary_lambda)
        assert boundary_cell(dist) == 0
        law = umed_limit_law(dist)
        assert law.case is LawCase.BOUNDARY
        assert law.left_scale == pytest.approx(1.0, rel=1e-9)
        assert law.right_scale == pytest.approx(1.0 / math.log(2.0), rel=1e-9)

    def test_boundary_cell_interior(self, poisson5):
        assert boundary_cell(poisson5) is None


class TestDerivatives:
    @pytest.mark.parametrize("lam", [5.0, 10.0])
    def test_slope_one_at_integers(self, poisson, lam):
        assert g_prime(poisson, lam) == pytest.approx(1.0, abs=1e-5)

    def test_g_prime_matches_wide_difference(self, poisson):
        wide = (g(poisson, 7.3 + 1e-4) - g(poisson, 7.3 - 1e-4)) / 2e-4
        assert g_prime(poisson, 7.3) == pytest.approx(wide, rel=1e-5)

    def test_g_prime_rejects_boundary(self, poisson, boundary_lambda):
        with pytest.raises(DomainError, match="lateral"):
            g_prime(poisson, boundary_lambda)

    def test_lateral_at_ln2(self, poisson, boundary_lambda):
        left, right = g_lateral(poisson, boundary_lambda)
        assert left == pytest.approx(1.0, rel=1e-5)
        assert right == pytest.approx(1.0 / math.log(2.0), rel=1e-5)

    def test_lateral_local_linearity(self, poisson, boundary_lambda):
        left, right = g_lateral(poisson, boundary_lambda)
        h = 1e-3
        center = g(poisson, boundary_lambda)
        assert (center - g(poisson, boundary_lambda - h)) / h == pytest.approx(left, rel=0.01)
        assert (g(poisson, boundary_lambda + h) - center) / h == pytest.approx(right, rel=0.01)

    def test_lateral_rejects_interior(self, poisson):
        with pytest.raises(DomainError, match="interior"):
            g_lateral(poisson, 5.0)


class TestEstimatorLimitLaw:
    def test_interior_variance(self, poisson):
        law = estimator_limit_law(poisson, 5.0)
        assert law.case is LawCase.INTERIOR
        assert law.variance == pytest.approx(6.8394, rel=2e-3)

    def test_boundary_scales_both_one(self, poisson, boundary_lambda):
        law = estimator_limit_law(poisson, boundary_lambda)
        assert law.case is LawCase.BOUNDARY
        assert law.left_scale == pytest.approx(1.0, rel=1e-5)
        assert law.right_scale == pytest.approx(1.0, rel=1e-5)


class TestEfficiency:
    @pytest.mark.parametrize("lam,expected", [(5.0, 0.72), (10.0, 0.69), (20.0, 0.67)])
    def test_table_values(self, poisson, lam, expected):
        assert asymptotic_efficiency(poisson, lam) == pytest.approx(expected, abs=0.02)

    def test_efficiency_below_one(self, poisson):
        for lam in np.linspace(0.9, 30.0, 25):
            assert 0.0 < asymptotic_efficiency(poisson, lam) < 1.0

    def test_boundary_rejected(self, poisson, boundary_lambda):
        with pytest.raises(DomainError, match="interior"):
            asymptotic_efficiency(poisson, boundary_lambda)

    def test_frame(self, poisson):
        frame = efficiency_table(poisson, [5.0, 10.0])
        assert list(frame.columns) == [
            "theta", "sigma2_umed", "g_prime", "asymptotic_variance", "mle_variance", "efficiency",
        ]
        assert frame["mle_variance"].tolist() == pytest.approx([5.0, 10.0])
        assert frame["efficiency"].iloc[0] == pytest.approx(0.731, abs=0.005)


@pytest.mark.slow
class TestMonteCarloOracles:
    @pytest.mark.parametrize("lam,seed", [(5.0, 31), (10.0, 43)])
    def test_umed_variance(self, lam, seed):
        dist = PoissonDistribution(lam)
        rng = make_generator(seed)
        n = 10_000
        values = np.array([
            umed(empirical_from_sample(sample_distribution(dist, n, rng))).value for _ in range(2000)
        ])
        assert n * values.var() == pytest.approx(sigma2_umed(dist), rel=0.10)

    def test_sample_covariance(self, poisson5):
        rng = make_generator(37)
        n = 10_000
        pairs = []
        for _ in range(2000):
            dist = empirical_from_sample(sample_distribution(poisson5, n, rng))
            pairs.append((dist.cdf(4), dist.pmf(5)))
        cov = n * np.cov(np.array(pairs).T)
        np.testing.assert_allclose(cov, umed_covariance(poisson5), rtol=0.15, atol=0.01)

    def test_boundary_law(self, boundary_lambda):
        dist = PoissonDistribution(boundary_lambda)
        law = umed_limit_law(dist)
        rng = make_generator(41)
        n = 10_000
        center = umed(dist).value
        values = np.array([
            math.sqrt(n) * (umed(empirical_from_sample(sample_distribution(dist, n, rng))).value - center)
            for _ in range(2000)
        ])
        result = stats.kstest(values, law.cdf)
        assert result.pvalue > 0.01

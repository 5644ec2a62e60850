import numpy as np
import pytest

from umedopt import estimator
from umedopt.errors import DomainError, EstimationError
from umedopt.estimator import (
    EstimatorSpec,
    HampelConfig,
    SolverSettings,
    estimate_hampel,
    estimate_mle,
    estimate_optimal,
    g,
    g_inverse,
    hampel_c,
    hampel_equation,
    m0,
    make_estimator,
)
from umedopt.families import (
    AT_INFINITY,
    BinomialFamily,
    PoissonDistribution,
    contaminate,
    empirical_from_sample,
    make_generator,
    sample_family,
)
from umedopt.umedian import umed


# ------------------------------------------------------------------ #
# g and its inverse
# ------------------------------------------------------------------ #


class TestG:
    def test_poisson_five(self, poisson):
        assert g(poisson, 5.0) == pytest.approx(4.839136, abs=1e-5)

    def test_strictly_increasing(self, poisson):
        thetas = np.linspace(0.1, 50.0, 1000)
        values = [g(poisson, t) for t in thetas]
        assert (np.diff(values) > 0).all()

    def test_inverse_recovers_theta(self, poisson):
        for theta in (0.3, 1.0, 4.2, 9.9, 25.0):
            root, _, residual = g_inverse(poisson, g(poisson, theta))
            assert root == pytest.approx(theta, rel=1e-9)
            assert residual < 1e-10

    def test_target_out_of_range(self, poisson):
        with pytest.raises(EstimationError, match="target outside family range"):
            g_inverse(poisson, 0.0)

    def test_residual_tolerance_stops_early(self, poisson):
        target = g(poisson, 7.3)
        _, tight_iterations, _ = g_inverse(poisson, target)
        loose, loose_iterations, residual = g_inverse(poisson, target, settings=SolverSettings(residual_tol=1e-3))
        assert residual < 1e-3
        assert loose == pytest.approx(7.3, abs=1e-2)
        assert loose_iterations < tight_iterations


# ------------------------------------------------------------------ #
# Optimal estimator
# ------------------------------------------------------------------ #


class TestEstimateOptimal:
    def test_all_fives(self, poisson):
        res = estimate_optimal(empirical_from_sample([5] * 20), poisson)
        assert res.umed_target == 5.0
        assert res.theta_hat == pytest.approx(5.167, abs=0.01)
        assert g(poisson, res.theta_hat) == pytest.approx(5.0, abs=1e-9)
        assert res.method == "optimal"

    def test_fisher_consistent(self, poisson):
        for theta in (0.7, 5.0, 13.0):
            res = estimate_optimal(poisson.at(theta), poisson)
            assert res.residual < 1e-10
            assert res.theta_hat == pytest.approx(theta, rel=1e-9)

    def test_all_zeros_is_out_of_range(self, poisson):
        with pytest.raises(EstimationError, match="target outside family range"):
            estimate_optimal(empirical_from_sample([0, 0, 0]), poisson)

    def test_larger_observation_never_decreases_estimate(self, poisson):
        rng = make_generator(3)
        for _ in range(30):
            sample = sample_family(poisson, 5.0, 20, rng)
            base = estimate_optimal(empirical_from_sample(sample), poisson).theta_hat
            bumped = sample.copy()
            bumped[int(rng.integers(sample.size))] += int(rng.integers(1, 10))
            moved = estimate_optimal(empirical_from_sample(bumped), poisson).theta_hat
            assert moved >= base - 1e-10

    def test_outlier_influence_is_bounded(self, poisson):
        lam = 5.0
        rng = make_generator(17)
        for _ in range(40):
            sample = sample_family(poisson, lam, 50, rng)
            sample[0] = int(3 * lam)
            near = estimate_optimal(empirical_from_sample(sample), poisson).theta_hat
            sample[0] = int(10**6 * lam)
            far = estimate_optimal(empirical_from_sample(sample), poisson).theta_hat
            assert abs(far - near) < 1e-12

    def test_consistency(self, poisson):
        for lam in (5.0, 10.0, 20.0):
            rng = make_generator(1000 + int(lam))
            hits = 0
            for _ in range(100):
                dist = empirical_from_sample(sample_family(poisson, lam, 100_000, rng))
                if abs(estimate_optimal(dist, poisson).theta_hat - lam) <= 0.05:
                    hits += 1
            assert hits >= 95

    def test_contaminated_functional(self, poisson, poisson5):
        res = estimate_optimal(contaminate(poisson5, 0.1, AT_INFINITY), poisson)
        assert res.theta_hat - 5.0 == pytest.approx(0.329, abs=0.01)

    def test_binomial(self):
        family = BinomialFamily(20)
        res = estimate_optimal(family.at(0.3), family)
        assert res.theta_hat == pytest.approx(0.3, rel=1e-9)


# ------------------------------------------------------------------ #
# Hampel estimator
# ------------------------------------------------------------------ #


class TestM0:
    @pytest.mark.parametrize("lam,expected", [(1.0, 0.5), (5.0, 0.1), (20.0, 0.025)])
    def test_poisson(self, poisson, lam, expected):
        assert m0(poisson, lam) == pytest.approx(expected, rel=1e-12)

    def test_only_upper_gap_at_zero(self, poisson):
        # k0 = 0 for small lambda; the single gap is 1 / lambda
        assert m0(poisson, 0.3) == pytest.approx(0.5 / 0.3, rel=1e-12)


class TestHampelC:
    def test_large_m_centres_score(self, poisson):
        assert hampel_c(poisson, 1e6, 5.0) == pytest.approx(0.0, abs=1e-8)

    def test_centring_residual(self, poisson):
        c = hampel_c(poisson, 0.05, 1.0)
        assert abs(c) <= 0.5
        dist = poisson.at(1.0)
        residual = dist.expect(lambda ks: np.clip(poisson.score(ks, 1.0) - c, -0.05, 0.05))
        assert abs(residual) < 1e-11

    def test_rejects_nonpositive_m(self, poisson):
        with pytest.raises(DomainError, match="positive"):
            hampel_c(poisson, 0.0, 1.0)


class TestEstimateHampel:
    @pytest.mark.parametrize("m", [0.05, 1.0])
    def test_fisher_consistent(self, poisson, poisson5, m):
        res = estimate_hampel(poisson5, poisson, HampelConfig(m=m))
        assert res.theta_hat == pytest.approx(5.0, abs=1e-8)
        assert res.method == "hampel"
        assert res.m == m

    def test_equation_nonincreasing(self, poisson):
        dist = empirical_from_sample([2, 4, 5, 5, 6, 9])
        values = [hampel_equation(dist, poisson, 0.2, t) for t in np.linspace(2.0, 9.0, 40)]
        assert (np.diff(values) <= 1e-12).all()

    def test_matches_optimal_below_m0(self, poisson):
        rng = make_generator(99)
        for _ in range(20):
            dist = empirical_from_sample(sample_family(poisson, 5.0, 20, rng))
            optimal = estimate_optimal(dist, poisson).theta_hat
            m = m0(poisson, optimal) / 2.0
            hampel = estimate_hampel(dist, poisson, HampelConfig(m=m)).theta_hat
            assert hampel == pytest.approx(optimal, abs=1e-8)

    def test_rejects_bad_config(self):
        with pytest.raises(DomainError):
            HampelConfig(m=-1.0)

    def test_centring_tolerance_reaches_c_solver(self, poisson, monkeypatch):
        seen = []

        def recording_c(family, m, theta, tol=1e-13):
            seen.append(tol)
            return hampel_c(family, m, theta, tol=tol)

        monkeypatch.setattr(estimator, "hampel_c", recording_c)
        dist = empirical_from_sample([2, 4, 5, 5, 6, 9])
        estimate_hampel(dist, poisson, HampelConfig(m=0.3, c_tol=1e-6))
        assert seen and set(seen) == {1e-6}

    def test_loose_centring_tolerance_moves_equation(self, poisson):
        dist = empirical_from_sample([2, 4, 5, 5, 6, 9])
        tight = hampel_equation(dist, poisson, 0.3, 5.0)
        loose = hampel_equation(dist, poisson, 0.3, 5.0, c_tol=0.5)
        assert loose != pytest.approx(tight, abs=1e-9)


# ------------------------------------------------------------------ #
# MLE and named estimators
# ------------------------------------------------------------------ #


class TestMle:
    def test_poisson_mean(self, poisson):
        res = estimate_mle(empirical_from_sample([1, 2, 3, 6]), poisson)
        assert res.theta_hat == pytest.approx(3.0)
        assert res.method == "mle"

    def test_unbounded_at_infinity(self, poisson):
        with pytest.raises(EstimationError):
            estimate_mle(contaminate(PoissonDistribution(5.0), 0.1, AT_INFINITY), poisson)


class TestMakeEstimator:
    @pytest.mark.parametrize("name,kind,m", [
        ("optimal", "optimal", None),
        ("MLE", "mle", None),
        ("hampel:0.05", "hampel", 0.05),
        ("hampel(m=0.05)", "hampel", 0.05),
    ])
    def test_parses(self, name, kind, m):
        spec = make_estimator(name)
        assert spec.kind == kind
        assert spec.m == m

    def test_label(self):
        assert make_estimator("hampel(m=0.05)").label == "hampel:0.05"
        assert make_estimator("optimal").label == "optimal"

    @pytest.mark.parametrize("name", ["median", "hampel", "hampel:-1"])
    def test_rejects(self, name):
        with pytest.raises(DomainError):
            make_estimator(name)

    def test_callable(self, poisson, poisson5):
        spec = EstimatorSpec(kind="optimal")
        assert spec(poisson5, poisson).theta_hat == pytest.approx(5.0, rel=1e-10)

    def test_umed_target_reported(self, poisson):
        dist = empirical_from_sample([3, 4, 4, 8])
        assert make_estimator("mle")(dist, poisson).umed_target == umed(dist).value

import numpy as np
import pytest

from src.appearance.gaussian import DiagonalGaussian, UpdateConfig, ema_update, fit_gaussian
from src.errors import DimensionMismatchError


def _gaussian(mu, var):
    return DiagonalGaussian(mu=np.atleast_1d(np.asarray(mu, dtype=float)), var=np.atleast_1d(np.asarray(var, dtype=float)))


class TestFitGaussian:
    def test_constant_batch_hits_floor(self):
        g = fit_gaussian(np.full((5, 3), 2.5), variance_floor=1e-4)
        np.testing.assert_array_equal(g.mu, [2.5, 2.5, 2.5])
        np.testing.assert_array_equal(g.var, [1e-4, 1e-4, 1e-4])

    def test_population_variance(self):
        g = fit_gaussian(np.array([[0.0], [2.0]]))
        assert g.mu[0] == 1.0
        assert g.var[0] == 1.0

    def test_maximum_likelihood_on_large_sample(self):
        samples = np.random.default_rng(5).normal(3.0, 2.0, size=(10_000, 1))
        g = fit_gaussian(samples)
        assert abs(g.mu[0] - 3.0) < 0.1
        assert abs(g.var[0] - 4.0) < 0.3

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            fit_gaussian(np.ones((1, 4)))


class TestDiagonalGaussian:
    def test_rejects_non_positive_variance(self):
        with pytest.raises(ValueError):
            _gaussian([0.0], [0.0])

    def test_rejects_mismatched_shapes(self):
        with pytest.raises(DimensionMismatchError):
            DiagonalGaussian(mu=np.zeros(2), var=np.ones(3))

    def test_is_immutable(self):
        g = _gaussian([0.0, 1.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            g.mu[0] = 5.0

    def test_log_pdf_standard_normal(self):
        g = _gaussian([0.0], [1.0])
        assert g.log_pdf(np.array([0.0]))[0] == pytest.approx(-0.5 * np.log(2 * np.pi))


class TestEmaUpdate:
    def test_mean_update(self):
        updated = ema_update(_gaussian(1.0, 1.0), _gaussian(2.0, 1.0), UpdateConfig(gamma=0.95))
        assert updated.mu[0] == pytest.approx(1.05)

    def test_sigma_diff_variance(self):
        updated = ema_update(_gaussian(0.0, 1.0), _gaussian(0.0, 4.0), UpdateConfig(gamma=0.95))
        assert updated.var[0] == pytest.approx(1.1975)

    def test_mu_diff_variance(self):
        cfg = UpdateConfig(gamma=0.95, variance_cross_term="mu_diff")
        updated = ema_update(_gaussian(1.0, 1.0), _gaussian(3.0, 4.0), cfg)
        # 0.95 + 0.2 + 0.95 * 0.05 * (1 - 3)^2
        assert updated.var[0] == pytest.approx(1.34)

    def test_gamma_one_keeps_old_model(self):
        old = _gaussian([1.0, -2.0], [0.5, 3.0])
        updated = ema_update(old, _gaussian([7.0, 7.0], [9.0, 9.0]), UpdateConfig(gamma=1.0))
        assert updated == old

    def test_fixed_point(self):
        g = _gaussian([1.0, 2.0], [0.3, 4.0])
        updated = ema_update(g, g, UpdateConfig())
        np.testing.assert_allclose(updated.mu, g.mu)
        np.testing.assert_allclose(updated.var, g.var)

    def test_geometric_convergence_of_mean(self):
        cfg = UpdateConfig(gamma=0.9)
        g, target = _gaussian(0.0, 1.0), _gaussian(10.0, 1.0)
        for _ in range(5):
            g = ema_update(g, target, cfg)
        assert abs(g.mu[0] - 10.0) == pytest.approx(0.9 ** 5 * 10.0)

    def test_mean_closed_form_for_fifty_updates(self):
        cfg = UpdateConfig(gamma=0.95)
        start, target = np.array([0.0, -3.0, 7.5]), np.array([10.0, 2.0, 7.0])
        g, fixed = _gaussian(start, [1.0, 2.0, 0.5]), _gaussian(target, [1.0, 2.0, 0.5])
        for k in range(1, 51):
            g = ema_update(g, fixed, cfg)
            np.testing.assert_allclose(
                np.abs(g.mu - target), 0.95 ** k * np.abs(start - target), rtol=1e-11, atol=1e-13, err_msg=f"k={k}"
            )

    def test_floor_is_reapplied(self):
        cfg = UpdateConfig(gamma=0.5, variance_floor=0.1)
        updated = ema_update(_gaussian(0.0, 0.1), _gaussian(0.0, 0.1), cfg)
        assert updated.var[0] >= 0.1

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            ema_update(_gaussian([0.0], [1.0]), _gaussian([0.0, 0.0], [1.0, 1.0]), UpdateConfig())


class TestUpdateConfig:
    @pytest.mark.parametrize("gamma", [-0.1, 1.1])
    def test_gamma_range(self, gamma):
        with pytest.raises(ValueError):
            UpdateConfig(gamma=gamma)

    def test_unknown_cross_term(self):
        with pytest.raises(ValueError):
            UpdateConfig(variance_cross_term="other")

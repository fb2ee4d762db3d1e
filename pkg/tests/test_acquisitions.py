"""
Tests for squirrel.bo.acquisitions — closed forms against Monte-Carlo oracles.
"""

import itertools
import math

import numpy as np
import pytest
from scipy.special import ndtri

from squirrel.bo.acquisitions import acq_score
from squirrel.bo.transforms import TransformKind, TransformState, apply

N_MC = 1_000_000
LOG_STATE = TransformState(TransformKind.LOG, shift=0.0, delta=0.0)


class TestClosedForms:
    def test_ei_at_incumbent(self):
        assert acq_score("ei", 0.7, 1.0, 0.7) == pytest.approx(0.3989423, abs=1e-6)

    def test_pi_at_incumbent(self):
        assert acq_score("pi", 2.0, 0.25, 2.0) == pytest.approx(0.5)

    def test_lcb_negated(self):
        assert acq_score("lcb", 1.0, 4.0, 0.0, kappa=2.0) == pytest.approx(3.0)

    def test_ei_zero_variance_at_incumbent(self):
        assert acq_score("ei", 1.0, 0.0, 1.0) == 0.0

    def test_ei_zero_variance_below_incumbent(self):
        assert acq_score("ei", 0.25, 0.0, 1.0) == pytest.approx(0.75)

    def test_pi_zero_variance(self):
        assert acq_score("pi", 0.5, 0.0, 1.0) == 1.0
        assert acq_score("pi", 1.0, 0.0, 1.0) == 0.0

    def test_log_ei_zero_variance(self):
        assert acq_score("log_ei", 0.0, 0.0, 3.0, transform_state=LOG_STATE) == pytest.approx(2.0)

    def test_vectorized(self):
        out = acq_score("ei", np.array([0.0, 1.0, 2.0]), np.array([1.0, 1.0, 0.0]), 1.0)
        assert out.shape == (3,)
        assert out[2] == 0.0


class TestErrors:
    def test_negative_variance(self):
        with pytest.raises(ValueError):
            acq_score("ei", 0.0, -1e-3, 0.0)

    def test_non_finite_mean(self):
        with pytest.raises(ValueError):
            acq_score("pi", math.nan, 1.0, 0.0)

    def test_non_finite_incumbent(self):
        with pytest.raises(ValueError):
            acq_score("ei", 0.0, 1.0, math.inf)

    def test_log_ei_needs_log_state(self):
        _, state = apply("copula", [1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            acq_score("log_ei", 0.0, 1.0, 1.0, transform_state=state)
        with pytest.raises(ValueError):
            acq_score("log_ei", 0.0, 1.0, 1.0)

    def test_non_positive_kappa(self):
        with pytest.raises(ValueError):
            acq_score("lcb", 0.0, 1.0, 0.0, kappa=0.0)


class TestInvariants:
    @pytest.mark.parametrize("kind", ["ei", "pi", "lcb", "log_ei"])
    def test_non_increasing_in_mean(self, kind):
        mu = np.linspace(-3.0, 3.0, 201)
        scores = acq_score(kind, mu, np.full_like(mu, 0.49), 1.5, transform_state=LOG_STATE)
        assert np.all(np.diff(scores) <= 1e-12)

    def test_ei_non_negative_and_pi_bounded(self):
        rng = np.random.default_rng(0)
        mu = rng.normal(size=1000) * 5
        var = rng.uniform(0, 4, size=1000)
        ei = acq_score("ei", mu, var, 0.3)
        pi = acq_score("pi", mu, var, 0.3)
        assert np.all(ei >= 0)
        assert np.all((pi >= 0) & (pi <= 1))


def _normal_draws(seed, mu, sigma):
    """Stratified N(mu, sigma^2) sample: one uniform draw per 1/N_MC stratum."""
    rng = np.random.default_rng(seed)
    u = (rng.permutation(N_MC) + rng.random(N_MC)) / N_MC
    return mu + sigma * ndtri(np.clip(u, 1e-15, 1.0 - 1e-15))


class TestMonteCarloOracle:
    # tolerance: 3 standard errors of the plain Monte-Carlo estimate
    @pytest.mark.parametrize(
        "mu,sigma,f_best",
        list(itertools.product([-1.0, 0.0, 1.5], [0.1, 1.0, 2.0], [-0.5, 0.0, 1.0])),
    )
    def test_ei(self, mu, sigma, f_best):
        draws = np.maximum(f_best - _normal_draws(42, mu, sigma), 0.0)
        se = draws.std() / math.sqrt(N_MC)
        assert abs(acq_score("ei", mu, sigma**2, f_best) - draws.mean()) <= 3 * se + 1e-12

    @pytest.mark.parametrize(
        "mu,sigma,f_best",
        list(itertools.product([-1.0, 0.0, 0.5], [0.1, 0.5, 1.0], [0.5, 1.0, 3.0])),
    )
    def test_log_ei(self, mu, sigma, f_best):
        draws = np.maximum(f_best - np.exp(_normal_draws(43, mu, sigma)), 0.0)
        se = draws.std() / math.sqrt(N_MC)
        score = acq_score("log_ei", mu, sigma**2, f_best, transform_state=LOG_STATE)
        assert abs(score - draws.mean()) <= 3 * se + 1e-12

    @pytest.mark.parametrize(
        "mu,sigma,f_best",
        list(itertools.product([-1.0, 0.0, 1.5], [0.1, 1.0, 2.0], [-0.5, 0.0, 1.0])),
    )
    def test_pi(self, mu, sigma, f_best):
        draws = (_normal_draws(44, mu, sigma) < f_best).astype(float)
        se = draws.std() / math.sqrt(N_MC)
        assert abs(acq_score("pi", mu, sigma**2, f_best) - draws.mean()) <= 3 * se + 1e-6

    @pytest.mark.parametrize(
        "mu,sigma,f_best",
        list(itertools.product([-1.0, 0.0, 1.5], [0.1, 1.0, 2.0], [-0.5, 0.0, 1.0])),
    )
    def test_lcb_matches_sample_quantities(self, mu, sigma, f_best):
        draws = _normal_draws(45, mu, sigma)
        expected = -(draws.mean() - 2.0 * draws.std())
        se = 3.0 * sigma / math.sqrt(N_MC)
        assert abs(acq_score("lcb", mu, sigma**2, f_best, kappa=2.0) - expected) <= 3 * se

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bayesviews import allocation as al
from bayesviews.errors import InsufficientHistory, SingularCovariance, SingularPrecision
from bayesviews.views import CanonicalViews
from helpers import random_simplex, random_spd


def woodbury_posterior(pi, sigma, tau, Q, omega):
    """Covariance-form BL update with P = I, written independently of the library."""
    tS = tau * sigma
    K = tS @ np.linalg.inv(tS + np.diag(omega))
    mu = pi + K @ (Q - pi)
    M = tS - K @ tS
    return mu, sigma + M


class TestCovariance:
    def test_perfectly_correlated(self):
        rng = np.random.default_rng(0)
        r = rng.normal(0, 0.01, size=120)
        p1 = 100 * np.cumprod(1 + r)
        p2 = 50 * np.cumprod(1 + 2 * r)
        S = al.estimate_covariance(np.column_stack([p1, p2]), 100, 90)
        assert S[0, 1] == pytest.approx(np.sqrt(S[0, 0] * S[1, 1]), rel=1e-6)
        np.testing.assert_allclose(np.linalg.eigvalsh(S).min(), 1e-8 * np.mean(np.diag(S)), rtol=1e-3)

    def test_constant_prices(self):
        S = al.estimate_covariance(np.full((100, 3), 7.0), 95, 90)
        np.testing.assert_allclose(S, 1e-8 * np.eye(3), rtol=0, atol=1e-20)

    def test_window_and_causality(self, frame):
        t, span = 150, 90
        S = al.estimate_covariance(frame, t, span)
        p = frame.price[t - span - 1 : t]
        np.testing.assert_allclose(S, np.cov(p[1:] / p[:-1] - 1, rowvar=False), rtol=1e-12)
        poisoned = np.array(frame.price)
        poisoned[t:] *= 3.0
        np.testing.assert_array_equal(al.estimate_covariance(poisoned, t, span), S)

    def test_insufficient_history(self, frame):
        with pytest.raises(InsufficientHistory):
            al.estimate_covariance(frame, 90, 90)
        al.estimate_covariance(frame, 91, 90)


class TestMarkowitz:
    def test_diagonal_arithmetic(self):
        w = al.markowitz_weights([0.1, 0.1], al.RiskModel(np.eye(2), delta=0.25))
        np.testing.assert_allclose(w, [0.4, 0.4])

    def test_identity(self):
        w = al.markowitz_weights([1.0, 0.0], al.RiskModel(np.eye(2), delta=1.0))
        np.testing.assert_allclose(w, [1.0, 0.0])

    def test_random_search_oracle(self, rng):
        n = 4
        risk = al.RiskModel(random_spd(rng, n, 1.0))
        mu = rng.normal(size=n)
        w = al.markowitz_weights(mu, risk)
        best = al.mean_variance_objective(w, mu, risk.sigma, risk.delta)
        trials = w + rng.normal(scale=0.05, size=(10_000, n))
        vals = trials @ mu - 0.5 * risk.delta * np.einsum("ij,jk,ik->i", trials, risk.sigma, trials)
        assert np.all(vals <= best + 1e-12)

    def test_singular(self):
        with pytest.raises(SingularCovariance):
            al.RiskModel(np.array([[1.0, 1.0], [1.0, 1.0]]))


class TestEquilibrium:
    def test_diagonal(self):
        eq = al.equilibrium_returns(al.RiskModel(np.eye(2)), [0.5, 0.5])
        np.testing.assert_allclose(eq.pi, [0.125, 0.125])

    def test_reverse_optimisation_round_trip(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 8))
            risk = al.RiskModel(random_spd(rng, n, 1.0), delta=rng.uniform(0.1, 3))
            w = random_simplex(rng, n)
            eq = al.equilibrium_returns(risk, w)
            np.testing.assert_allclose(al.markowitz_weights(eq.pi, risk), w, rtol=0, atol=1e-12)

    def test_weights_on_simplex(self):
        with pytest.raises(ValueError):
            al.equilibrium_returns(al.RiskModel(np.eye(2)), [0.7, 0.7])


class TestConfidence:
    def test_diagonal_sigma(self):
        risk = al.RiskModel(np.diag([0.04, 0.01]), tau=0.05)
        np.testing.assert_allclose(al.default_confidence(risk), [0.002, 0.0005])

    def test_tau_zero_rejected(self):
        with pytest.raises(ValueError):
            al.RiskModel(np.eye(2), tau=0.0)
        with pytest.raises(ValueError):
            al.RiskModel(np.eye(2), delta=-1.0)

    def test_non_diagonal_sigma(self, rng):
        risk = al.RiskModel(random_spd(rng, 4))
        np.testing.assert_array_equal(al.default_confidence(risk), 0.05 * np.diag(risk.sigma))


class TestPosterior:
    def test_limits(self, rng):
        n = 5
        risk = al.RiskModel(random_spd(rng, n))
        eq = al.equilibrium_returns(risk, random_simplex(rng, n))
        Q = rng.normal(scale=0.01, size=n)
        loose = al.bl_posterior(eq, risk, CanonicalViews(Q, np.full(n, 1e12)))
        tight = al.bl_posterior(eq, risk, CanonicalViews(Q, np.full(n, 1e-12)))
        assert np.max(np.abs(loose.mu - eq.pi)) < 1e-6
        assert np.max(np.abs(tight.mu - Q)) < 1e-6

    def test_matches_covariance_form(self, rng):
        for _ in range(20):
            n = 3
            risk = al.RiskModel(random_spd(rng, n))
            eq = al.equilibrium_returns(risk, random_simplex(rng, n))
            Q = rng.normal(scale=0.01, size=n)
            omega = rng.uniform(1e-6, 1e-4, size=n)
            post = al.bl_posterior(eq, risk, CanonicalViews(Q, omega))
            mu, sig = woodbury_posterior(eq.pi, risk.sigma, risk.tau, Q, omega)
            np.testing.assert_allclose(post.mu, mu, rtol=1e-9, atol=1e-14)
            np.testing.assert_allclose(post.sigma, sig, rtol=1e-9, atol=1e-16)

    def test_scalar_density_product(self):
        # prior N(pi, tau s) times view likelihood N(q, omega), on a grid
        s, tau, pi, q, omega = 4e-4, 0.05, 0.002, -0.01, 3e-5
        post = al.bl_posterior(al.Equilibrium(np.array([pi]), np.array([1.0])),
                               al.RiskModel([[s]], tau=tau), CanonicalViews([q], [omega]))
        x = np.linspace(-0.05, 0.05, 400_001)
        dens = np.exp(-0.5 * (x - pi) ** 2 / (tau * s) - 0.5 * (x - q) ** 2 / omega)
        dens /= dens.sum()
        mean = float(x @ dens)
        var = float(((x - mean) ** 2) @ dens)
        assert post.mu[0] == pytest.approx(mean, rel=1e-6)
        assert post.sigma[0, 0] - s == pytest.approx(var, rel=1e-4)

    def test_infinite_omega_is_no_view(self, rng):
        n = 3
        risk = al.RiskModel(random_spd(rng, n))
        eq = al.equilibrium_returns(risk, random_simplex(rng, n))
        a = al.bl_posterior(eq, risk, CanonicalViews([0.05, 123.0, 0.0], [1e-5, np.inf, np.inf]))
        b = al.bl_posterior_general(eq, risk, CanonicalViews([0.05, 0, 0], [1e-5, np.inf, np.inf]).to_viewset())
        np.testing.assert_allclose(a.mu, b.mu, rtol=1e-12)
        with pytest.raises(SingularPrecision):
            al.bl_posterior(eq, risk, CanonicalViews(np.zeros(n), [0.0, 1.0, 1.0]))

    def test_shrinkage(self, rng):
        for _ in range(50):
            n = 4
            risk = al.RiskModel(random_spd(rng, n))
            omega = rng.uniform(1e-7, 1e-3, size=n)
            M = al.posterior_shrinkage(risk, omega)
            assert np.linalg.eigvalsh(risk.tau * risk.sigma - M).min() >= -1e-16
            assert np.linalg.eigvalsh(M).min() > 0
            assert np.all(np.diag(M) <= omega)

    @settings(max_examples=100, deadline=None)
    @given(
        arrays(float, 3, elements=st.floats(1e-5, 1e-2)),
        arrays(float, 3, elements=st.floats(-0.05, 0.05)),
        arrays(float, 3, elements=st.floats(-0.05, 0.05)),
        arrays(float, 3, elements=st.floats(1e-6, 1e-1)),
    )
    def test_mean_between_prior_and_view(self, var, pi, Q, omega):
        risk = al.RiskModel(np.diag(var))
        post = al.bl_posterior(al.Equilibrium(pi, np.full(3, 1 / 3)), risk, CanonicalViews(Q, omega))
        lo, hi = np.minimum(pi, Q), np.maximum(pi, Q)
        assert np.all(post.mu >= lo - 1e-12) and np.all(post.mu <= hi + 1e-12)


class TestWeights:
    def test_no_information(self, rng):
        n = 5
        risk = al.RiskModel(random_spd(rng, n))
        w = random_simplex(rng, n)
        eq = al.equilibrium_returns(risk, w)
        post = al.bl_posterior(eq, risk, CanonicalViews.no_views(n))
        np.testing.assert_allclose(post.sigma, (1 + risk.tau) * risk.sigma, rtol=1e-10)
        np.testing.assert_allclose(al.bl_weights(post, risk), w / (1 + risk.tau), rtol=1e-9)

    def test_constructed_inverse(self, rng):
        n = 4
        risk = al.RiskModel(random_spd(rng, n))
        sig_bar = risk.sigma * 1.3
        v = rng.normal(size=n)
        post = al.BLPosterior(risk.delta * sig_bar @ v, sig_bar)
        np.testing.assert_allclose(al.bl_weights(post, risk), v, rtol=1e-10)

    def test_random_search_oracle(self, rng):
        n = 4
        risk = al.RiskModel(random_spd(rng, n))
        eq = al.equilibrium_returns(risk, random_simplex(rng, n))
        post = al.bl_posterior(eq, risk, CanonicalViews(rng.normal(scale=0.01, size=n), al.default_confidence(risk)))
        w = al.bl_weights(post, risk)
        best = al.mean_variance_objective(w, post.mu, post.sigma, risk.delta)
        trials = w + rng.normal(scale=0.05, size=(10_000, n))
        vals = trials @ post.mu - 0.5 * risk.delta * np.einsum("ij,jk,ik->i", trials, post.sigma, trials)
        assert np.all(vals <= best + 1e-15)


class TestOneHot:
    def test_larger_gross_return(self):
        np.testing.assert_array_equal(al.optimal_one_hot([1, 1], [1.10, 1.05]), [1, 0])

    def test_ties_go_to_lowest_index(self):
        np.testing.assert_array_equal(al.optimal_one_hot([2, 3, 4], [2, 3, 4]), [1, 0, 0])

    def test_enumeration(self, rng):
        for _ in range(5):
            n = 6
            p0, p1 = rng.uniform(1, 100, n), rng.uniform(1, 100, n)
            w = al.optimal_one_hot(p0, p1)
            # maximise w . (p1 / p0) over all one-hot vectors
            scores = [np.eye(n)[i] @ (p1 / p0) for i in range(n)]
            assert w @ (p1 / p0) == max(scores)
            assert w.sum() == 1 and set(w) <= {0.0, 1.0}

    def test_prices_positive(self):
        with pytest.raises(ValueError):
            al.optimal_one_hot([1, 0], [1, 1])


class TestInverse:
    def test_scalar_closed_form(self):
        s, tau, delta, omega, pi = 3e-4, 0.05, 0.25, 2e-5, 0.0013
        risk = al.RiskModel([[s]], delta, tau)
        eq = al.Equilibrium(np.array([pi]), np.array([1.0]))
        for w in (1.0, 0.3, -2.0):
            # delta [omega/(tau s) + 1] (s + M) w - omega pi/(tau s) with M = tau s omega/(omega + tau s)
            expected = delta * (s + omega + omega / tau) * w - omega * pi / (tau * s)
            got = al.invert_views(np.array([w]), eq, risk, np.array([omega]))
            assert got[0] == pytest.approx(expected, rel=1e-12, abs=1e-18)

    def test_forward_then_inverse(self, rng):
        n = 5
        risk = al.RiskModel(random_spd(rng, n))
        eq = al.equilibrium_returns(risk, random_simplex(rng, n))
        omega = al.default_confidence(risk)
        Q0 = rng.normal(scale=0.01, size=n)
        w = al.bl_weights(al.bl_posterior(eq, risk, CanonicalViews(Q0, omega)), risk)
        np.testing.assert_allclose(al.invert_views(w, eq, risk, omega), Q0, rtol=0, atol=1e-8)

    def test_inverse_then_forward(self, rng):
        for _ in range(50):
            n = 5
            risk = al.RiskModel(random_spd(rng, n))
            eq = al.equilibrium_returns(risk, random_simplex(rng, n))
            omega = rng.uniform(1e-7, 1e-3, size=n)
            w_star = np.eye(n)[rng.integers(n)]
            Q = al.invert_views(w_star, eq, risk, omega)
            w = al.bl_weights(al.bl_posterior(eq, risk, CanonicalViews(Q, omega)), risk)
            assert np.max(np.abs(w - w_star)) < 1e-8

    def test_omega_must_be_finite(self):
        risk = al.RiskModel(np.eye(2))
        eq = al.equilibrium_returns(risk, [0.5, 0.5])
        with pytest.raises(ValueError):
            al.invert_views([1, 0], eq, risk, [1.0, np.inf])


class TestSimplex:
    def test_on_simplex_unchanged(self):
        w = np.array([0.2, 0.3, 0.5])
        np.testing.assert_array_equal(al.project_simplex(w), w)

    def test_forced_clip(self):
        np.testing.assert_allclose(al.project_simplex([2.0, -1.0]), [1.0, 0.0])

    @pytest.mark.parametrize("n", [2, 3])
    def test_grid_oracle(self, rng, n):
        step = 0.002
        ticks = np.arange(0, 1 + step / 2, step)
        if n == 2:
            grid = np.column_stack([ticks, 1 - ticks])
        else:
            grid = np.array([(a, b, 1 - a - b) for a, b in itertools.product(ticks, ticks) if a + b <= 1 + 1e-12])
        for _ in range(10):
            v = rng.normal(scale=1.5, size=n)
            p = al.project_simplex(v)
            best = grid[np.argmin(((grid - v) ** 2).sum(axis=1))]
            assert np.sum((p - v) ** 2) <= np.sum((best - v) ** 2) + 1e-12
            assert np.max(np.abs(p - best)) < 2 * step

    @settings(max_examples=200, deadline=None)
    @given(arrays(float, st.integers(1, 10), elements=st.floats(-1e3, 1e3)))
    def test_properties(self, v):
        p = al.project_simplex(v)
        assert np.all(p >= 0)
        assert abs(p.sum() - 1) < 1e-9
        np.testing.assert_allclose(al.project_simplex(p), p, atol=1e-12)

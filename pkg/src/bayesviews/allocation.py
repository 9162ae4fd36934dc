"""Mean-variance and Black-Litterman allocation.

All functions are pure and work on plain numpy arrays wrapped in small
dataclasses. Returns are fractional per period (daily), covariances are in
return squared.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import InsufficientHistory, SingularCovariance, SingularPrecision
from .views import CanonicalViews, ViewSet

DEFAULT_DELTA = 0.25
DEFAULT_TAU = 0.05
RIDGE = 1e-8


def _cho(A, err=SingularCovariance, what="covariance"):
    try:
        return linalg.cho_factor(A, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise err(f"{what} is not positive definite: {exc}") from None


@dataclass(frozen=True, eq=False)
class RiskModel:
    sigma: np.ndarray
    delta: float = DEFAULT_DELTA
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        if sigma.shape[0] != sigma.shape[1]:
            raise ValueError(f"covariance must be square, got {sigma.shape}")
        if not np.allclose(sigma, sigma.T, rtol=1e-10, atol=1e-15):
            raise ValueError("covariance must be symmetric")
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"risk aversion must be positive, got {self.delta}")
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive, got {self.tau}")
        sigma = (sigma + sigma.T) / 2
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "_chol", _cho(sigma))

    @property
    def n(self) -> int:
        return self.sigma.shape[0]

    def solve(self, b):
        """``Sigma^-1 b``."""
        return linalg.cho_solve(self._chol, b)


@dataclass(frozen=True, eq=False)
class Equilibrium:
    pi: np.ndarray
    w_cap: np.ndarray


@dataclass(frozen=True, eq=False)
class BLPosterior:
    mu: np.ndarray
    sigma: np.ndarray


def estimate_covariance(prices, t: int, timespan: int, ridge: float = RIDGE) -> np.ndarray:
    """Sample covariance of daily simple returns over the days ``[t-timespan, t)``.

    ``prices`` is a ``T x n`` array or anything with a ``price`` attribute.
    Only prices strictly before ``t`` are read. If the estimate is
    numerically singular (smallest eigenvalue below ``1e-10`` of the
    largest) a ridge of ``ridge * mean(diag)`` is added, or ``ridge`` itself
    when every variance is zero.
    """
    p = np.asarray(getattr(prices, "price", prices), dtype=float)
    if timespan < 2:
        raise ValueError("timespan must be at least 2 days")
    lo = t - timespan - 1
    if lo < 0 or t > p.shape[0]:
        raise InsufficientHistory(f"covariance at row {t} needs {timespan + 1} earlier prices")
    window = p[lo:t]
    r = window[1:] / window[:-1] - 1.0
    cov = np.atleast_2d(np.cov(r, rowvar=False, ddof=1))
    eig = np.linalg.eigvalsh(cov)
    if eig[0] < 1e-10 * max(eig[-1], 0.0) or eig[-1] <= 0:
        scale = float(np.mean(np.diag(cov)))
        cov = cov + ridge * (scale if scale > 0 else 1.0) * np.eye(cov.shape[0])
    return cov


def markowitz_weights(mu, risk: RiskModel) -> np.ndarray:
    """Unconstrained mean-variance optimum ``(delta Sigma)^-1 mu``."""
    return risk.solve(np.asarray(mu, dtype=float)) / risk.delta


def mean_variance_objective(w, mu, sigma, delta) -> float:
    w = np.asarray(w, dtype=float)
    return float(mu @ w - 0.5 * delta * w @ sigma @ w)


def equilibrium_returns(risk: RiskModel, w_cap) -> Equilibrium:
    """CAPM risk premiums by reverse optimisation: ``Pi = delta Sigma w_cap``."""
    w_cap = np.asarray(w_cap, dtype=float)
    if np.any(w_cap < 0) or not np.isclose(w_cap.sum(), 1.0, atol=1e-9):
        raise ValueError("capitalisation weights must lie on the simplex")
    return Equilibrium(risk.delta * risk.sigma @ w_cap, w_cap)


def default_confidence(risk: RiskModel) -> np.ndarray:
    """View variances ``diag(tau Sigma)`` for identity-``P`` views."""
    return risk.tau * np.diag(risk.sigma).copy()


def _prior_precision(risk):
    n = risk.n
    return risk.solve(np.eye(n)) / risk.tau


def bl_posterior(eq: Equilibrium, risk: RiskModel, views: CanonicalViews) -> BLPosterior:
    """Black-Litterman posterior for identity-``P`` views.

    ``M = [(tau Sigma)^-1 + Omega^-1]^-1``, ``Sigma_bar = Sigma + M`` and
    ``mu_bar = M [(tau Sigma)^-1 Pi + Omega^-1 Q]``. Infinite entries of
    ``omega`` carry zero precision.
    """
    if views.n != risk.n:
        raise ValueError(f"views on {views.n} assets for a {risk.n}-asset risk model")
    if np.any(views.omega <= 0):
        raise SingularPrecision("view variances must be positive (use inf for no view)")
    prec = views.precision
    A = _prior_precision(risk)
    H = A + np.diag(prec)
    info = A @ eq.pi + np.where(prec > 0, prec * views.Q, 0.0)
    return _posterior_from_information(H, info, risk)


def bl_posterior_general(eq: Equilibrium, risk: RiskModel, views: ViewSet) -> BLPosterior:
    """Posterior for an arbitrary ``(P, Q, Omega)`` view set."""
    if views.n != risk.n:
        raise ValueError(f"views on {views.n} assets for a {risk.n}-asset risk model")
    c = _cho(views.Omega, SingularPrecision, "view covariance")
    P = views.P
    A = _prior_precision(risk)
    H = A + P.T @ linalg.cho_solve(c, P)
    info = A @ eq.pi + P.T @ linalg.cho_solve(c, views.Q)
    return _posterior_from_information(H, info, risk)


def _posterior_from_information(H, info, risk):
    H = (H + H.T) / 2
    c = _cho(H, SingularPrecision, "posterior precision")
    M = linalg.cho_solve(c, np.eye(H.shape[0]))
    M = (M + M.T) / 2
    mu = linalg.cho_solve(c, info)
    return BLPosterior(mu, risk.sigma + M)


def posterior_shrinkage(risk: RiskModel, omega) -> np.ndarray:
    """``M = [(tau Sigma)^-1 + Omega^-1]^-1`` for diagonal ``Omega``."""
    views = CanonicalViews(np.zeros(risk.n), omega)
    H = _prior_precision(risk) + np.diag(views.precision)
    return np.linalg.inv((H + H.T) / 2)


def bl_weights(post: BLPosterior, risk: RiskModel) -> np.ndarray:
    """``(delta Sigma_bar)^-1 mu_bar``."""
    c = _cho(post.sigma)
    return linalg.cho_solve(c, post.mu) / risk.delta


def optimal_one_hot(price_t, price_next) -> np.ndarray:
    """All capital in the asset with the largest next-day gross return.

    Ties go to the lowest index.
    """
    price_t = np.asarray(price_t, dtype=float)
    price_next = np.asarray(price_next, dtype=float)
    if np.any(price_t <= 0) or np.any(price_next <= 0):
        raise ValueError("prices must be positive")
    w = np.zeros(price_t.size)
    w[int(np.argmax(price_next / price_t))] = 1.0
    return w


def invert_views(w_star, eq: Equilibrium, risk: RiskModel, omega) -> np.ndarray:
    """View returns ``Q*`` whose Black-Litterman weights equal ``w_star``.

    ``Q* = delta [Omega (tau Sigma)^-1 + I] Sigma_bar w* - Omega (tau Sigma)^-1 Pi``
    with ``Sigma_bar`` built from the same ``Omega``.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(~np.isfinite(omega)) or np.any(omega <= 0):
        raise ValueError("omega entries must be finite and positive")
    w_star = np.asarray(w_star, dtype=float)
    n = risk.n
    A = _prior_precision(risk)
    M = np.linalg.inv(A + np.diag(1.0 / omega))
    sigma_bar = risk.sigma + (M + M.T) / 2
    OA = omega[:, None] * A
    return risk.delta * (OA + np.eye(n)) @ (sigma_bar @ w_star) - OA @ eq.pi


def project_simplex(w) -> np.ndarray:
    """Euclidean projection onto ``{w >= 0, sum(w) = 1}`` (sort-based)."""
    v = np.asarray(w, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError("weights must be finite")
    if np.all(v >= 0) and abs(v.sum() - 1.0) <= 1e-15:
        return v.copy()
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)

"""Black-Litterman forward and inverse on a small market.

Run with ``python3 demos/02_black_litterman.py``.
"""

# %%
import numpy as np

from bayesviews import allocation as al
from bayesviews.views import CanonicalViews

np.set_printoptions(precision=6, suppress=True)
rng = np.random.default_rng(1)

# %% [markdown]
# A random daily covariance and cap weights. Reverse optimisation gives the
# equilibrium premium Pi under which the cap weights are optimal.

# %%
n = 4
A = rng.normal(size=(n, n))
risk = al.RiskModel(1e-4 * (A @ A.T / n + 0.5 * np.eye(n)), delta=0.25, tau=0.05)
w_cap = rng.dirichlet(np.ones(n))
eq = al.equilibrium_returns(risk, w_cap)
print("cap weights", w_cap)
print("Pi         ", eq.pi)
print("Markowitz on Pi recovers caps:", al.markowitz_weights(eq.pi, risk))

# %% [markdown]
# A bullish view on asset 0 moves the posterior mean and tilts the weights.
# The other assets carry no view (infinite variance). With daily variances
# and delta = 0.25 even a few basis points is a strong bet, so the raw
# weights lever up; the backtest holds their simplex projection.

# %%
omega = al.default_confidence(risk)
views = CanonicalViews([0.0002, 0.0, 0.0, 0.0], [omega[0], np.inf, np.inf, np.inf])
post = al.bl_posterior(eq, risk, views)
w = al.bl_weights(post, risk)
print("posterior mean", post.mu)
print("raw weights   ", w)
print("held weights  ", al.project_simplex(w))

# %% [markdown]
# The inverse problem: which views make the optimiser go all in on asset 2?

# %%
w_star = np.eye(n)[2]
q_star = al.invert_views(w_star, eq, risk, omega)
w = al.bl_weights(al.bl_posterior(eq, risk, CanonicalViews(q_star, omega)), risk)
print("Q*           ", q_star)
print("weights at Q*", w)
print("round-trip error", np.max(np.abs(w - w_star)))

# %% [markdown]
# Raw weights can be short or levered; the simplex projection turns them
# into a long-only, fully invested book.

# %%
raw = np.array([0.8, -0.3, 0.6, 0.1])
print("projected", al.project_simplex(raw))

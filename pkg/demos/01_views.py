"""Views: compatibility, confidence rotation and canonical form.

Run with ``python3 demos/01_views.py``.
"""

# %%
import warnings

import numpy as np

from bayesviews import allocation as al
from bayesviews.views import ViewSet, canonicalize, check_compatibility, diagonalize_confidence

np.set_printoptions(precision=5, suppress=True)

# %% [markdown]
# Three relative views on assets x, y, z: x beats y by 3%, y beats z by 5%
# and x beats z by 8%. The third view is the sum of the first two, so the set
# is dependent but consistent.

# %%
P = np.array([[1.0, -1.0, 0.0], [0.0, 1.0, -1.0], [1.0, 0.0, -1.0]])
Q = np.array([0.03, 0.05, 0.08])
rep = check_compatibility(ViewSet(P, Q, np.eye(3) * 1e-4))
print("rank", rep.rank_P, "independent", rep.independent, "compatible", rep.compatible)

# %% [markdown]
# Flip the third view to "z beats x by 8%" and the set contradicts itself.
# The witness is a combination of the views that cancels every asset yet
# leaves a nonzero return.

# %%
P_bad = P.copy()
P_bad[2] = [-1.0, 0.0, 1.0]
rep = check_compatibility(ViewSet(P_bad, Q, np.eye(3) * 1e-4))
print("compatible", rep.compatible, "witness", rep.witness)
print("witness @ P =", rep.witness @ P_bad, " witness @ Q =", rep.witness @ Q)

# %% [markdown]
# Correlated view errors can be rotated away without changing the posterior.

# %%
rng = np.random.default_rng(0)
A = rng.normal(size=(3, 3))
sigma = 1e-4 * (A @ A.T / 3 + 0.5 * np.eye(3))
risk = al.RiskModel(sigma)
eq = al.equilibrium_returns(risk, [0.5, 0.3, 0.2])
B = rng.normal(size=(2, 2))
views = ViewSet([[1.0, -1.0, 0.0], [0.0, 1.0, 0.0]], [0.01, 0.004], 1e-4 * (B @ B.T + 0.1 * np.eye(2)))
rotated = diagonalize_confidence(views)
print("rotated Omega diagonal:", np.diag(rotated.Omega))
a = al.bl_posterior_general(eq, risk, views)
b = al.bl_posterior_general(eq, risk, rotated)
print("posterior mean change:", np.max(np.abs(a.mu - b.mu)))

# %% [markdown]
# Canonical form keeps one absolute view per asset. A spread view plus a
# basket view pin both legs; the third asset gets no view (infinite
# variance). Correlated absolute-view errors are dropped with a warning.

# %%
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    cv = canonicalize(views, [0.5, 0.3, 0.2])
print("Q =", cv.Q, " omega =", cv.omega)
for w in caught:
    print("warning:", w.message)

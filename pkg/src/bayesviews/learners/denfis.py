"""Dynamic evolving neuro-fuzzy inference (first-order TSK rules).

Rule antecedents come from the evolving clustering method (ECM): a one-pass
clustering where each cluster has a centre and a radius bounded by
``d / 2``. Each cluster is a rule whose consequent is an affine map of the
input, fitted online by weighted recursive least squares. A prediction
blends the consequents of the ``m_activate`` nearest rules with weights
given by products of triangular memberships ``b +- d/2``.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch, NoRules
from .base import OnlineViewModel, as_input


def triangular(x, b, half_width):
    """Per-dimension triangular membership with peak at ``b``."""
    return np.clip(1.0 - np.abs(np.asarray(x) - b) / half_width, 0.0, 1.0)


def rule_weights(x, centers, d):
    """Normalised firing strengths of ``centers`` at ``x``.

    Falls back to inverse-distance weights when no rule fires (the product
    of memberships is zero outside every rule's support), and to the exact
    rule when ``x`` sits on a centre.
    """
    mu = np.prod(triangular(x[None, :], centers, d / 2.0), axis=1)
    total = mu.sum()
    if total > 0:
        return mu / total
    dist = np.linalg.norm(centers - x[None, :], axis=1)
    if np.any(dist == 0):
        w = (dist == 0).astype(float)
        return w / w.sum()
    w = 1.0 / dist
    return w / w.sum()


class DenfisModel(OnlineViewModel):
    """Online DENFIS regressor.

    Clustering and memberships work in a unit cube: with ``input_scale=s``
    each input is clipped to ``[-s, s]`` and mapped linearly onto ``[0, 1]``
    (z-scored inputs use ``s = 3``); ``input_scale=None`` uses the inputs
    as given. Distances are Euclidean divided by ``sqrt(n_inputs)`` so that
    ``d`` is comparable across input sizes. A new cluster is created when
    the closest cluster would need a radius above ``d / 2`` to absorb the
    sample. Consequents are affine in the raw inputs.
    """

    kind = "denfis"

    def __init__(self, n_inputs, n_outputs, d=0.21, m_activate=3, rls_init=1e3, forgetting=1.0,
                 input_scale=3.0, seed=0):
        super().__init__(n_inputs, n_outputs)
        if d <= 0:
            raise ValueError("d must be positive")
        if m_activate < 1:
            raise ValueError("m_activate must be >= 1")
        self.d = d
        self.m_activate = m_activate
        self.rls_init = rls_init
        self.forgetting = forgetting
        if input_scale is not None and input_scale <= 0:
            raise ValueError("input_scale must be positive or None")
        self.input_scale = input_scale
        self.seed = seed
        self.reset()

    def config(self):
        return dict(
            n_inputs=self.n_inputs, n_outputs=self.n_outputs, d=self.d,
            m_activate=self.m_activate, rls_init=self.rls_init,
            forgetting=self.forgetting, input_scale=self.input_scale, seed=self.seed,
        )

    def reset(self):
        self.state = {
            "centers": np.zeros((0, self.n_inputs)),
            "radii": np.zeros(0),
            "theta": [],
            "P": [],
        }

    @property
    def n_rules(self) -> int:
        return self.state["centers"].shape[0]

    @property
    def threshold(self) -> float:
        return self.d / 2.0

    def _distance(self, x, centers):
        return np.linalg.norm(centers - x[None, :], axis=1) / np.sqrt(self.n_inputs)

    def cube(self, x):
        """Position of ``x`` in the clustering space."""
        s = self.input_scale
        if s is None:
            return x
        return (np.clip(x, -s, s) + s) / (2.0 * s)

    def _check(self, x):
        x = as_input(x)
        if x.shape != (self.n_inputs,):
            raise DimensionMismatch(f"expected {self.n_inputs} inputs, got {x.shape[0]}")
        return x

    def _active(self, u):
        dist = self._distance(u, self.state["centers"])
        m = min(self.m_activate, dist.size)
        idx = np.argsort(dist, kind="stable")[:m]
        return idx, rule_weights(u, self.state["centers"][idx], self.d)

    def predict(self, x):
        x = self._check(x)
        if self.n_rules == 0:
            raise NoRules("model has no rules yet; call update first")
        idx, w = self._active(self.cube(x))
        phi = np.concatenate([[1.0], x])
        outs = np.array([phi @ self.state["theta"][r] for r in idx])
        return w @ outs

    def _add_rule(self, u):
        st = self.state
        D = self.n_inputs
        if self.n_rules:
            nearest = int(np.argmin(self._distance(u, st["centers"])))
            theta = st["theta"][nearest].copy()
        else:
            theta = np.zeros((D + 1, self.n_outputs))
        st["centers"] = np.vstack([st["centers"], u[None, :]])
        st["radii"] = np.append(st["radii"], 0.0)
        st["theta"].append(theta)
        st["P"].append(self.rls_init * np.eye(D + 1))

    def ecm_step(self, u):
        """Absorb the clustering-space point ``u``; returns the rule count."""
        st = self.state
        if self.n_rules == 0:
            self._add_rule(u)
            return self.n_rules
        dist = self._distance(u, st["centers"])
        if np.any(dist <= st["radii"]):
            return self.n_rules
        s = dist + st["radii"]
        a = int(np.argmin(s))
        if s[a] > 2.0 * self.threshold:
            self._add_rule(u)
        else:
            new_r = s[a] / 2.0
            # slide the centre towards u until u lies on the new boundary
            st["centers"][a] = u + (st["centers"][a] - u) * (new_r / dist[a])
            st["radii"][a] = new_r
        return self.n_rules

    def update(self, x, target):
        x = self._check(x)
        y = np.asarray(target, dtype=float).reshape(-1)
        if y.shape != (self.n_outputs,):
            raise DimensionMismatch(f"expected {self.n_outputs} targets, got {y.shape[0]}")
        if not np.all(np.isfinite(y)):
            raise ValueError("target must be finite")
        before = self.predict(x) if self.n_rules else np.zeros_like(y)
        loss = float(np.mean((before - y) ** 2))
        u = self.cube(x)
        self.ecm_step(u)
        idx, w = self._active(u)
        phi = np.concatenate([[1.0], x])
        st = self.state
        lam = self.forgetting
        for r, wr in zip(idx, w):
            if wr < 1e-12:
                continue
            P = st["P"][r]
            theta = st["theta"][r]
            Pphi = P @ phi
            gain = Pphi / (lam / wr + phi @ Pphi)
            err = y - phi @ theta
            theta += np.outer(gain, err)
            P -= np.outer(gain, Pphi)
            P /= lam
            st["P"][r] = (P + P.T) / 2
        return loss

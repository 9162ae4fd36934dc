"""Neural trading baseline: a view model retargeted to portfolio weights.

The wrapped regressor learns logits. Training targets code the hindsight
one-hot allocation as logits that a softmax maps to 0.99 on the winning
asset, so the same regressors serve both the view strategies and this
baseline.
"""

from __future__ import annotations

import numpy as np

from ..errors import NoRules
from .base import OnlineViewModel

WINNER_MASS = 0.99


def softmax(z):
    z = np.asarray(z, dtype=float)
    e = np.exp(z - z.max())
    return e / e.sum()


def target_logits(w_star, mass: float = WINNER_MASS) -> np.ndarray:
    """Logits whose softmax puts ``mass`` on the argmax of ``w_star``."""
    w_star = np.asarray(w_star, dtype=float)
    n = w_star.size
    z = np.zeros(n)
    if n > 1:
        z[int(np.argmax(w_star))] = np.log(mass * (n - 1) / (1.0 - mass))
    return z


def nt_predict(model: OnlineViewModel, x) -> np.ndarray:
    """Long-only weights ``softmax(model(x))``; uniform before any training."""
    try:
        raw = model.predict(x)
    except NoRules:
        raw = np.zeros(model.n_outputs)
    return softmax(raw)


class NeuralTrader:
    def __init__(self, model: OnlineViewModel):
        self.model = model

    @property
    def n_outputs(self):
        return self.model.n_outputs

    def predict(self, x):
        return nt_predict(self.model, x)

    def update(self, x, w_star) -> float:
        return self.model.update(x, target_logits(w_star))

    def reset(self):
        self.model.reset()

    def reset_optimizer(self):
        if hasattr(self.model, "reset_optimizer"):
            self.model.reset_optimizer()

    def snapshot(self):
        return self.model.snapshot()

    def restore(self, snap):
        self.model.restore(snap)

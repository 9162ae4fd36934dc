"""Causal online training loop for the view models.

At day ``t`` the close ``price_t`` reveals which asset was best over the
previous day, so the hindsight target for day ``t-1`` becomes available:
the one-hot allocation ``w*_{t-1}`` or the view returns ``Q*_{t-1}`` that
make the Black-Litterman weights equal it. The loop trains on
``(x_{t-1}, target_{t-1})`` and then predicts from ``x_t``. Nothing after
row ``t`` of the frame is touched at step ``t``.

View targets are expressed in units of ``delta * mean(diag Sigma_t)``, the
natural scale of the inverse problem, so the regressors see numbers of
order one whatever the volatility regime.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, asdict
from typing import Callable, Iterator

import numpy as np

from .. import allocation as al
from ..errors import NoRules, NonFiniteLoss, ZeroTotalCap
from ..features import MIN_INDEX, NormalizerState, assemble_input, input_size
from .denfis import DenfisModel
from .lstm import LstmViewModel

log = logging.getLogger(__name__)


@dataclass
class AllocConfig:
    timespan: int = 90
    delta: float = al.DEFAULT_DELTA
    tau: float = al.DEFAULT_TAU
    ridge: float = al.RIDGE

    def warmup(self) -> int:
        """First row with a full covariance window and full lag features."""
        return max(self.timespan + 1, MIN_INDEX)


@dataclass
class LearnerConfig:
    model: str = "denfis"
    d: float = 0.21
    m_activate: int = 3
    bptt_horizon: int = 30
    learning_rate: float = 1e-3
    seed: int = 0
    use_sentiment: bool = True
    use_capital: bool = False
    normalizer_window: int = 90

    def __post_init__(self):
        if self.model not in ("denfis", "lstm"):
            raise ValueError(f"unknown model {self.model!r}; expected 'denfis' or 'lstm'")

    def as_dict(self):
        return asdict(self)


def make_model(cfg: LearnerConfig, n_assets: int):
    n_in = input_size(n_assets)
    if cfg.model == "lstm":
        return LstmViewModel(n_in, n_assets, bptt_horizon=cfg.bptt_horizon,
                             learning_rate=cfg.learning_rate, seed=cfg.seed)
    return DenfisModel(n_in, n_assets, d=cfg.d, m_activate=cfg.m_activate, seed=cfg.seed)


@dataclass(frozen=True, eq=False)
class MarketContext:
    """Risk model, equilibrium and default view variances at one close."""

    t: int
    risk: al.RiskModel
    eq: al.Equilibrium
    omega: np.ndarray

    @property
    def scale(self) -> float:
        return self.risk.delta * float(np.mean(np.diag(self.risk.sigma)))


def cap_weights(frame, t: int) -> np.ndarray:
    caps = np.asarray(frame.mcap[t], dtype=float)
    total = caps.sum()
    if not total > 0:
        raise ZeroTotalCap(f"total market cap is {total} on row {t}")
    return caps / total


def market_context(frame, t: int, alloc: AllocConfig) -> MarketContext:
    sigma = al.estimate_covariance(frame.price, t, alloc.timespan, alloc.ridge)
    risk = al.RiskModel(sigma, alloc.delta, alloc.tau)
    eq = al.equilibrium_returns(risk, cap_weights(frame, t))
    return MarketContext(t, risk, eq, al.default_confidence(risk))


def hindsight_views(ctx: MarketContext, price_t, price_next) -> np.ndarray:
    """``Q*`` for the day described by ``ctx`` given the next close."""
    w_star = al.optimal_one_hot(price_t, price_next)
    return al.invert_views(w_star, ctx.eq, ctx.risk, ctx.omega)


@dataclass(frozen=True, eq=False)
class OnlineStep:
    t: int
    output: np.ndarray
    raw_output: np.ndarray
    target: np.ndarray | None
    loss: float | None
    context: MarketContext = field(repr=False)


def online_loop(model, frame, alloc: AllocConfig | None = None, learner: LearnerConfig | None = None,
                target: str = "views", capital: Callable[[int], float] | None = None,
                start: int | None = None) -> Iterator[OnlineStep]:
    """Stream predictions day by day.

    ``target="views"`` trains ``model`` on scaled ``Q*`` and yields ``Q_hat``
    in return units. ``target="weights"`` expects a :class:`NeuralTrader`
    and yields long-only weights.
    """
    alloc = alloc or AllocConfig()
    learner = learner or LearnerConfig()
    if target not in ("views", "weights"):
        raise ValueError(f"unknown target kind {target!r}")
    normalizer = NormalizerState(learner.normalizer_window)
    t0 = alloc.warmup() if start is None else max(start, alloc.warmup())
    prev = None
    for t in range(t0, frame.T):
        hist = frame.history(t)
        ctx = market_context(hist, t, alloc)
        cap = capital(t) if capital is not None else 0.0
        x = assemble_input(hist, t, cap, normalizer, learner.use_sentiment, learner.use_capital)
        loss = tgt = None
        if prev is not None:
            px, pctx = prev
            if target == "views":
                tgt = hindsight_views(pctx, hist.price[t - 1], hist.price[t]) / pctx.scale
            else:
                tgt = al.optimal_one_hot(hist.price[t - 1], hist.price[t])
            try:
                loss = model.update(px, tgt)
            except NonFiniteLoss as exc:
                log.warning("skipping update on row %d: %s", t, exc)
                if hasattr(model, "reset_optimizer"):
                    model.reset_optimizer()
        if target == "views":
            try:
                raw = model.predict(x)
                out = raw * ctx.scale
            except NoRules:
                # cold start: echo the equilibrium, i.e. no tilt
                out = ctx.eq.pi.copy()
                raw = out / ctx.scale
        else:
            raw = out = model.predict(x)
        yield OnlineStep(t, out, raw, tgt, loss, ctx)
        prev = (x, ctx)

"""Daily-rebalancing trading simulation.

Each trading day ``t`` a strategy sees the frame up to and including the
close of ``t``, chooses raw weights, which are projected onto the long-only
simplex and held over ``(t, t+1]``. The portfolio is self-financing:
``V_{t+1} = V_t * (w_t . price_{t+1} / price_t)``. No costs, taxes or
short sales; positions are infinitely divisible.
"""

from __future__ import annotations

import datetime as dt
import enum
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import allocation as al
from . import metrics
from .errors import DegenerateVolatility, InsufficientHistory
from .learners.online import (
    AllocConfig,
    LearnerConfig,
    cap_weights,
    hindsight_views,
    make_model,
    market_context,
    online_loop,
)
from .learners.trader import NeuralTrader
from .narrative import NarrativeRecord, make_record
from .views import CanonicalViews

INITIAL_CAPITAL = 10_000.0
RANDOM_VIEW_BOUND = 0.02


class StrategyKind(str, enum.Enum):
    VW = "vw"
    MARKOWITZ = "markowitz"
    BL_RANDOM = "bl_random"
    BL_SENTIMENT = "bl_sentiment"
    NT = "nt"
    NT_SENTIMENT = "nt_sentiment"
    # hindsight benchmark: uses tomorrow's prices, never a tradable strategy
    ORACLE = "oracle"

    @property
    def uses_views(self) -> bool:
        return self in (StrategyKind.MARKOWITZ, StrategyKind.BL_RANDOM, StrategyKind.BL_SENTIMENT, StrategyKind.ORACLE)

    @property
    def uses_learner(self) -> bool:
        return self in (StrategyKind.BL_SENTIMENT, StrategyKind.NT, StrategyKind.NT_SENTIMENT)


@dataclass
class Strategy:
    kind: StrategyKind
    timespan: int = 90
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    seed: int = 0
    random_bound: float = RANDOM_VIEW_BOUND

    def __post_init__(self):
        self.kind = StrategyKind(self.kind)
        if self.timespan < 31:
            raise ValueError(f"timespan must be at least 31 days, got {self.timespan}")
        if self.kind is StrategyKind.NT and self.learner.use_sentiment:
            self.learner = LearnerConfig(**{**self.learner.as_dict(), "use_sentiment": False})
        if self.kind is StrategyKind.NT_SENTIMENT and not self.learner.use_sentiment:
            self.learner = LearnerConfig(**{**self.learner.as_dict(), "use_sentiment": True})

    @property
    def name(self) -> str:
        if self.kind.uses_learner:
            return f"{self.learner.model}_{self.kind.value}"
        return self.kind.value

    def as_dict(self):
        return {
            "kind": self.kind.value, "timespan": self.timespan, "seed": self.seed,
            "random_bound": self.random_bound, "learner": self.learner.as_dict(),
        }


@dataclass
class BacktestConfig:
    initial_capital: float = INITIAL_CAPITAL
    delta: float = al.DEFAULT_DELTA
    tau: float = al.DEFAULT_TAU
    ridge: float = al.RIDGE
    narrative: bool = True
    sortino: bool = False

    def alloc(self, timespan: int) -> AllocConfig:
        return AllocConfig(timespan, self.delta, self.tau, self.ridge)


@dataclass
class DailyRecord:
    date: dt.date
    weights_raw: np.ndarray
    weights_held: np.ndarray
    w_star: np.ndarray
    value: float
    gross_return: float
    vw_gross_return: float

    def as_dict(self):
        return {
            "date": self.date.isoformat(),
            "weights_raw": self.weights_raw.tolist(),
            "weights_held": self.weights_held.tolist(),
            "w_star": self.w_star.tolist(),
            "value": self.value,
            "gross_return": self.gross_return,
            "vw_gross_return": self.vw_gross_return,
        }


@dataclass
class BacktestReport:
    strategy: Strategy
    tickers: tuple[str, ...]
    daily: list[DailyRecord]
    dates: list[dt.date]
    values: np.ndarray
    metrics: dict
    narrative_log: list[NarrativeRecord] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def weights_held(self):
        return np.array([d.weights_held for d in self.daily])

    def weights_raw(self):
        return np.array([d.weights_raw for d in self.daily])

    def to_dict(self):
        return {
            "strategy": self.strategy.as_dict(),
            "name": self.strategy.name,
            "tickers": list(self.tickers),
            "config": self.config,
            "metrics": self.metrics,
            "values": [{"date": d.isoformat(), "value": float(v)} for d, v in zip(self.dates, self.values)],
            "daily": [d.as_dict() for d in self.daily],
            "narrative": [r.as_dict() for r in self.narrative_log],
        }


def vw_weights(frame, t: int) -> np.ndarray:
    """Market-cap weights on day ``t``."""
    return cap_weights(frame, t)


def random_views(rng, n: int, bound: float = RANDOM_VIEW_BOUND, omega=None) -> CanonicalViews:
    """Uniform view returns in ``[-bound, bound]`` with variances ``omega``."""
    if not np.isfinite(bound) or bound < 0:
        raise ValueError("bound must be finite and nonnegative")
    rng = np.random.default_rng(rng)
    q = rng.uniform(-bound, bound, size=n) if bound > 0 else np.zeros(n)
    omega = np.ones(n) if omega is None else np.asarray(omega, dtype=float)
    return CanonicalViews(q, omega)


def warmup(strategy: Strategy) -> int:
    return AllocConfig(strategy.timespan).warmup()


class _Policy:
    """Turns the visible history into raw weights (and optionally views)."""

    def __init__(self, strategy: Strategy, frame, config: BacktestConfig, capital):
        self.s = strategy
        self.kind = strategy.kind
        self.alloc = config.alloc(strategy.timespan)
        self.rng = np.random.default_rng(strategy.seed)
        self.stream = None
        self._full = frame if self.kind is StrategyKind.ORACLE else None
        if self.kind.uses_learner:
            model = make_model(strategy.learner, frame.n)
            if self.kind is StrategyKind.BL_SENTIMENT:
                self.stream = online_loop(model, frame, self.alloc, strategy.learner, "views", capital)
            else:
                self.stream = online_loop(NeuralTrader(model), frame, self.alloc, strategy.learner, "weights", capital)

    def decide(self, hist, t):
        """Return ``(raw_weights, views_or_None, context_or_None)``."""
        kind = self.kind
        if kind is StrategyKind.VW:
            return vw_weights(hist, t), None, None
        if self.stream is not None:
            step = next(self.stream)
            assert step.t == t, (step.t, t)
            ctx = step.context
            if kind is not StrategyKind.BL_SENTIMENT:
                return step.output, None, ctx
            views = CanonicalViews(step.output, ctx.omega)
        else:
            ctx = market_context(hist, t, self.alloc)
            if kind is StrategyKind.MARKOWITZ:
                views = CanonicalViews.no_views(hist.n)
            elif kind is StrategyKind.BL_RANDOM:
                views = random_views(self.rng, hist.n, self.s.random_bound, ctx.omega)
            else:  # ORACLE
                p = self._full.price
                views = CanonicalViews(hindsight_views(ctx, p[t], p[t + 1]), ctx.omega)
        post = al.bl_posterior(ctx.eq, ctx.risk, views)
        return al.bl_weights(post, ctx.risk), views, ctx


def run(strategy: Strategy, frame, config: BacktestConfig | None = None) -> BacktestReport:
    """Simulate ``strategy`` over ``frame`` and score it."""
    config = config or BacktestConfig()
    t0 = warmup(strategy)
    if frame.T < t0 + 2:
        raise InsufficientHistory(f"frame has {frame.T} rows; {strategy.name} needs at least {t0 + 2}")
    price = frame.price
    values = {t0: float(config.initial_capital)}
    policy = _Policy(strategy, frame, config, capital=lambda t: values[t])
    daily, narrative = [], []
    prev_held = None
    for t in range(t0, frame.T - 1):
        hist = frame.history(t)
        raw, views, ctx = policy.decide(hist, t)
        raw = np.asarray(raw, dtype=float)
        held = al.project_simplex(raw)
        gross = price[t + 1] / price[t]
        R = float(held @ gross)
        R_vw = float(vw_weights(frame, t) @ gross)
        values[t + 1] = values[t] * R
        w_star = al.optimal_one_hot(price[t], price[t + 1])
        daily.append(DailyRecord(frame.date(t), raw, held, w_star, values[t], R, R_vw))
        if config.narrative:
            current = held if prev_held is None else prev_held
            narrative.append(make_record(frame.date(t), frame.tickers, hist.sentiment[t], views, ctx, current, held))
        prev_held = held
    dates = [frame.date(t) for t in range(t0, frame.T)]
    vals = np.array([values[t] for t in range(t0, frame.T)])
    report = BacktestReport(strategy, frame.tickers, daily, dates, vals, {}, narrative,
                            {**asdict(config), "start": dates[0].isoformat(), "end": dates[-1].isoformat()})
    report.metrics = compute_metrics(report, config.sortino)
    return report


def compute_metrics(report: BacktestReport, sortino: bool = False) -> dict:
    held = report.weights_held()
    raw = report.weights_raw()
    opt = np.array([d.w_star for d in report.daily])
    rp = np.array([d.gross_return for d in report.daily])
    rv = np.array([d.vw_gross_return for d in report.daily])
    out = {
        "rmse": metrics.metric_rmse(held, opt),
        "rmse_raw": metrics.metric_rmse(raw, opt),
        "ar": metrics.metric_ar(report.values, report.dates),
        "mdd": metrics.metric_mdd(report.values),
    }
    try:
        out["sr"] = metrics.metric_sr(rp, rv)
    except DegenerateVolatility:
        out["sr"] = None
    if sortino:
        try:
            out["sortino"] = metrics.metric_sortino(rp, rv)
        except DegenerateVolatility:
            out["sortino"] = None
    out["final_value"] = float(report.values[-1])
    return out


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_report(report: BacktestReport, out_dir, name: str | None = None) -> dict:
    """Write ``<name>.report.json``, ``<name>.values.csv`` and ``<name>.weights.csv``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = name or report.strategy.name
    paths = {
        "report": out_dir / f"{name}.report.json",
        "values": out_dir / f"{name}.values.csv",
        "weights": out_dir / f"{name}.weights.csv",
    }
    _atomic_write(paths["report"], json.dumps(report.to_dict(), indent=1))
    lines = ["date,value"] + [f"{d.isoformat()},{v!r}" for d, v in zip(report.dates, map(float, report.values))]
    _atomic_write(paths["values"], "\n".join(lines) + "\n")
    header = ["date"] + [f"{tk}_held" for tk in report.tickers] + [f"{tk}_raw" for tk in report.tickers]
    rows = [",".join(header)]
    for d in report.daily:
        rows.append(",".join([d.date.isoformat()] + [repr(float(x)) for x in d.weights_held] + [repr(float(x)) for x in d.weights_raw]))
    _atomic_write(paths["weights"], "\n".join(rows) + "\n")
    return paths


TABLE_COLUMNS = ("strategy", "RMSE", "SR", "MDD(%)", "AR(%)")


def metrics_table_rows(named_reports):
    for name, rep in named_reports:
        m = rep.metrics
        sr = "" if m.get("sr") is None else f"{m['sr']:.2f}"
        yield (name, f"{m['rmse']:.4f}", sr, f"{100 * m['mdd']:.2f}", f"{100 * m['ar']:.2f}")


def write_metrics_table(named_reports, path) -> Path:
    path = Path(path)
    lines = [",".join(TABLE_COLUMNS)] + [",".join(r) for r in metrics_table_rows(named_reports)]
    _atomic_write(path, "\n".join(lines) + "\n")
    return path
